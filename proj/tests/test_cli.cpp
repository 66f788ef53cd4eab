#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"

namespace {

struct RunResult {
    int code = -1;
    std::string out;
};

int counter = 0;

RunResult run_cli(const std::string& args) {
    std::string outfile = "cli_capture_" + std::to_string(counter++) + ".txt";
    std::string cmd = std::string("\"") + QR_CLI_PATH + "\" " + args + " > " + outfile +
                      " 2> " + outfile + ".err";
    int status = std::system(cmd.c_str());
    RunResult r;
    if (WIFEXITED(status)) r.code = WEXITSTATUS(status);
    std::ifstream is(outfile, std::ios::binary);
    std::ostringstream buf;
    buf << is.rdbuf();
    r.out = buf.str();
    std::remove(outfile.c_str());
    std::remove((outfile + ".err").c_str());
    return r;
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream buf;
    buf << is.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("cli verify passes at the reference parameters") {
    RunResult r = run_cli("--delta 0.05 verify --samples 2000 --glue-samples 300 --seam-depth 6");
    CHECK(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["all_pass"] == true);
    CHECK(j["K"] == 1.5);
    CHECK(j["delta"] == 0.05);
    CHECK(j["checks"].size() >= 6);
    for (const auto& c : j["checks"]) CHECK(c["pass"] == true);
}

TEST_CASE("cli verify output is byte stable") {
    std::string args = "--delta 0.05 --seed 7 verify --samples 500 --glue-samples 100 --seam-depth 5";
    RunResult a = run_cli(args);
    RunResult b = run_cli(args);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK_FALSE(a.out.empty());
}

TEST_CASE("cli default delta is derived from K") {
    RunResult r = run_cli("verify --samples 200 --glue-samples 50 --seam-depth 4");
    CHECK(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    double d = j["delta"];
    CHECK(d == doctest::Approx(0.064285714285714285).epsilon(1e-12));
}

TEST_CASE("cli gauge emits the cover table") {
    RunResult r = run_cli("--delta 0.05 gauge --n-max 8");
    CHECK(r.code == 0);
    CHECK(r.out.rfind("n,neg_log_2sn,S_direct,S_closed,dim_est\n", 0) == 0);
    int lines = 0;
    for (char c : r.out)
        if (c == '\n') ++lines;
    CHECK(lines == 9);
}

TEST_CASE("cli cantor lists level points in word order") {
    RunResult r = run_cli("--delta 0.05 cantor --level 3");
    CHECK(r.code == 0);
    std::istringstream is(r.out);
    std::string line;
    std::getline(is, line);
    CHECK(line == "word,re,im,level");
    int rows = 0;
    double prev = -10;
    std::string first_word;
    while (std::getline(is, line)) {
        ++rows;
        auto comma = line.find(',');
        std::string word = line.substr(0, comma);
        if (rows == 1) first_word = word;
        double re = std::stod(line.substr(comma + 1));
        CHECK(re > prev);  // word order is spatial order
        prev = re;
    }
    CHECK(rows == 8);
    CHECK(first_word == "---");
}

TEST_CASE("cli cantor side outputs") {
    RunResult r = run_cli(
        "--delta 0.05 cantor --level 2 --boxdim-out bd.csv --n-max 12 --scales-out sc.csv");
    CHECK(r.code == 0);
    std::string bd = slurp("bd.csv");
    CHECK(bd.rfind("n,neg_log_2sn,S_direct,S_closed,dim_est\n", 0) == 0);
    std::string sc = slurp("sc.csv");
    CHECK(sc.rfind("n,log_t,log_s,log_r\n", 0) == 0);
    std::remove("bd.csv");
    std::remove("sc.csv");
}

TEST_CASE("cli classify reports region and word") {
    RunResult r = run_cli("--delta 0.05 classify --point 1.03");
    CHECK(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["tag"] == "Y");
    CHECK(j["word"] == "+");
    RunResult q = run_cli("--delta 0.05 classify --point 2+0i");
    auto jq = nlohmann::json::parse(q.out);
    CHECK(jq["tag"] == "ZQuad");
    CHECK(jq["word"] == "");
}

TEST_CASE("cli rejects malformed input with the usage code") {
    CHECK(run_cli("--delta 0.05 classify --point 1.0q3").code == 2);
    CHECK(run_cli("").code == 2);
    CHECK(run_cli("--bogus-flag verify").code == 2);
    CHECK(run_cli("--delta 0.9 verify --samples 10 --glue-samples 10 --seam-depth 3").code == 2);
    CHECK(run_cli("--help").code == 0);
}

TEST_CASE("cli render writes a deterministic pgm") {
    RunResult a = run_cli("--delta 0.05 --threads 1 render --px 16 --max-iter 16 --out ra.pgm");
    RunResult b = run_cli("--delta 0.05 --threads 8 render --px 16 --max-iter 16 --out rb.pgm");
    CHECK(a.code == 0);
    CHECK(b.code == 0);
    std::string ia = slurp("ra.pgm");
    std::string ib = slurp("rb.pgm");
    CHECK(ia.rfind("P5\n16 16\n255\n", 0) == 0);
    CHECK(ia.size() == 13 + 256);
    CHECK(ia == ib);
    std::remove("ra.pgm");
    std::remove("rb.pgm");
}

TEST_CASE("cli pullback on the analytic oracle") {
    RunResult r = run_cli(
        "--delta 0.05 pullback --map quad:c=0+0i --xi 1+0i --depth 6 --centers 6 --radii 3");
    CHECK(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["counts"].size() == 7);
    CHECK(j["counts"][6] == 64);
    for (const auto& c : j["checks"]) CHECK(c["pass"] == true);
    CHECK(j["C_est"].get<double>() > 0.0);
}

TEST_CASE("cli pullback flags an exceptional base point") {
    RunResult r = run_cli("--delta 0.05 pullback --map quad:c=0+0i --xi 0+0i --depth 4");
    CHECK(r.code == 1);
    auto j = nlohmann::json::parse(r.out);
    bool found_failing = false;
    for (const auto& c : j["checks"])
        if (c["pass"] == false) found_failing = true;
    CHECK(found_failing);
}

TEST_CASE("cli pullback on the piecewise map") {
    RunResult r = run_cli(
        "--delta 0.05 pullback --map explicit --xi -1+0i --depth 6 --centers 8 --radii 4");
    CHECK(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["counts"][6] == 64);
    for (const auto& c : j["checks"]) CHECK(c["pass"] == true);
}
