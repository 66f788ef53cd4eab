#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace qr {

// Finite word over {-1,+1}, most significant letter first. The string form
// uses '+' and '-', e.g. "+-" is the word (1,-1).
class Word {
public:
    Word() = default;
    static Word single(int letter);
    static Word repeated(int letter, std::size_t n);
    static Word parse(std::string_view s);  // throws std::invalid_argument

    void push_back(int letter);  // letter must be +1 or -1
    std::size_t size() const { return letters_.size(); }
    bool empty() const { return letters_.empty(); }
    int operator[](std::size_t i) const { return letters_[i]; }
    Word prefix(std::size_t n) const;
    std::string str() const;

    bool operator==(const Word&) const = default;
    // Lexicographic with -1 < +1; shorter prefixes sort first.
    bool operator<(const Word& o) const { return letters_ < o.letters_; }

private:
    std::vector<std::int8_t> letters_;
};

std::size_t common_prefix_length(const Word& a, const Word& b);

// Drop the first letter. Throws std::domain_error on the empty word.
Word shift_sigma(const Word& u);

// (u1,...,un) -> (u1*u2, ..., u1*un): the address a level-n piece is carried
// to by one application of the map. Throws std::domain_error on the empty word.
Word shift_tau(const Word& u);

Word child(Word u, int letter);

// All level scales in log space. Everything below level ~17 underflows a
// double, so only logs are stored. Built by the defining recurrence
//   log t_{n+1} = log alpha + log s_n,   log s_n = log t_n - K^n,
// which keeps the recurrence an exact identity of stored values.
struct ScaleTable {
    double K = 0.0;
    double delta = 0.0;
    double log_alpha = 0.0;  // alpha = delta/4
    double log_t0 = 0.0;     // t0 = 4e
    std::vector<double> K_pow;  // K^n
    std::vector<double> log_t;  // outer radius of level-n pieces
    std::vector<double> log_s;  // inner radius, log s_n = log t_n - K^n
    std::vector<double> log_r;  // center spacing, r_n = s_{n-1}/s_0; log_r[0] unused

    static ScaleTable build(double K, double delta, int max_depth = 64);
    int max_depth() const { return static_cast<int>(log_t.size()) - 1; }
};

// Center of the level-|u| disk with address u: sum of u_j * r_j. Real by
// construction. Summed smallest term first; terms below level ~5 no longer
// move the double at all (r_j decays super-exponentially).
double center_of(const Word& u, const ScaleTable& st);

// Truncation of the limit series at a finite prefix. The discarded tail is
// smaller than cantor_tail_bound(st, |u|).
double cantor_point(const Word& u, const ScaleTable& st);
double cantor_tail_bound(const ScaleTable& st, std::size_t n);  // 2 * r_{n+1}

}  // namespace qr
