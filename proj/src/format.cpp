#include "qr/format.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace qr {

std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string format_complex(const Complex& z) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.17g%+.17gi", z.real(), z.imag());
    return buf;
}

namespace {

double parse_real(std::string_view s) {
    if (s.empty()) throw std::invalid_argument("empty number");
    std::string tmp(s);
    char* end = nullptr;
    double v = std::strtod(tmp.c_str(), &end);
    if (end != tmp.c_str() + tmp.size())
        throw std::invalid_argument("bad number: '" + tmp + "'");
    return v;
}

}  // namespace

Complex parse_complex(std::string_view s) {
    // Trim whitespace.
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    if (s.empty()) throw std::invalid_argument("empty complex literal");

    bool has_i = (s.back() == 'i' || s.back() == 'I');
    if (!has_i) return Complex(parse_real(s), 0.0);

    std::string_view body = s.substr(0, s.size() - 1);
    // Find the split between real and imaginary parts: the last '+'/'-'
    // that is not a leading sign and not part of an exponent.
    size_t split = std::string_view::npos;
    for (size_t i = body.size(); i-- > 1;) {
        char c = body[i];
        if (c != '+' && c != '-') continue;
        char prev = body[i - 1];
        if (prev == 'e' || prev == 'E') continue;
        split = i;
        break;
    }
    if (split == std::string_view::npos) {
        // Pure imaginary: "bi", "i", "-i", "+i".
        std::string_view im = body;
        if (im.empty() || im == "+") return Complex(0.0, 1.0);
        if (im == "-") return Complex(0.0, -1.0);
        return Complex(0.0, parse_real(im));
    }
    std::string_view re = body.substr(0, split);
    std::string_view im = body.substr(split);  // includes sign
    double imv;
    if (im == "+") imv = 1.0;
    else if (im == "-") imv = -1.0;
    else imv = parse_real(im);
    return Complex(parse_real(re), imv);
}

void JsonWriter::comma() {
    if (!has_item_.empty()) {
        if (has_item_.back()) os_ << ',';
        has_item_.back() = true;
    }
}

void JsonWriter::write_string(std::string_view s) {
    os_ << '"';
    for (char c : s) {
        switch (c) {
            case '"': os_ << "\\\""; break;
            case '\\': os_ << "\\\\"; break;
            case '\n': os_ << "\\n"; break;
            case '\t': os_ << "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    os_ << buf;
                } else {
                    os_ << c;
                }
        }
    }
    os_ << '"';
}

void JsonWriter::write_key(std::string_view key) {
    comma();
    write_string(key);
    os_ << ':';
}

void JsonWriter::begin_object() {
    comma();
    os_ << '{';
    has_item_.push_back(false);
}

void JsonWriter::begin_object(std::string_view key) {
    write_key(key);
    os_ << '{';
    has_item_.push_back(false);
}

void JsonWriter::begin_object_in_array() {
    comma();
    os_ << '{';
    has_item_.push_back(false);
}

void JsonWriter::end_object() {
    os_ << '}';
    has_item_.pop_back();
}

void JsonWriter::begin_array(std::string_view key) {
    write_key(key);
    os_ << '[';
    has_item_.push_back(false);
}

void JsonWriter::begin_array() {
    comma();
    os_ << '[';
    has_item_.push_back(false);
}

void JsonWriter::end_array() {
    os_ << ']';
    has_item_.pop_back();
}

void JsonWriter::kv(std::string_view key, std::string_view value) {
    write_key(key);
    write_string(value);
}

void JsonWriter::kv(std::string_view key, double value) {
    write_key(key);
    os_ << format_g17(value);
}

void JsonWriter::kv(std::string_view key, long long value) {
    write_key(key);
    os_ << value;
}

void JsonWriter::kv(std::string_view key, bool value) {
    write_key(key);
    os_ << (value ? "true" : "false");
}

void JsonWriter::value(double v) {
    comma();
    os_ << format_g17(v);
}

void JsonWriter::value(long long v) {
    comma();
    os_ << v;
}

void JsonWriter::value(std::string_view v) {
    comma();
    write_string(v);
}

}  // namespace qr
