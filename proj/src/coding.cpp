#include "qr/coding.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qr {

Word Word::single(int letter) {
    Word w;
    w.push_back(letter);
    return w;
}

Word Word::repeated(int letter, std::size_t n) {
    Word w;
    for (std::size_t i = 0; i < n; ++i) w.push_back(letter);
    return w;
}

Word Word::parse(std::string_view s) {
    Word w;
    for (char c : s) {
        if (c == '+') w.push_back(1);
        else if (c == '-') w.push_back(-1);
        else throw std::invalid_argument(std::string("bad word letter '") + c + "', expected '+' or '-'");
    }
    return w;
}

void Word::push_back(int letter) {
    if (letter != 1 && letter != -1)
        throw std::invalid_argument("word letters must be +1 or -1, got " + std::to_string(letter));
    letters_.push_back(static_cast<std::int8_t>(letter));
}

Word Word::prefix(std::size_t n) const {
    Word w;
    std::size_t m = n < letters_.size() ? n : letters_.size();
    for (std::size_t i = 0; i < m; ++i) w.letters_.push_back(letters_[i]);
    return w;
}

std::string Word::str() const {
    std::string s;
    s.reserve(letters_.size());
    for (auto l : letters_) s.push_back(l > 0 ? '+' : '-');
    return s;
}

std::size_t common_prefix_length(const Word& a, const Word& b) {
    std::size_t n = a.size() < b.size() ? a.size() : b.size();
    std::size_t i = 0;
    while (i < n && a[i] == b[i]) ++i;
    return i;
}

Word shift_sigma(const Word& u) {
    if (u.empty()) throw std::domain_error("shift of the empty word");
    Word w;
    for (std::size_t i = 1; i < u.size(); ++i) w.push_back(u[i]);
    return w;
}

Word shift_tau(const Word& u) {
    if (u.empty()) throw std::domain_error("shift of the empty word");
    Word w;
    for (std::size_t i = 1; i < u.size(); ++i) w.push_back(u[0] * u[i]);
    return w;
}

Word child(Word u, int letter) {
    u.push_back(letter);
    return u;
}

ScaleTable ScaleTable::build(double K, double delta, int max_depth) {
    if (!(K > 1.0) || !std::isfinite(K))
        throw std::invalid_argument("scale table needs K > 1, got " + std::to_string(K));
    if (!(delta > 0.0) || !(delta < 1.0))
        throw std::invalid_argument("scale table needs 0 < delta < 1, got " + std::to_string(delta));
    if (max_depth < 1) throw std::invalid_argument("scale table depth must be >= 1");

    ScaleTable st;
    st.K = K;
    st.delta = delta;
    st.log_alpha = std::log(0.25 * delta);
    st.log_t0 = std::log(4.0) + 1.0;  // t0 = 4e

    st.K_pow.resize(max_depth + 1);
    st.log_t.resize(max_depth + 1);
    st.log_s.resize(max_depth + 1);
    st.log_r.resize(max_depth + 1);

    st.K_pow[0] = 1.0;
    st.log_t[0] = st.log_t0;
    st.log_s[0] = st.log_t0 - 1.0;  // s0 = 4
    st.log_r[0] = std::numeric_limits<double>::quiet_NaN();

    for (int n = 1; n <= max_depth; ++n) {
        st.K_pow[n] = st.K_pow[n - 1] * K;
        st.log_t[n] = st.log_alpha + st.log_s[n - 1];
        st.log_s[n] = st.log_t[n] - st.K_pow[n];
        st.log_r[n] = st.log_s[n - 1] - st.log_s[0];
    }
    return st;
}

double center_of(const Word& u, const ScaleTable& st) {
    if (static_cast<int>(u.size()) > st.max_depth())
        throw std::domain_error("word deeper than the scale table");
    double acc = 0.0;
    for (std::size_t j = u.size(); j >= 1; --j)
        acc += static_cast<double>(u[j - 1]) * std::exp(st.log_r[j]);
    return acc;
}

double cantor_point(const Word& u, const ScaleTable& st) {
    return center_of(u, st);
}

double cantor_tail_bound(const ScaleTable& st, std::size_t n) {
    if (static_cast<int>(n) + 1 > st.max_depth())
        throw std::domain_error("tail bound deeper than the scale table");
    return 2.0 * std::exp(st.log_r[n + 1]);
}

}  // namespace qr
