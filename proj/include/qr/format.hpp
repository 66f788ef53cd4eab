#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "qr/geometry.hpp"

namespace qr {

// 17 significant digits: enough to round-trip any double exactly.
std::string format_g17(double x);
// "a+bi" / "a-bi" form, both parts always present.
std::string format_complex(const Complex& z);

// Accepts "a+bi", "a-bi", "a", "bi", "i", "-i", with optional exponents in
// either part. Throws std::invalid_argument on malformed input.
Complex parse_complex(std::string_view s);

// Minimal streaming JSON writer. Callers are responsible for emitting keys
// in the order they want (the output contract here is sorted keys and
// format_g17 numbers, so the files are byte-stable across runs).
class JsonWriter {
public:
    explicit JsonWriter(std::ostream& os) : os_(os) {}

    void begin_object();
    void end_object();
    void begin_array(std::string_view key);  // key form, inside an object
    void begin_array();                      // value form, inside an array
    void begin_object(std::string_view key);
    void begin_object_in_array();
    void end_array();

    void kv(std::string_view key, std::string_view value);
    void kv(std::string_view key, double value);
    void kv(std::string_view key, long long value);
    void kv(std::string_view key, int value) { kv(key, static_cast<long long>(value)); }
    void kv(std::string_view key, bool value);
    void value(double v);
    void value(long long v);
    void value(std::string_view v);

private:
    void comma();
    void write_key(std::string_view key);
    void write_string(std::string_view s);

    std::ostream& os_;
    std::vector<bool> has_item_;  // per open scope
};

}  // namespace qr
