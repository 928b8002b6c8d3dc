#pragma once

#include <compare>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace spincool {

// Exact half-integer angular momentum value, stored as twice the value.
// Avoids 4.4999999-style drift when enumerating projections of large spins.
class HalfInt {
public:
    constexpr HalfInt() = default;
    constexpr explicit HalfInt(int whole) : twice_(2 * whole) {}
    static constexpr HalfInt from_twice(int t) {
        HalfInt h;
        h.twice_ = t;
        return h;
    }

    constexpr int twice() const { return twice_; }
    constexpr double value() const { return 0.5 * twice_; }
    constexpr bool is_integer() const { return twice_ % 2 == 0; }

    constexpr HalfInt operator-() const { return from_twice(-twice_); }
    constexpr HalfInt operator+(HalfInt o) const { return from_twice(twice_ + o.twice_); }
    constexpr HalfInt operator-(HalfInt o) const { return from_twice(twice_ - o.twice_); }
    constexpr auto operator<=>(const HalfInt&) const = default;

    // "9/2", "-1/2", "0", "3"
    std::string str() const {
        if (twice_ % 2 == 0) return std::to_string(twice_ / 2);
        return std::to_string(twice_) + "/2";
    }
    // decimal form for CSV columns: "4.5", "-0.5", "1.0"
    std::string str_decimal() const {
        std::string s = std::to_string(twice_ / 2);
        if (twice_ < 0 && twice_ / 2 == 0) s = "-0";
        return s + (twice_ % 2 == 0 ? ".0" : ".5");
    }

    // Accepts "p/2", plain integers, and decimals ending in .0 or .5.
    static HalfInt parse(const std::string& text);

private:
    int twice_ = 0;
};

inline HalfInt HalfInt::parse(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("empty spin value");
    auto slash = text.find('/');
    if (slash != std::string::npos) {
        int num = 0, den = 0;
        try {
            num = std::stoi(text.substr(0, slash));
            den = std::stoi(text.substr(slash + 1));
        } catch (const std::exception&) {
            throw std::invalid_argument("bad spin value: " + text);
        }
        if (den == 2) return from_twice(num);
        if (den == 1) return HalfInt(num);
        throw std::invalid_argument("bad spin denominator in: " + text);
    }
    char* end = nullptr;
    double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0')
        throw std::invalid_argument("bad spin value: " + text);
    double t = 2.0 * v;
    int ti = static_cast<int>(t > 0 ? t + 0.5 : t - 0.5);
    if (t - ti > 1e-9 || t - ti < -1e-9)
        throw std::invalid_argument("spin value must be a multiple of 1/2: " + text);
    return from_twice(ti);
}

// number of projections of a spin j: 2j+1
constexpr int multiplicity(HalfInt j) { return j.twice() + 1; }

}  // namespace spincool
