#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>
#include <string_view>

namespace steiner {

// Exact rationals for radii, growth increments and reduced weights.
using Q = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// Non-negative exact weight; exact growth stays dyadic, thresholds
// of the rounded variant are arbitrary rationals, so one type covers both.
using HalfWeight = Q;

inline Q q(std::int64_t a, std::int64_t b = 1) { return Q(a, b); }

std::string to_string(const Q& x);
Q parse_rational(std::string_view s);  // "3", "-1/2", "0.25"

inline BigInt floor_q(const Q& x) {
    BigInt n = boost::multiprecision::numerator(x);
    BigInt d = boost::multiprecision::denominator(x);
    BigInt r = n / d;
    if (n < 0 && r * d != n) r -= 1;
    return r;
}

inline BigInt ceil_q(const Q& x) { return -floor_q(-x); }

inline double to_double(const Q& x) { return x.convert_to<double>(); }

}  // namespace steiner
