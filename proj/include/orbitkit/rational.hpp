#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <regex>
#include <stdexcept>
#include <string>

namespace orbitkit {

using Rational = boost::multiprecision::mpq_rational;
using BigInt = boost::multiprecision::mpz_int;

/// Thrown for malformed user input (bad fractions, missing fields, ...).
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parses "p", "-p", "p/q" with q > 0 into an exact rational. Anything else,
/// including a zero denominator, whitespace or decimal points, is rejected.
inline Rational parse_rational(const std::string& text) {
    static const std::regex pattern(R"(^([+-]?[0-9]+)(/([0-9]+))?$)");
    std::smatch m;
    if (!std::regex_match(text, m, pattern)) {
        throw ParseError("malformed rational '" + text + "'");
    }
    BigInt num(m[1].str().front() == '+' ? m[1].str().substr(1) : m[1].str());
    BigInt den(1);
    if (m[3].matched) {
        den = BigInt(m[3].str());
        if (den == 0) {
            throw ParseError("zero denominator in '" + text + "'");
        }
    }
    return Rational(num, den);
}

inline std::string to_string(const Rational& q) {
    return q.str();
}

inline double to_double(const Rational& q) {
    return q.convert_to<double>();
}

inline long double to_long_double(const Rational& q) {
    return q.convert_to<long double>();
}

/// Natural log of a positive rational, accurate even when the value
/// overflows a double.
inline double log_rational(const Rational& q) {
    if (q <= 0) {
        throw std::domain_error("log of non-positive rational");
    }
    const BigInt num = boost::multiprecision::numerator(q);
    const BigInt den = boost::multiprecision::denominator(q);
    auto log_big = [](const BigInt& v) {
        const std::size_t bits = boost::multiprecision::msb(v) + 1;
        if (bits < 1000) {
            return std::log(v.convert_to<double>());
        }
        const std::size_t shift = bits - 64;
        const BigInt top = v >> shift;
        return std::log(top.convert_to<double>()) + static_cast<double>(shift) * std::log(2.0);
    };
    return log_big(num) - log_big(den);
}

/// Nearest integer, ties away from zero.
inline BigInt round_nearest(const Rational& q) {
    const BigInt num = boost::multiprecision::numerator(q);
    const BigInt den = boost::multiprecision::denominator(q);
    BigInt twice = 2 * num + (num >= 0 ? den : BigInt(-den));
    return twice / (2 * den);
}

inline Rational abs(const Rational& q) {
    return q < 0 ? Rational(-q) : q;
}

} // namespace orbitkit
