#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

#include "unitroot/errors.hpp"

namespace unitroot {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline BigInt big_pow(const BigInt& base, unsigned long exp) {
    return boost::multiprecision::pow(base, exp);
}

/// base^exp for integral exp of either sign.
inline Rational rational_pow(const BigInt& base, long long exp) {
    if (exp >= 0) return Rational(big_pow(base, static_cast<unsigned long>(exp)));
    return Rational(BigInt(1), big_pow(base, static_cast<unsigned long>(-exp)));
}

inline BigInt numerator(const Rational& r) { return boost::multiprecision::numerator(r); }
inline BigInt denominator(const Rational& r) { return boost::multiprecision::denominator(r); }

inline bool is_integer(const Rational& r) { return denominator(r) == 1; }

inline std::string to_string(const Rational& r) {
    if (is_integer(r)) return numerator(r).str();
    return numerator(r).str() + "/" + denominator(r).str();
}

/// Parses "a" or "a/b" (decimal, optional leading '-').
inline Rational parse_rational(const std::string& s) {
    const auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rational(BigInt(s));
        BigInt num(s.substr(0, slash));
        BigInt den(s.substr(slash + 1));
        if (den == 0) throw SchemaError("rational with zero denominator: " + s);
        return Rational(num, den);
    } catch (const std::runtime_error&) {
        throw SchemaError("malformed rational literal: " + s);
    }
}

}  // namespace unitroot
