#pragma once

// Exact rational numbers used for every probability, reward and posterior
// weight in the engine. Backed by GMP.

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace bomai {

using Rational = mpq_class;

/// Parses "num/den", "num" or a finite decimal such as "0.25".
/// Throws std::invalid_argument on malformed input or a zero denominator.
Rational parse_rational(std::string_view text);

/// Canonical "num/den" form; integers are printed without a denominator.
std::string to_string(const Rational& q);

/// Nearest double. Tiny values underflow to 0 without error.
double to_double(const Rational& q);

/// Natural log of a positive rational, accurate for values far outside the
/// range of double.
double log_of(const Rational& q);

/// base^exponent for a non-negative integer exponent.
Rational power(const Rational& base, unsigned exponent);

/// Sum of a sequence of rationals.
Rational sum(const std::vector<Rational>& values);

/// n/d in canonical form.
inline Rational ratio(long n, long d) {
  Rational q(n, d);
  q.canonicalize();
  return q;
}

inline bool is_probability(const Rational& q) { return q >= 0 && q <= 1; }

}  // namespace bomai
