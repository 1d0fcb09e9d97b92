#pragma once

#include <cstdint>
#include <string>

#include "vidperf/errors.hpp"

namespace vidperf {

// Exact fraction, kept normalized with den > 0. Channel splits must stay
// integral, so shift fractions are never stored as floating point.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  constexpr Rational() = default;
  Rational(std::int64_t n, std::int64_t d);  // normalizes, throws if d == 0

  bool is_zero() const { return num == 0; }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  friend bool operator==(const Rational&, const Rational&) = default;
};

// Accepts "p/q" or a bare integer "p".
Rational parse_rational(const std::string& text);
std::string to_string(const Rational& r);

// r * count if the product is an integer, otherwise throws ValidationError.
std::int64_t exact_multiple(const Rational& r, std::int64_t count);
bool divides_evenly(const Rational& r, std::int64_t count);

}  // namespace vidperf
