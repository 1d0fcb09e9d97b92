#include "vidperf/rational.hpp"

#include <fmt/format.h>

#include <charconv>
#include <numeric>

namespace vidperf {

Rational::Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
  if (den == 0) throw ValidationError("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  if (num == 0) {
    den = 1;
    return;
  }
  std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  num /= g;
  den /= g;
}

namespace {

std::int64_t parse_int(std::string_view text, const std::string& context) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ValidationError(fmt::format("bad rational '{}'", context));
  }
  return value;
}

}  // namespace

Rational parse_rational(const std::string& text) {
  auto slash = text.find('/');
  if (slash == std::string::npos) return Rational{parse_int(text, text), 1};
  std::string_view sv(text);
  std::int64_t num = parse_int(sv.substr(0, slash), text);
  std::int64_t den = parse_int(sv.substr(slash + 1), text);
  if (den == 0) throw ValidationError(fmt::format("bad rational '{}': zero denominator", text));
  return Rational{num, den};
}

std::string to_string(const Rational& r) { return fmt::format("{}/{}", r.num, r.den); }

std::int64_t exact_multiple(const Rational& r, std::int64_t count) {
  std::int64_t scaled = r.num * count;
  if (scaled % r.den != 0) {
    throw ValidationError(
        fmt::format("{} of {} channels is not a whole number", to_string(r), count));
  }
  return scaled / r.den;
}

bool divides_evenly(const Rational& r, std::int64_t count) {
  return (r.num * count) % r.den == 0;
}

}  // namespace vidperf
