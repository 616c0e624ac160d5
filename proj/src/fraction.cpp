#include "mf/fraction.hpp"

#include <charconv>
#include <numeric>

#include "mf/error.hpp"

namespace mf {

Fraction::Fraction(std::uint64_t numerator, std::uint64_t denominator)
    : numerator_(numerator), denominator_(denominator) {
  if (denominator == 0) throw InvalidArgument("fraction with zero denominator");
}

Fraction Fraction::reduced() const {
  const std::uint64_t g = std::gcd(numerator_, denominator_);
  if (g <= 1) return *this;
  return {numerator_ / g, denominator_ / g};
}

std::string Fraction::to_string() const {
  const Fraction r = reduced();
  if (r.denominator_ == 1) return std::to_string(r.numerator_);
  return std::to_string(r.numerator_) + "/" + std::to_string(r.denominator_);
}

namespace {

std::uint64_t parse_digits(std::string_view digits, std::string_view whole) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || ptr != digits.data() + digits.size())
    throw InvalidArgument("not a number: '" + std::string(whole) + "'");
  return value;
}

}  // namespace

Fraction Fraction::parse(std::string_view text) {
  if (text.empty()) throw InvalidArgument("empty number");
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    const auto num = parse_digits(text.substr(0, slash), text);
    const auto den = parse_digits(text.substr(slash + 1), text);
    if (den == 0) throw InvalidArgument("zero denominator in '" + std::string(text) + "'");
    return Fraction(num, den).reduced();
  }
  auto dot = text.find('.');
  if (dot == std::string_view::npos) return {parse_digits(text, text), 1};

  std::string_view whole = text.substr(0, dot);
  std::string_view frac = text.substr(dot + 1);
  if ((whole.empty() && frac.empty()) || frac.size() > 18)
    throw InvalidArgument("not a number: '" + std::string(text) + "'");
  std::uint64_t scale = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
  const std::uint64_t w = whole.empty() ? 0 : parse_digits(whole, text);
  const std::uint64_t f = frac.empty() ? 0 : parse_digits(frac, text);
  if (w > (UINT64_MAX - f) / scale)
    throw InvalidArgument("number out of range: '" + std::string(text) + "'");
  return Fraction(w * scale + f, scale).reduced();
}

}  // namespace mf
