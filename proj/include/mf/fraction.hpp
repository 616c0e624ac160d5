#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace mf {

// Non-negative rational stored as an integer count pair. Supports and
// confidences are compared as rationals, never as floats. Equality and
// ordering are by value: 1/2 == 2/4.
class Fraction {
 public:
  constexpr Fraction() = default;
  // Throws InvalidArgument when `denominator` is zero.
  Fraction(std::uint64_t numerator, std::uint64_t denominator);

  std::uint64_t numerator() const { return numerator_; }
  std::uint64_t denominator() const { return denominator_; }
  double value() const {
    return static_cast<double>(numerator_) / static_cast<double>(denominator_);
  }

  Fraction reduced() const;
  // Reduced "n/d", or "n" when d == 1.
  std::string to_string() const;

  // Accepts "3/5", "0.6", "1", ".25". Throws InvalidArgument otherwise.
  static Fraction parse(std::string_view text);

  friend bool operator==(const Fraction& a, const Fraction& b) {
    return static_cast<unsigned __int128>(a.numerator_) * b.denominator_ ==
           static_cast<unsigned __int128>(b.numerator_) * a.denominator_;
  }
  friend std::strong_ordering operator<=>(const Fraction& a, const Fraction& b) {
    return static_cast<unsigned __int128>(a.numerator_) * b.denominator_ <=>
           static_cast<unsigned __int128>(b.numerator_) * a.denominator_;
  }

 private:
  std::uint64_t numerator_ = 0;
  std::uint64_t denominator_ = 1;
};

}  // namespace mf
