// Copyright 2026 The cbpr-sim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "cbpr/error.hpp"

namespace cbpr {

/// Exact fixed-point decimal: value = mantissa * 10^-scale.
///
/// The mantissa is a signed 128-bit integer, which leaves room for
/// wei-denominated fee arithmetic (scale 18) without overflow in any
/// realistic scenario. All arithmetic is exact; overflow throws
/// InvalidAmount rather than wrapping. Equality and ordering are numeric,
/// so 1.5 == 1.50.
class Decimal {
 public:
  using Mantissa = __int128;
  static constexpr int kMaxScale = 30;

  constexpr Decimal() = default;
  constexpr Decimal(Mantissa mantissa, int scale) : mantissa_(mantissa), scale_(scale) {}

  static Decimal from_integer(std::int64_t v) { return Decimal(v, 0); }

  /// Accepts `[-]digits[.digits]`. No exponent, no leading '+', no spaces.
  static Decimal parse(std::string_view text) {
    if (text.empty()) throw Error(Errc::InvalidAmount, "empty decimal text");
    bool negative = false;
    std::size_t i = 0;
    if (text[0] == '-') {
      negative = true;
      i = 1;
    }
    Mantissa m = 0;
    int scale = 0;
    bool seen_point = false;
    std::size_t digits = 0;
    for (; i < text.size(); ++i) {
      const char c = text[i];
      if (c == '.') {
        if (seen_point) throw Error(Errc::InvalidAmount, "bad decimal '" + std::string(text) + "'");
        seen_point = true;
        continue;
      }
      if (c < '0' || c > '9') throw Error(Errc::InvalidAmount, "bad decimal '" + std::string(text) + "'");
      if (__builtin_mul_overflow(m, Mantissa{10}, &m) || __builtin_add_overflow(m, Mantissa{c - '0'}, &m))
        throw Error(Errc::InvalidAmount, "decimal out of range '" + std::string(text) + "'");
      ++digits;
      if (seen_point) ++scale;
    }
    if (digits == 0 || (seen_point && (text.back() == '.' || text[negative ? 1 : 0] == '.')))
      throw Error(Errc::InvalidAmount, "bad decimal '" + std::string(text) + "'");
    if (scale > kMaxScale) throw Error(Errc::InvalidAmount, "too many fractional digits");
    return Decimal(negative ? -m : m, scale);
  }

  Mantissa mantissa() const noexcept { return mantissa_; }
  int scale() const noexcept { return scale_; }
  int signum() const noexcept { return mantissa_ > 0 ? 1 : (mantissa_ < 0 ? -1 : 0); }
  bool is_zero() const noexcept { return mantissa_ == 0; }

  /// Smallest scale that represents the value exactly.
  int significant_scale() const noexcept {
    Mantissa m = mantissa_;
    int s = scale_;
    while (s > 0 && m % 10 == 0) {
      m /= 10;
      --s;
    }
    return s;
  }

  /// Exact rescale; throws if digits would be lost.
  Decimal rescaled(int new_scale) const {
    if (new_scale == scale_) return *this;
    if (new_scale > scale_) return Decimal(scale_up(mantissa_, new_scale - scale_), new_scale);
    const Mantissa div = pow10(scale_ - new_scale);
    if (mantissa_ % div != 0) throw Error(Errc::InvalidAmount, "rescale to " + std::to_string(new_scale) + " loses digits of " + to_string());
    return Decimal(mantissa_ / div, new_scale);
  }

  /// Rounds to `new_scale` fractional digits, ties to even.
  Decimal round_half_even(int new_scale) const {
    if (new_scale >= scale_) return rescaled(new_scale);
    const Mantissa div = pow10(scale_ - new_scale);
    Mantissa q = mantissa_ / div;
    Mantissa r = mantissa_ % div;
    if (r < 0) r = -r;
    const Mantissa twice = r * 2;
    if (twice > div || (twice == div && (q % 2 != 0))) q += (mantissa_ < 0 ? -1 : 1);
    return Decimal(q, new_scale);
  }

  Decimal operator-() const { return Decimal(-mantissa_, scale_); }

  friend Decimal operator+(const Decimal& a, const Decimal& b) {
    const int s = a.scale_ > b.scale_ ? a.scale_ : b.scale_;
    Mantissa out{};
    if (__builtin_add_overflow(scale_up(a.mantissa_, s - a.scale_), scale_up(b.mantissa_, s - b.scale_), &out))
      throw Error(Errc::InvalidAmount, "decimal addition overflow");
    return Decimal(out, s);
  }
  friend Decimal operator-(const Decimal& a, const Decimal& b) { return a + (-b); }
  friend Decimal operator*(const Decimal& a, const Decimal& b) {
    Mantissa out{};
    if (__builtin_mul_overflow(a.mantissa_, b.mantissa_, &out)) throw Error(Errc::InvalidAmount, "decimal multiplication overflow");
    if (a.scale_ + b.scale_ > kMaxScale) throw Error(Errc::InvalidAmount, "decimal scale overflow");
    return Decimal(out, a.scale_ + b.scale_);
  }
  Decimal& operator+=(const Decimal& o) { return *this = *this + o; }
  Decimal& operator-=(const Decimal& o) { return *this = *this - o; }

  /// Shifts the decimal point left: value * 10^-places.
  Decimal shifted_left(int places) const {
    if (scale_ + places > kMaxScale) throw Error(Errc::InvalidAmount, "decimal scale overflow");
    return Decimal(mantissa_, scale_ + places);
  }

  friend bool operator==(const Decimal& a, const Decimal& b) { return (a <=> b) == 0; }
  friend std::strong_ordering operator<=>(const Decimal& a, const Decimal& b) {
    const int s = a.scale_ > b.scale_ ? a.scale_ : b.scale_;
    const Mantissa x = scale_up(a.mantissa_, s - a.scale_);
    const Mantissa y = scale_up(b.mantissa_, s - b.scale_);
    return x < y ? std::strong_ordering::less : (x > y ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

  /// Renders at the stored scale, e.g. Decimal(3050, 2) -> "30.50".
  std::string to_string() const {
    Mantissa m = mantissa_;
    const bool negative = m < 0;
    std::string digits;
    // Negate digit by digit so the most negative mantissa never overflows.
    do {
      int d = static_cast<int>(m % 10);
      digits.push_back(static_cast<char>('0' + (d < 0 ? -d : d)));
      m /= 10;
    } while (m != 0);
    while (static_cast<int>(digits.size()) <= scale_) digits.push_back('0');
    std::string out;
    if (negative) out.push_back('-');
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
      if (static_cast<int>(digits.rend() - it) == scale_) out.push_back('.');
      out.push_back(*it);
    }
    return out;
  }

  std::string to_string(int scale) const { return rescaled(scale).to_string(); }

  static Mantissa pow10(int n) {
    Mantissa p = 1;
    for (int i = 0; i < n; ++i) p *= 10;
    return p;
  }

 private:
  static Mantissa scale_up(Mantissa m, int places) {
    Mantissa out = m;
    if (places > 0 && __builtin_mul_overflow(m, pow10(places), &out)) throw Error(Errc::InvalidAmount, "decimal rescale overflow");
    return out;
  }

  Mantissa mantissa_ = 0;
  int scale_ = 0;
};

}  // namespace cbpr
