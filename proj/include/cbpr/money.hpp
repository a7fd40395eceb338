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

#include <string>
#include <string_view>

#include "cbpr/decimal.hpp"
#include "cbpr/error.hpp"

namespace cbpr {

/// ISO 4217 minor units for the currencies we know about; anything else
/// defaults to two decimal places.
inline int minor_units(std::string_view currency) noexcept {
  constexpr std::string_view zero[] = {"JPY", "KRW", "VND", "CLP", "ISK", "UGX", "XAF", "XOF"};
  constexpr std::string_view three[] = {"BHD", "KWD", "OMR", "JOD", "TND", "IQD", "LYD"};
  for (auto c : zero)
    if (c == currency) return 0;
  for (auto c : three)
    if (c == currency) return 3;
  return 2;
}

inline bool is_currency_code(std::string_view code) noexcept {
  if (code.size() != 3) return false;
  for (char c : code)
    if (c < 'A' || c > 'Z') return false;
  return true;
}

inline void require_currency(std::string_view code) {
  if (!is_currency_code(code)) throw Error(Errc::InvalidCurrency, "invalid currency code '" + std::string(code) + "'");
}

/// A currency-tagged exact amount. Instructions use the same type; the
/// ledger and codec both require value >= 0 and scale <= minor units.
struct MoneyAmount {
  std::string currency;
  Decimal value;

  static MoneyAmount make(std::string currency, const Decimal& value) {
    require_currency(currency);
    if (value.signum() < 0) throw Error(Errc::InvalidAmount, "negative amount " + value.to_string());
    if (value.significant_scale() > minor_units(currency))
      throw Error(Errc::InvalidAmount, "amount " + value.to_string() + " exceeds minor units of " + currency);
    auto scaled = value.rescaled(minor_units(currency));
    return MoneyAmount{std::move(currency), scaled};
  }
  static MoneyAmount parse(std::string currency, std::string_view text) { return make(std::move(currency), Decimal::parse(text)); }

  /// Value text at the currency's minor units ("250.00").
  std::string value_text() const { return value.to_string(minor_units(currency)); }
  std::string to_string() const { return value_text() + " " + currency; }

  friend bool operator==(const MoneyAmount&, const MoneyAmount&) = default;
};

using Amount = MoneyAmount;

}  // namespace cbpr
