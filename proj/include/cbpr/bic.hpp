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
#include <functional>
#include <string>
#include <string_view>

#include "cbpr/error.hpp"

namespace cbpr {

/// BICFI agent identifier: 8 or 11 uppercase alphanumerics, the first six
/// letters (institution + country code).
class BicCode {
 public:
  BicCode() = default;
  explicit BicCode(std::string_view value) : value_(value) {
    if (!valid(value)) throw Error(Errc::InvalidBic, "invalid BIC '" + std::string(value) + "'");
  }

  static bool valid(std::string_view v) noexcept {
    if (v.size() != 8 && v.size() != 11) return false;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const char c = v[i];
      const bool upper = c >= 'A' && c <= 'Z';
      const bool digit = c >= '0' && c <= '9';
      if (i < 6 ? !upper : !(upper || digit)) return false;
    }
    return true;
  }

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  friend auto operator<=>(const BicCode&, const BicCode&) = default;
  friend bool operator==(const BicCode&, const BicCode&) = default;

 private:
  std::string value_;
};

/// Agents are identified by BIC on both the message and the ledger side.
using AgentId = BicCode;

}  // namespace cbpr

template <>
struct std::hash<cbpr::BicCode> {
  std::size_t operator()(const cbpr::BicCode& b) const noexcept { return std::hash<std::string>{}(b.str()); }
};
