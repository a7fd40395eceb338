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

#include <chrono>
#include <cstdio>
#include <string>
#include <string_view>

#include "cbpr/error.hpp"

namespace cbpr {

using SimTime = std::chrono::sys_seconds;

/// Fixed epoch for every logical clock; wall-clock time never reaches outputs.
inline constexpr SimTime kSimEpoch = std::chrono::sys_days{std::chrono::year{2024} / 1 / 1};

/// "YYYY-MM-DDTHH:MM:SSZ"
inline std::string format_utc(SimTime t) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02u:%02u:%02uZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<unsigned>(hms.hours().count()), static_cast<unsigned>(hms.minutes().count()),
                static_cast<unsigned>(hms.seconds().count()));
  return buf;
}

inline SimTime parse_utc(std::string_view text) {
  using namespace std::chrono;
  int y = 0;
  unsigned mo = 0, d = 0, h = 0, mi = 0, s = 0;
  char z = 0;
  const std::string str(text);
  if (str.size() != 20 ||
      std::sscanf(str.c_str(), "%4d-%2u-%2uT%2u:%2u:%2u%c", &y, &mo, &d, &h, &mi, &s, &z) != 7 || z != 'Z')
    throw Error(Errc::SchemaViolation, "bad UTC timestamp '" + str + "'");
  const year_month_day ymd{year{y}, month{mo}, day{d}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) throw Error(Errc::SchemaViolation, "bad UTC timestamp '" + str + "'");
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

/// Logical clock: one tick (second) per successful mutating operation.
class LogicalClock {
 public:
  SimTime now() const noexcept { return kSimEpoch + std::chrono::seconds{ticks_}; }
  SimTime tick() noexcept {
    ++ticks_;
    return now();
  }
  long long ticks() const noexcept { return ticks_; }

  friend bool operator==(const LogicalClock&, const LogicalClock&) = default;

 private:
  long long ticks_ = 0;
};

}  // namespace cbpr
