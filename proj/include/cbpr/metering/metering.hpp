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

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cbpr/bic.hpp"
#include "cbpr/decimal.hpp"
#include "cbpr/error.hpp"
#include "cbpr/sim_time.hpp"

namespace cbpr::metering {

using GasUnits = std::uint64_t;

inline constexpr std::array<std::string_view, 5> kMeteredOperations = {
    "create_account", "deposit", "get_balance", "initiate_transfer", "make_transfer",
};

/// Operations whose cost grows with the embedded ISO message.
inline bool is_transfer_operation(std::string_view op) noexcept { return op == "initiate_transfer" || op == "make_transfer"; }

struct CostTable {
  std::map<std::string, GasUnits, std::less<>> base_cost;
  GasUnits per_byte_cost = 0;

  /// Base costs are the minimum column of the reference gas report; the
  /// per-byte cost of 4 lets ~2.5 KB messages reach its maximum column.
  static CostTable defaults() {
    return CostTable{
        .base_cost =
            {
                {"create_account", 26660},
                {"deposit", 30351},
                {"get_balance", 921},
                {"initiate_transfer", 121580},
                {"make_transfer", 135213},
            },
        .per_byte_cost = 4,
    };
  }

  /// Throws UnknownOperation if a metered operation has no cost.
  void require_complete() const {
    for (auto op : kMeteredOperations)
      if (!base_cost.contains(op)) throw Error(Errc::UnknownOperation, "cost table has no entry for '" + std::string(op) + "'");
  }

  friend bool operator==(const CostTable&, const CostTable&) = default;
};

struct CallRecord {
  std::string operation;
  GasUnits units = 0;
  SimTime timestamp{};
  AgentId ledger;

  friend bool operator==(const CallRecord&, const CallRecord&) = default;
};

inline CallRecord record(std::string_view op, std::size_t message_length, const CostTable& table, SimTime timestamp = kSimEpoch,
                         AgentId ledger = {}) {
  const auto it = table.base_cost.find(op);
  if (it == table.base_cost.end()) throw Error(Errc::UnknownOperation, "no cost for operation '" + std::string(op) + "'");
  const GasUnits bytes = is_transfer_operation(op) ? message_length : 0;
  return CallRecord{std::string(op), it->second + table.per_byte_cost * bytes, timestamp, std::move(ledger)};
}

struct GasReportRow {
  std::string operation;
  GasUnits min = 0;
  GasUnits avg = 0;
  GasUnits median = 0;
  GasUnits max = 0;
  std::size_t call_count = 0;

  friend bool operator==(const GasReportRow&, const GasReportRow&) = default;
};

/// One row per operation, sorted by name. avg is the floor of the mean;
/// median takes the lower middle element for even counts.
inline std::vector<GasReportRow> report(std::span<const CallRecord> records) {
  std::map<std::string, std::vector<GasUnits>> by_op;
  for (const auto& r : records) by_op[r.operation].push_back(r.units);
  std::vector<GasReportRow> rows;
  rows.reserve(by_op.size());
  for (auto& [op, units] : by_op) {
    std::sort(units.begin(), units.end());
    unsigned __int128 sum = 0;
    for (auto u : units) sum += u;
    rows.push_back(GasReportRow{
        .operation = op,
        .min = units.front(),
        .avg = static_cast<GasUnits>(sum / units.size()),
        .median = units[(units.size() - 1) / 2],
        .max = units.back(),
        .call_count = units.size(),
    });
  }
  return rows;
}

/// units * price(Gwei) * 1e-9, exact.
inline Decimal compute_fee(GasUnits units, const Decimal& price_gwei) {
  if (price_gwei.signum() < 0) throw Error(Errc::InvalidAmount, "gas price must be non-negative");
  return (Decimal(static_cast<Decimal::Mantissa>(units), 0) * price_gwei).shifted_left(9);
}

/// Plain-text table in the reference column layout.
inline std::string format_report(std::span<const GasReportRow> rows) {
  const std::array<std::string, 6> head = {"Function Name", "min", "avg", "median", "max", "# calls"};
  std::vector<std::array<std::string, 6>> cells;
  for (const auto& r : rows)
    cells.push_back({r.operation, std::to_string(r.min), std::to_string(r.avg), std::to_string(r.median), std::to_string(r.max),
                     std::to_string(r.call_count)});
  std::array<std::size_t, 6> width{};
  for (std::size_t c = 0; c < 6; ++c) {
    width[c] = head[c].size();
    for (const auto& row : cells) width[c] = std::max(width[c], row[c].size());
  }
  auto line = [&width](const std::array<std::string, 6>& row) {
    std::string out = "|";
    for (std::size_t c = 0; c < 6; ++c) out += " " + row[c] + std::string(width[c] - row[c].size(), ' ') + " |";
    return out + "\n";
  };
  std::string out = line(head);
  out += "|";
  for (auto w : width) out += std::string(w + 2, '-') + "|";
  out += "\n";
  for (const auto& row : cells) out += line(row);
  return out;
}

inline nlohmann::ordered_json to_json(const CallRecord& r) {
  return {{"operation", r.operation}, {"units", r.units}, {"timestamp", format_utc(r.timestamp)}, {"ledger", r.ledger.str()}};
}

inline CallRecord call_record_from_json(const nlohmann::json& j) {
  try {
    return CallRecord{j.at("operation").get<std::string>(), j.at("units").get<GasUnits>(), parse_utc(j.at("timestamp").get<std::string>()),
                      j.contains("ledger") && !j.at("ledger").get<std::string>().empty() ? BicCode(j.at("ledger").get<std::string>())
                                                                                          : BicCode{}};
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, std::string("bad call record: ") + e.what());
  }
}

inline nlohmann::ordered_json to_json(std::span<const GasReportRow> rows) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& r : rows)
    out.push_back({{"operation", r.operation}, {"min", r.min}, {"avg", r.avg}, {"median", r.median}, {"max", r.max}, {"calls", r.call_count}});
  return out;
}

/// Append-only, thread-safe record sink. One sink per ledger keeps
/// concurrent recorders independent; sinks are merged at report time.
class MeterSink {
 public:
  explicit MeterSink(CostTable table = CostTable::defaults()) : table_(std::move(table)) {}

  void add(std::string_view op, std::size_t message_length, SimTime timestamp, const AgentId& ledger) {
    auto rec = record(op, message_length, table_, timestamp, ledger);
    std::lock_guard lock(mutex_);
    records_.push_back(std::move(rec));
  }

  std::vector<CallRecord> records() const {
    std::lock_guard lock(mutex_);
    return records_;
  }

  const CostTable& table() const noexcept { return table_; }

 private:
  CostTable table_;
  mutable std::mutex mutex_;
  std::vector<CallRecord> records_;
};

}  // namespace cbpr::metering
