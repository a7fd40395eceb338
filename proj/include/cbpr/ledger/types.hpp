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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cbpr/bic.hpp"
#include "cbpr/decimal.hpp"
#include "cbpr/error.hpp"
#include "cbpr/iso20022/types.hpp"
#include "cbpr/sim_time.hpp"

namespace cbpr::ledger {

/// Stand-in for a signing address.
struct Principal {
  std::string id;

  friend auto operator<=>(const Principal&, const Principal&) = default;
  friend bool operator==(const Principal&, const Principal&) = default;
};

enum class Role { Admin, Operator };

constexpr std::string_view to_string(Role r) noexcept { return r == Role::Admin ? "Admin" : "Operator"; }

enum class AccountKind { General, Nostro };

constexpr std::string_view to_string(AccountKind k) noexcept { return k == AccountKind::General ? "General" : "Nostro"; }

inline AccountKind parse_account_kind(std::string_view text) {
  if (text == "General") return AccountKind::General;
  if (text == "Nostro") return AccountKind::Nostro;
  throw Error(Errc::ValidationError, "unknown account kind '" + std::string(text) + "'");
}

struct Account {
  std::string number;
  AccountKind kind = AccountKind::General;
  std::string currency;
  Decimal balance;
  std::string owner;
  std::optional<AgentId> counterparty;  // Nostro only: whose funds this mirrors

  Amount balance_amount() const { return Amount{currency, balance.rescaled(minor_units(currency))}; }

  friend bool operator==(const Account&, const Account&) = default;
};

/// Group-header mirror carried alongside instructions.
struct MsgInfo {
  std::string msg_id;
  std::string end_to_end_id;
  SimTime creation_time{};
  int nb_of_txs = 0;
  Decimal ctrl_sum;

  static MsgInfo of(const iso20022::Pacs008Message& msg) {
    return MsgInfo{msg.group_header.msg_id, msg.transactions.empty() ? std::string{} : msg.transactions.front().end_to_end_id,
                   msg.group_header.creation_time, msg.group_header.nb_of_txs, msg.group_header.ctrl_sum};
  }

  friend bool operator==(const MsgInfo&, const MsgInfo&) = default;
};

enum class EventKind { MakeTransfer, PassISOMessageAlong, CreditConfirmed, TransferReturned };

constexpr std::string_view to_string(EventKind k) noexcept {
  switch (k) {
    case EventKind::MakeTransfer: return "MakeTransfer";
    case EventKind::PassISOMessageAlong: return "PassISOMessageAlong";
    case EventKind::CreditConfirmed: return "CreditConfirmed";
    case EventKind::TransferReturned: return "TransferReturned";
  }
  return "Unknown";
}

inline EventKind parse_event_kind(std::string_view text) {
  for (auto k : {EventKind::MakeTransfer, EventKind::PassISOMessageAlong, EventKind::CreditConfirmed, EventKind::TransferReturned})
    if (to_string(k) == text) return k;
  throw Error(Errc::ParseError, "unknown event kind '" + std::string(text) + "'");
}

/// Signed balance movement on one account of the emitting ledger.
struct Posting {
  std::string account;
  Decimal delta;

  friend bool operator==(const Posting&, const Posting&) = default;
};

struct EventRecord {
  EventKind kind = EventKind::MakeTransfer;
  AgentId agent;
  std::uint64_t sequence = 0;
  std::string iso_message;
  std::string end_to_end_id;
  SimTime timestamp{};
  AgentId next_agent;  // set for MakeTransfer and PassISOMessageAlong
  std::vector<Posting> postings;

  bool is_forward() const noexcept { return kind != EventKind::TransferReturned; }

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

}  // namespace cbpr::ledger
