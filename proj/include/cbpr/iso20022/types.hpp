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

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cbpr/bic.hpp"
#include "cbpr/decimal.hpp"
#include "cbpr/money.hpp"
#include "cbpr/sim_time.hpp"

namespace cbpr::iso20022 {

inline constexpr std::string_view kPacs008Namespace = "urn:iso:std:iso:20022:tech:xsd:pacs.008.001.08";
inline constexpr std::string_view kPacs002Namespace = "urn:iso:std:iso:20022:tech:xsd:pacs.002.001.10";
inline constexpr std::string_view kPacs004Namespace = "urn:iso:std:iso:20022:tech:xsd:pacs.004.001.09";

inline constexpr std::size_t kMaxIdLength = 35;

/// Elements outside the supported subset, kept as canonical XML fragments
/// and keyed by the relative path of the element that contained them
/// ("" for the block itself, "PmtId", "Dbtr", ...). They are re-emitted
/// after the known children of that element.
using OpaqueElements = std::map<std::string, std::vector<std::string>>;

struct GroupHeader {
  std::string msg_id;
  SimTime creation_time{};
  int nb_of_txs = 0;
  Decimal ctrl_sum;
  BicCode instructing_agent;
  BicCode instructed_agent;
  OpaqueElements extras;

  friend bool operator==(const GroupHeader&, const GroupHeader&) = default;
};

struct CreditTransferTxInfo {
  std::string end_to_end_id;
  MoneyAmount settlement_amount;
  std::string debtor_name;
  std::string debtor_account;
  BicCode debtor_agent;
  std::string creditor_name;
  std::string creditor_account;
  BicCode creditor_agent;
  std::vector<BicCode> intermediary_agents;
  OpaqueElements extras;

  /// Debtor agent, intermediaries in order, creditor agent.
  std::vector<BicCode> agent_chain() const {
    std::vector<BicCode> chain{debtor_agent};
    chain.insert(chain.end(), intermediary_agents.begin(), intermediary_agents.end());
    chain.push_back(creditor_agent);
    return chain;
  }

  friend bool operator==(const CreditTransferTxInfo&, const CreditTransferTxInfo&) = default;
};

struct Pacs008Message {
  std::string xml_namespace{kPacs008Namespace};
  GroupHeader group_header;
  std::vector<CreditTransferTxInfo> transactions;
  OpaqueElements extras;

  friend bool operator==(const Pacs008Message&, const Pacs008Message&) = default;
};

enum class PaymentStatus { ACSC, RJCT };

constexpr std::string_view to_string(PaymentStatus s) noexcept { return s == PaymentStatus::ACSC ? "ACSC" : "RJCT"; }

struct Pacs002Report {
  std::string original_msg_id;
  std::string original_end_to_end_id;
  PaymentStatus status_code = PaymentStatus::ACSC;
  std::optional<std::string> reason;

  friend bool operator==(const Pacs002Report&, const Pacs002Report&) = default;
};

struct Pacs004Return {
  std::string original_msg_id;
  std::string original_end_to_end_id;
  MoneyAmount returned_amount;
  std::string return_reason;
  BicCode returning_agent;
  BicCode next_agent;

  friend bool operator==(const Pacs004Return&, const Pacs004Return&) = default;
};

/// Header values minted by whoever issues a new message.
struct MessageStamp {
  std::string msg_id;
  SimTime creation_time{};
};

}  // namespace cbpr::iso20022

namespace cbpr {

/// Contract-facing transfer instruction: settlement amount, debtor agent,
/// debtor account, the ISO message it was extracted from (verbatim), and
/// the agent the funds move to next.
struct DebtorInstruction {
  Amount settlement_amount;
  AgentId debtor_agent;
  std::string debtor_account;
  std::string iso_message;
  AgentId next_agent;

  friend bool operator==(const DebtorInstruction&, const DebtorInstruction&) = default;
};

}  // namespace cbpr
