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

#include <algorithm>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cbpr/error.hpp"
#include "cbpr/iso20022/pacs008.hpp"
#include "cbpr/iso20022/reports.hpp"
#include "cbpr/ledger/ledger.hpp"

namespace cbpr::relay {

using ledger::AgentLedger;
using ledger::EventKind;
using ledger::EventRecord;
using ledger::Principal;

struct AgentEntry {
  std::shared_ptr<AgentLedger> ledger;
  Principal principal;                                          // identity the relay signs with on this ledger
  std::map<AgentId, std::string> nostros;                       // counterparty -> local nostro account
  std::map<std::pair<std::string, std::string>, Decimal> fx;  // (from, to) -> units of `to` per unit of `from`
};

/// Maps each BIC to its ledger, the principal the relay acts as, the
/// nostro relationships and an optional FX table. Read-only while
/// transactions run.
class AgentDirectory {
 public:
  /// Registers a ledger; nostro relationships are taken from its Nostro
  /// accounts.
  void add(std::shared_ptr<AgentLedger> ledger, Principal principal) {
    AgentEntry entry{ledger, std::move(principal), {}, {}};
    for (const auto& [number, account] : ledger->accounts())
      if (account.kind == ledger::AccountKind::Nostro && account.counterparty) entry.nostros.emplace(*account.counterparty, number);
    const auto bic = ledger->agent();
    entries_.insert_or_assign(bic, std::move(entry));
  }

  void set_rate(const AgentId& agent, const std::string& from, const std::string& to, const Decimal& rate) {
    if (rate.signum() <= 0) throw Error(Errc::InvalidAmount, "FX rate must be positive");
    at_mut(agent).fx[{from, to}] = rate;
  }

  bool contains(const AgentId& agent) const { return entries_.contains(agent); }

  const AgentEntry& at(const AgentId& agent) const {
    auto it = entries_.find(agent);
    if (it == entries_.end()) throw Error(Errc::UnknownAgent, agent.str() + " is not in the directory");
    return it->second;
  }

  const std::map<AgentId, AgentEntry>& entries() const noexcept { return entries_; }

  std::optional<std::string> nostro(const AgentId& holder, const AgentId& counterparty) const {
    const auto& nostros = at(holder).nostros;
    auto it = nostros.find(counterparty);
    return it == nostros.end() ? std::nullopt : std::optional{it->second};
  }

  /// Both sides must hold a nostro for each other.
  void require_relationship(const AgentId& a, const AgentId& b) const {
    if (!nostro(a, b) || !nostro(b, a)) throw Error(Errc::MissingNostroRelationship, "no nostro relationship between " + a.str() + " and " + b.str());
  }

  /// Rate for the boundary into `receiver`: the receiver's table first,
  /// then the sender's.
  Decimal rate(const AgentId& receiver, const AgentId& sender, const std::string& from, const std::string& to) const {
    for (const auto* agent : {&receiver, &sender}) {
      const auto& fx = at(*agent).fx;
      if (auto it = fx.find({from, to}); it != fx.end()) return it->second;
    }
    throw Error(Errc::MissingRate, "no " + from + "->" + to + " rate at " + receiver.str() + " or " + sender.str());
  }

  /// Every recorded relationship must reference an existing Nostro account.
  void validate() const {
    for (const auto& [bic, entry] : entries_) {
      for (const auto& [counterparty, number] : entry.nostros) {
        auto it = entry.ledger->accounts().find(number);
        if (it == entry.ledger->accounts().end() || it->second.kind != ledger::AccountKind::Nostro || it->second.counterparty != counterparty)
          throw Error(Errc::MissingNostroRelationship, bic.str() + " relationship to " + counterparty.str() + " references " + number);
      }
    }
  }

 private:
  AgentEntry& at_mut(const AgentId& agent) {
    auto it = entries_.find(agent);
    if (it == entries_.end()) throw Error(Errc::UnknownAgent, agent.str() + " is not in the directory");
    return it->second;
  }

  std::map<AgentId, AgentEntry> entries_;
};

/// amount * rate, rounded half-even to the target currency's minor units.
inline Amount convert_at_boundary(const Amount& amount, const Decimal& rate, const std::string& target_currency) {
  if (rate.signum() <= 0) throw Error(Errc::InvalidAmount, "FX rate must be positive");
  require_currency(target_currency);
  return Amount{target_currency, (amount.value * rate).round_half_even(minor_units(target_currency))};
}

inline Amount convert_at_boundary(const Amount& amount, const std::string& target_currency, const AgentDirectory& directory,
                                  const AgentId& receiver, const AgentId& sender) {
  if (amount.currency == target_currency) return amount;
  return convert_at_boundary(amount, directory.rate(receiver, sender, amount.currency, target_currency), target_currency);
}

struct Conversion {
  AgentId sender;
  AgentId receiver;
  Amount from;
  Amount to;
  Decimal rate;

  friend bool operator==(const Conversion&, const Conversion&) = default;
};

struct MakeTransferAction {
  AgentId target;
  DebtorInstruction instruction;
  AgentId sender;
  bool final_hop = false;
  std::optional<std::string> creditor_account;
  std::optional<Conversion> conversion;
};

struct StatusAction {
  AgentId deliver_to;  // the debtor agent
  iso20022::Pacs002Report report;
};

struct ReturnAction {
  AgentId target;
  iso20022::Pacs004Return ret;
};

/// The reverse chain reached the debtor agent.
struct ReturnComplete {
  AgentId debtor_agent;
};

using Action = std::variant<MakeTransferAction, StatusAction, ReturnAction, ReturnComplete>;

namespace detail {

inline std::size_t position(const std::vector<AgentId>& chain, const AgentId& agent) {
  auto it = std::find(chain.begin(), chain.end(), agent);
  if (it == chain.end()) throw Error(Errc::PathMismatch, agent.str() + " is not on the payment chain");
  return static_cast<std::size_t>(it - chain.begin());
}

/// The forward event this agent's ledger emitted for `end_to_end_id`.
inline const EventRecord& forward_event(const AgentDirectory& directory, const AgentId& agent, const std::string& end_to_end_id) {
  for (const auto& e : directory.at(agent).ledger->events())
    if (e.end_to_end_id == end_to_end_id && e.is_forward()) return e;
  throw Error(Errc::UnknownTransaction, end_to_end_id + " has no forward leg on " + agent.str());
}

/// Builds the make_transfer call for the agent a forwarded message is
/// addressed to, converting currency at the boundary when needed.
inline MakeTransferAction deliver_forward(const EventRecord& event, const AgentDirectory& directory) {
  auto msg = iso20022::parse_pacs008(event.iso_message);
  const auto receiver = msg.group_header.instructed_agent;
  const auto& sender = event.agent;
  if (!directory.contains(receiver)) throw Error(Errc::UnknownAgent, receiver.str() + " is not in the directory");
  directory.require_relationship(sender, receiver);

  auto& tx = msg.transactions.front();
  const auto chain = tx.agent_chain();
  const auto pos = position(chain, receiver);
  const bool final_hop = pos + 1 == chain.size();
  const auto next = final_hop ? receiver : chain[pos + 1];

  std::optional<Conversion> conversion;
  std::string bytes = event.iso_message;
  const auto& inbound = directory.at(receiver).ledger->accounts().at(*directory.nostro(receiver, sender));
  if (inbound.currency != tx.settlement_amount.currency) {
    const auto rate = directory.rate(receiver, sender, tx.settlement_amount.currency, inbound.currency);
    const auto converted = convert_at_boundary(tx.settlement_amount, rate, inbound.currency);
    conversion = Conversion{sender, receiver, tx.settlement_amount, converted, rate};
    tx.settlement_amount = converted;
    iso20022::refresh_group_totals(msg);
    bytes = iso20022::serialize_pacs008(msg);
  }

  auto instruction = iso20022::extract_debtor_instruction(bytes);
  instruction.next_agent = next;
  return MakeTransferAction{
      .target = receiver,
      .instruction = std::move(instruction),
      .sender = sender,
      .final_hop = final_hop,
      .creditor_account = final_hop ? std::optional{tx.creditor_account} : std::nullopt,
      .conversion = std::move(conversion),
  };
}

}  // namespace detail

/// Event handler of the web client: decides the next contract call.
///
///   MakeTransfer / PassISOMessageAlong -> make_transfer on the addressee
///   CreditConfirmed                    -> pacs.002 ACSC for the debtor agent
///   TransferReturned                   -> next return leg, or completion
inline Action handle_event(const EventRecord& event, const AgentDirectory& directory) {
  switch (event.kind) {
    case EventKind::MakeTransfer:
    case EventKind::PassISOMessageAlong:
      return detail::deliver_forward(event, directory);
    case EventKind::CreditConfirmed: {
      const auto msg = iso20022::parse_pacs008(event.iso_message);
      return StatusAction{msg.transactions.front().debtor_agent, iso20022::build_pacs002(msg, iso20022::PaymentStatus::ACSC, std::nullopt)};
    }
    case EventKind::TransferReturned: {
      const auto ret = iso20022::parse_pacs004(event.iso_message);
      const auto& own = detail::forward_event(directory, event.agent, event.end_to_end_id);
      const auto chain = iso20022::parse_pacs008(own.iso_message).transactions.front().agent_chain();
      const auto pos = detail::position(chain, event.agent);
      if (pos == 0) return ReturnComplete{event.agent};
      const auto& prev = chain[pos - 1];
      const auto& prev_forward = detail::forward_event(directory, prev, event.end_to_end_id);
      return ReturnAction{prev, iso20022::build_pacs004(iso20022::parse_pacs008(prev_forward.iso_message), ret.return_reason, event.agent, prev)};
    }
  }
  throw Error(Errc::InvariantViolation, "unhandled event kind");
}

enum class OutcomeStatus { Settled, Returned, Rejected };

constexpr std::string_view to_string(OutcomeStatus s) noexcept {
  switch (s) {
    case OutcomeStatus::Settled: return "Settled";
    case OutcomeStatus::Returned: return "Returned";
    case OutcomeStatus::Rejected: return "Rejected";
  }
  return "Unknown";
}

struct Failure {
  Errc code;
  std::string message;
  std::size_t hop = 0;  // index into the path of the agent that failed
};

struct TransactionOutcome {
  std::string end_to_end_id;
  OutcomeStatus status = OutcomeStatus::Rejected;
  std::size_t hops_executed = 0;
  iso20022::Pacs002Report final_report;
  std::vector<std::pair<AgentId, EventRecord>> events;
  std::optional<Failure> failure;
  std::vector<Conversion> conversions;
  std::vector<std::pair<AgentId, std::string>> delivered_pacs008;  // message each ledger executed, in hop order
  std::vector<iso20022::Pacs004Return> returns;
};

/// FIFO event queue. The hop loop only talks to the scheduler through
/// push/pop/empty, so an asynchronous or reordering scheduler can be
/// dropped in for experiments.
class FifoScheduler {
 public:
  void push(EventRecord e) { queue_.push_back(std::move(e)); }
  EventRecord pop() {
    auto e = std::move(queue_.front());
    queue_.pop_front();
    return e;
  }
  bool empty() const noexcept { return queue_.empty(); }

 private:
  std::deque<EventRecord> queue_;
};

namespace detail {

inline iso20022::Pacs002Report rejection_report(const DebtorInstruction& initial, const std::string& reason) {
  try {
    return iso20022::build_pacs002(iso20022::parse_pacs008(initial.iso_message, iso20022::ParseMode::Lenient), iso20022::PaymentStatus::RJCT,
                                   reason);
  } catch (const Error&) {
    return iso20022::Pacs002Report{{}, {}, iso20022::PaymentStatus::RJCT, reason};
  }
}

inline void validate_path(const DebtorInstruction& initial, const std::vector<AgentId>& path, const AgentDirectory& directory) {
  if (path.size() < 2) throw Error(Errc::PathMismatch, "path needs at least a debtor and a creditor agent");
  if (path.front() != initial.debtor_agent) throw Error(Errc::PathMismatch, "path must start at the debtor agent " + initial.debtor_agent.str());
  if (std::set<AgentId>(path.begin(), path.end()).size() != path.size()) throw Error(Errc::PathMismatch, "path visits an agent twice");
  const auto msg = iso20022::parse_pacs008(initial.iso_message, iso20022::ParseMode::Lenient);
  if (msg.transactions.size() != 1) throw Error(Errc::MultiTransactionUnsupported, "initial message must carry one transaction");
  if (msg.transactions.front().agent_chain() != path) throw Error(Errc::PathMismatch, "path differs from the message's agent chain");
  for (const auto& agent : path)
    if (!directory.contains(agent)) throw Error(Errc::UnknownAgent, agent.str() + " is not in the directory");
  for (std::size_t i = 0; i + 1 < path.size(); ++i) directory.require_relationship(path[i], path[i + 1]);
}

}  // namespace detail

/// Drives one payment along `path`: initiate on the debtor agent, then
/// relay events hop by hop. A failure after hop 0 unwinds every settled
/// leg with pacs.004 returns in reverse order.
template <typename Scheduler = FifoScheduler>
TransactionOutcome run_transaction(const DebtorInstruction& initial, const std::vector<AgentId>& path, const AgentDirectory& directory) {
  TransactionOutcome out;
  Scheduler scheduler;

  try {
    detail::validate_path(initial, path, directory);
    const auto& debtor = directory.at(path.front());
    out.end_to_end_id = iso20022::parse_pacs008(initial.iso_message, iso20022::ParseMode::Lenient).transactions.front().end_to_end_id;
    auto event = debtor.ledger->initiate_transfer(debtor.principal, initial);
    out.delivered_pacs008.emplace_back(path.front(), initial.iso_message);
    out.events.emplace_back(path.front(), event);
    out.hops_executed = 1;
    scheduler.push(std::move(event));
  } catch (const Error& e) {
    out.status = OutcomeStatus::Rejected;
    out.failure = Failure{e.code(), e.what(), 0};
    out.final_report = detail::rejection_report(initial, e.what());
    if (out.end_to_end_id.empty()) out.end_to_end_id = out.final_report.original_end_to_end_id;
    return out;
  }

  auto start_return = [&](const EventRecord& last_forward, std::size_t failed_hop, const Error& e) {
    out.failure = Failure{e.code(), e.what(), failed_hop};
    const auto& holder = path[failed_hop - 1];
    auto ret = iso20022::build_pacs004(iso20022::parse_pacs008(last_forward.iso_message), e.what(), path[failed_hop], holder);
    return ReturnAction{holder, std::move(ret)};
  };

  std::optional<ReturnAction> pending_return;
  while (!scheduler.empty() || pending_return) {
    Action action;
    if (pending_return) {
      action = std::move(*pending_return);
      pending_return.reset();
    } else {
      const auto event = scheduler.pop();
      try {
        action = handle_event(event, directory);
      } catch (const Error& e) {
        if (!event.is_forward()) throw;
        // The addressee could not even be reached: fail at its hop.
        const auto failed_hop = std::min(detail::position(path, event.agent) + 1, path.size() - 1);
        pending_return = start_return(event, failed_hop, e);
        continue;
      }
    }

    if (auto* transfer = std::get_if<MakeTransferAction>(&action)) {
      const auto hop = detail::position(path, transfer->target);
      const auto& entry = directory.at(transfer->target);
      try {
        auto event = entry.ledger->make_transfer(entry.principal, transfer->instruction, transfer->sender, transfer->final_hop,
                                                 transfer->creditor_account);
        if (transfer->conversion) out.conversions.push_back(*transfer->conversion);
        out.delivered_pacs008.emplace_back(transfer->target, transfer->instruction.iso_message);
        out.events.emplace_back(transfer->target, event);
        ++out.hops_executed;
        scheduler.push(std::move(event));
      } catch (const Error& e) {
        const auto& previous = detail::forward_event(directory, path[hop - 1], out.end_to_end_id);
        pending_return = start_return(previous, hop, e);
      }
    } else if (auto* status = std::get_if<StatusAction>(&action)) {
      out.status = OutcomeStatus::Settled;
      out.final_report = status->report;
    } else if (auto* ret = std::get_if<ReturnAction>(&action)) {
      const auto& entry = directory.at(ret->target);
      auto event = entry.ledger->return_transfer(entry.principal, ret->ret);
      out.returns.push_back(ret->ret);
      out.events.emplace_back(ret->target, event);
      scheduler.push(std::move(event));
    } else if (std::get_if<ReturnComplete>(&action)) {
      out.status = OutcomeStatus::Returned;
      const auto& first = detail::forward_event(directory, path.front(), out.end_to_end_id);
      out.final_report = iso20022::build_pacs002(iso20022::parse_pacs008(first.iso_message), iso20022::PaymentStatus::RJCT,
                                                 out.failure ? out.failure->message : std::string("returned"));
    }
  }
  return out;
}

}  // namespace cbpr::relay
