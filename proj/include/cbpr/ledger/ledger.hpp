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

#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cbpr/error.hpp"
#include "cbpr/iso20022/pacs008.hpp"
#include "cbpr/iso20022/reports.hpp"
#include "cbpr/ledger/types.hpp"
#include "cbpr/metering/metering.hpp"

namespace cbpr::ledger {

struct AccountSpec {
  std::string number;
  AccountKind kind = AccountKind::General;
  std::string currency;
  std::string owner;
  std::optional<AgentId> counterparty;
};

/// Contract-equivalent state machine for one agent bank.
///
/// Every operation validates completely before touching state, so a call
/// that throws leaves accounts, roles, clock and event log exactly as they
/// were. Mutations must be serialized by the caller (single writer); const
/// members may run concurrently between mutations.
class AgentLedger {
 public:
  AgentLedger(AgentId agent, Principal deployer) : agent_(std::move(agent)), owner_(std::move(deployer)) {
    roles_[owner_].insert(Role::Admin);
  }

  const AgentId& agent() const noexcept { return agent_; }
  const Principal& owner() const noexcept { return owner_; }
  const std::map<Principal, std::set<Role>>& roles() const noexcept { return roles_; }
  const std::map<std::string, Account>& accounts() const noexcept { return accounts_; }
  const std::vector<EventRecord>& events() const noexcept { return events_; }
  const LogicalClock& clock() const noexcept { return clock_; }

  /// Successful metered calls are recorded here; detached by default.
  void attach_meter(std::shared_ptr<metering::MeterSink> sink) { meter_ = std::move(sink); }

  bool has_role(const Principal& p, Role r) const {
    auto it = roles_.find(p);
    return it != roles_.end() && it->second.contains(r);
  }

  void grant_role(const Principal& caller, const Principal& grantee, Role role) {
    if (!has_role(caller, Role::Admin)) throw Error(Errc::Unauthorized, caller.id + " lacks Admin on " + agent_.str());
    roles_[grantee].insert(role);
  }

  void create_account(const Principal& caller, const AccountSpec& spec) {
    require_operator(caller);
    if (spec.number.empty()) throw Error(Errc::ValidationError, "account number must not be empty");
    require_currency(spec.currency);
    if (accounts_.contains(spec.number)) throw Error(Errc::DuplicateAccount, spec.number + " already exists on " + agent_.str());
    if (spec.kind == AccountKind::Nostro && !spec.counterparty)
      throw Error(Errc::MissingCounterparty, "nostro account " + spec.number + " needs a counterparty");
    if (spec.kind == AccountKind::General && spec.counterparty)
      throw Error(Errc::ValidationError, "general account " + spec.number + " cannot carry a counterparty");
    accounts_.emplace(spec.number, Account{spec.number, spec.kind, spec.currency, Decimal(0, minor_units(spec.currency)), spec.owner,
                                           spec.counterparty});
    clock_.tick();
    meter("create_account", 0);
  }

  void deposit(const Principal& caller, const std::string& number, const Amount& amount) {
    require_operator(caller);
    const auto& account = require_account(number);
    require_positive(amount);
    require_same_currency(account, amount);
    accounts_.at(number).balance += amount.value;
    clock_.tick();
    meter("deposit", 0);
  }

  Amount get_balance(const std::string& number) const {
    auto balance = require_account(number).balance_amount();
    meter("get_balance", 0);
    return balance;
  }

  /// Nostro account number held here for `counterparty`, if any.
  std::optional<std::string> find_nostro(const AgentId& counterparty) const {
    for (const auto& [number, account] : accounts_)
      if (account.kind == AccountKind::Nostro && account.counterparty == counterparty) return number;
    return std::nullopt;
  }

  /// Debtor-agent leg: debit the debtor's account, credit the nostro held
  /// for the next agent, emit MakeTransfer.
  EventRecord initiate_transfer(const Principal& caller, const DebtorInstruction& instruction) {
    require_operator(caller);
    require_positive(instruction.settlement_amount);
    if (instruction.debtor_agent != agent_)
      throw Error(Errc::WrongAgent, "instruction for debtor agent " + instruction.debtor_agent.str() + " sent to " + agent_.str());
    const auto msg = checked_message(instruction);
    if (msg.group_header.instructed_agent != instruction.next_agent)
      throw Error(Errc::InstructionMessageMismatch, "next agent differs from GrpHdr/InstdAgt");

    const auto& debtor = require_account(instruction.debtor_account);
    require_same_currency(debtor, instruction.settlement_amount);
    if (debtor.balance < instruction.settlement_amount.value)
      throw Error(Errc::InsufficientFunds, instruction.debtor_account + " holds " + debtor.balance.to_string() + ", needs " +
                                              instruction.settlement_amount.value_text());
    const auto& nostro = require_nostro(instruction.next_agent);
    require_same_currency(nostro, instruction.settlement_amount);

    const auto& value = instruction.settlement_amount.value;
    return append_event(EventKind::MakeTransfer, instruction.iso_message, msg.transactions.front().end_to_end_id, instruction.next_agent,
                        {{debtor.number, -value}, {nostro.number, value}}, "initiate_transfer");
  }

  /// Intermediary or creditor leg: debit the nostro held for `sender`, then
  /// either credit the creditor (final hop, CreditConfirmed) or the nostro
  /// held for the next agent (PassISOMessageAlong with the re-addressed
  /// message).
  EventRecord make_transfer(const Principal& caller, const DebtorInstruction& instruction, const AgentId& sender, bool final_hop,
                            const std::optional<std::string>& creditor_account = std::nullopt) {
    require_operator(caller);
    require_positive(instruction.settlement_amount);
    const auto msg = checked_message(instruction);
    const auto& header = msg.group_header;
    const auto& tx = msg.transactions.front();
    if (header.instructed_agent != agent_)
      throw Error(Errc::WrongAgent, "message instructed to " + header.instructed_agent.str() + " executed on " + agent_.str());
    if (header.instructing_agent != sender)
      throw Error(Errc::WrongAgent, "message instructed by " + header.instructing_agent.str() + ", sender given as " + sender.str());

    const auto& from = require_nostro(sender);
    require_same_currency(from, instruction.settlement_amount);
    const auto& value = instruction.settlement_amount.value;
    if (from.balance < value)
      throw Error(Errc::InsufficientNostroFunds, from.number + " holds " + from.balance.to_string() + ", needs " +
                                                    instruction.settlement_amount.value_text());

    if (final_hop) {
      if (tx.creditor_agent != agent_) throw Error(Errc::WrongAgent, "final hop on " + agent_.str() + " but creditor agent is " + tx.creditor_agent.str());
      if (!creditor_account) throw Error(Errc::AccountNotFound, "final hop needs a creditor account");
      if (*creditor_account != tx.creditor_account)
        throw Error(Errc::InstructionMessageMismatch, "creditor account " + *creditor_account + " differs from CdtrAcct " + tx.creditor_account);
      const auto& creditor = require_account(*creditor_account);
      require_same_currency(creditor, instruction.settlement_amount);
      return append_event(EventKind::CreditConfirmed, instruction.iso_message, tx.end_to_end_id, AgentId{},
                          {{from.number, -value}, {creditor.number, value}}, "make_transfer");
    }

    if (instruction.next_agent == agent_ || instruction.next_agent == sender)
      throw Error(Errc::WrongAgent, "next agent " + instruction.next_agent.str() + " would loop back");
    const auto& to = require_nostro(instruction.next_agent);
    require_same_currency(to, instruction.settlement_amount);
    const auto stamp = next_stamp();
    const auto advanced = iso20022::serialize_pacs008(iso20022::advance_message(msg, agent_, instruction.next_agent, stamp));
    return append_event(EventKind::PassISOMessageAlong, advanced, tx.end_to_end_id, instruction.next_agent,
                        {{from.number, -value}, {to.number, value}}, "make_transfer", stamp.creation_time);
  }

  /// Exactly reverses this ledger's forward leg for the returned transaction.
  EventRecord return_transfer(const Principal& caller, const iso20022::Pacs004Return& ret) {
    require_operator(caller);
    const EventRecord* forward = nullptr;
    for (const auto& e : events_) {
      if (e.end_to_end_id != ret.original_end_to_end_id) continue;
      if (!e.is_forward()) throw Error(Errc::AlreadyReturned, ret.original_end_to_end_id + " already returned on " + agent_.str());
      forward = &e;
    }
    if (forward == nullptr) throw Error(Errc::UnknownTransaction, ret.original_end_to_end_id + " was not settled on " + agent_.str());

    std::vector<Posting> reversal;
    for (const auto& p : forward->postings) {
      const auto& account = accounts_.at(p.account);
      if (p.delta.signum() > 0) {
        const Amount forward_amount{account.currency, p.delta.rescaled(minor_units(account.currency))};
        if (!(forward_amount == ret.returned_amount))
          throw Error(Errc::ReturnAmountMismatch, "return of " + ret.returned_amount.to_string() + " against forward leg of " +
                                                      forward_amount.to_string());
        if (account.balance < p.delta)
          throw Error(Errc::InsufficientNostroFunds, "reversal would overdraw " + account.number + " on " + agent_.str());
      }
      reversal.push_back(Posting{p.account, -p.delta});
    }
    const auto stamp = next_stamp();
    const auto message = iso20022::serialize_pacs004(ret, stamp);
    return append_event(EventKind::TransferReturned, message, ret.original_end_to_end_id, ret.next_agent, std::move(reversal), {},
                        stamp.creation_time);
  }

  friend bool operator==(const AgentLedger& a, const AgentLedger& b) {
    return a.agent_ == b.agent_ && a.owner_ == b.owner_ && a.roles_ == b.roles_ && a.accounts_ == b.accounts_ && a.events_ == b.events_ &&
           a.clock_ == b.clock_;
  }

 private:
  void require_operator(const Principal& caller) const {
    if (!has_role(caller, Role::Admin) && !has_role(caller, Role::Operator))
      throw Error(Errc::Unauthorized, caller.id + " holds no role on " + agent_.str());
  }

  const Account& require_account(const std::string& number) const {
    auto it = accounts_.find(number);
    if (it == accounts_.end()) throw Error(Errc::AccountNotFound, number + " not found on " + agent_.str());
    return it->second;
  }

  const Account& require_nostro(const AgentId& counterparty) const {
    auto number = find_nostro(counterparty);
    if (!number) throw Error(Errc::MissingNostro, agent_.str() + " holds no nostro for " + counterparty.str());
    return accounts_.at(*number);
  }

  static void require_positive(const Amount& amount) {
    if (amount.value.signum() <= 0) throw Error(Errc::NonPositiveAmount, "amount must be positive, got " + amount.value.to_string());
  }

  static void require_same_currency(const Account& account, const Amount& amount) {
    if (account.currency != amount.currency)
      throw Error(Errc::CurrencyMismatch, account.number + " is " + account.currency + ", amount is " + amount.currency);
  }

  /// Parses the embedded message and checks it against the instruction's
  /// amount, debtor agent and debtor account.
  static iso20022::Pacs008Message checked_message(const DebtorInstruction& instruction) {
    iso20022::Pacs008Message msg;
    try {
      msg = iso20022::parse_pacs008(instruction.iso_message, iso20022::ParseMode::Lenient);
    } catch (const Error& e) {
      throw Error(Errc::InstructionMessageMismatch, "embedded message unusable: " + std::string(e.what()));
    }
    if (!iso20022::validate_control_sum(msg))
      throw Error(Errc::ControlSumMismatch, "embedded message fails control sum verification");
    if (msg.transactions.size() != 1) throw Error(Errc::InstructionMessageMismatch, "embedded message must carry exactly one transaction");
    const auto& tx = msg.transactions.front();
    if (!(tx.settlement_amount == instruction.settlement_amount))
      throw Error(Errc::InstructionMessageMismatch, "amount " + instruction.settlement_amount.to_string() + " differs from IntrBkSttlmAmt " +
                                                        tx.settlement_amount.to_string());
    if (tx.debtor_agent != instruction.debtor_agent) throw Error(Errc::InstructionMessageMismatch, "debtor agent differs from DbtrAgt");
    if (tx.debtor_account != instruction.debtor_account) throw Error(Errc::InstructionMessageMismatch, "debtor account differs from DbtrAcct");
    return msg;
  }

  /// MsgId minted by this agent for the next outgoing message.
  iso20022::MessageStamp next_stamp() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%06llu", static_cast<unsigned long long>(events_.size() + 1));
    return {agent_.str() + "-" + buf, kSimEpoch + std::chrono::seconds{clock_.ticks() + 1}};
  }

  EventRecord append_event(EventKind kind, std::string message, std::string end_to_end_id, AgentId next_agent, std::vector<Posting> postings,
                           std::string_view metered_op, std::optional<SimTime> at = std::nullopt) {
    for (const auto& p : postings) accounts_.at(p.account).balance += p.delta;
    const auto now = clock_.tick();
    if (at && *at != now) throw Error(Errc::InvariantViolation, "clock skew while appending event");
    const auto message_length = message.size();
    events_.push_back(EventRecord{kind, agent_, events_.size() + 1, std::move(message), std::move(end_to_end_id), now, std::move(next_agent),
                                  std::move(postings)});
    if (!metered_op.empty()) meter(metered_op, message_length);
    return events_.back();
  }

  void meter(std::string_view op, std::size_t message_length) const {
    if (meter_) meter_->add(op, message_length, clock_.now(), agent_);
  }

  AgentId agent_;
  Principal owner_;
  std::map<Principal, std::set<Role>> roles_;
  std::map<std::string, Account> accounts_;
  std::vector<EventRecord> events_;
  LogicalClock clock_;
  std::shared_ptr<metering::MeterSink> meter_;
};

/// Rebuilds balances by applying each event's postings in sequence order.
/// Throws InvariantViolation on sequence gaps, unknown accounts or a
/// negative balance.
inline std::map<std::string, Account> replay_events(std::map<std::string, Account> accounts, std::span<const EventRecord> events) {
  std::uint64_t expected = 1;
  for (const auto& e : events) {
    if (e.sequence != expected) throw Error(Errc::InvariantViolation, "event sequence gap at " + std::to_string(expected));
    ++expected;
    for (const auto& p : e.postings) {
      auto it = accounts.find(p.account);
      if (it == accounts.end()) throw Error(Errc::InvariantViolation, "event references unknown account " + p.account);
      it->second.balance += p.delta;
      if (it->second.balance.signum() < 0) throw Error(Errc::InvariantViolation, "replay drives " + p.account + " negative");
    }
  }
  return accounts;
}

}  // namespace cbpr::ledger
