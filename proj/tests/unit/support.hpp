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

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdio>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "cbpr/cbpr.hpp"

namespace cbpr::testing {

/// Exact value of a decimal string, parsed without going through Decimal.
inline boost::multiprecision::cpp_rational rational_of(std::string text) {
  const bool negative = !text.empty() && text.front() == '-';
  if (negative) text.erase(0, 1);
  std::size_t scale = 0;
  if (const auto point = text.find('.'); point != std::string::npos) {
    scale = text.size() - point - 1;
    text.erase(point, 1);
  }
  // cpp_int treats a leading 0 as an octal prefix.
  text.erase(0, std::min(text.find_first_not_of('0'), text.size() - 1));
  boost::multiprecision::cpp_rational r{boost::multiprecision::cpp_int(text)};
  for (std::size_t i = 0; i < scale; ++i) r /= 10;
  return negative ? -r : r;
}

inline std::string fixture_path(const std::string& rel) { return std::string(CBPR_SOURCE_DIR) + "/" + rel; }

/// Deterministic BIC for agent `i`: AGTAAAUS, AGTAABUS, ...
inline AgentId bic(std::size_t i) {
  std::string s = "AGT";
  s += static_cast<char>('A' + (i / 676) % 26);
  s += static_cast<char>('A' + (i / 26) % 26);
  s += static_cast<char>('A' + i % 26);
  s += "US";
  return AgentId(s);
}

inline ledger::Principal admin(const AgentId& a) { return {"admin-" + a.str()}; }
inline ledger::Principal relay_principal(const AgentId& a) { return {"relay-" + a.str()}; }
inline std::string nostro_name(const AgentId& counterparty) { return "NOS-" + counterparty.str(); }

/// A linear correspondent chain agent[0] -> ... -> agent[n-1] with a
/// debtor account on the first agent and a creditor account on the last.
struct Chain {
  std::vector<AgentId> path;
  std::vector<std::shared_ptr<ledger::AgentLedger>> ledgers;
  relay::AgentDirectory directory;
  std::string currency;

  ledger::AgentLedger& at(std::size_t i) { return *ledgers.at(i); }

  ledger::Snapshot snapshot() const {
    std::vector<const ledger::AgentLedger*> raw;
    for (const auto& l : ledgers) raw.push_back(l.get());
    return ledger::Snapshot::of(raw);
  }

  void fund(std::size_t agent, const std::string& account, const std::string& value) {
    at(agent).deposit(admin(path[agent]), account, Amount::parse(currency, value));
  }
};

/// `funding[i]` is deposited on agent i's nostro for agent i-1 (the
/// account debited when agent i executes make_transfer).
inline Chain make_chain(std::size_t agents, const std::string& debtor_balance, const std::vector<std::string>& funding = {},
                        const std::string& currency = "USD") {
  Chain c;
  c.currency = currency;
  for (std::size_t i = 0; i < agents; ++i) c.path.push_back(bic(i));
  for (std::size_t i = 0; i < agents; ++i) {
    const auto& me = c.path[i];
    auto l = std::make_shared<ledger::AgentLedger>(me, admin(me));
    l->grant_role(admin(me), relay_principal(me), ledger::Role::Operator);
    if (i > 0) l->create_account(admin(me), {nostro_name(c.path[i - 1]), ledger::AccountKind::Nostro, currency, me.str(), c.path[i - 1]});
    if (i + 1 < agents) l->create_account(admin(me), {nostro_name(c.path[i + 1]), ledger::AccountKind::Nostro, currency, me.str(), c.path[i + 1]});
    if (i == 0) l->create_account(admin(me), {"ACC-DEBTOR", ledger::AccountKind::General, currency, "debtor", std::nullopt});
    if (i + 1 == agents) l->create_account(admin(me), {"ACC-CREDITOR", ledger::AccountKind::General, currency, "creditor", std::nullopt});
    c.ledgers.push_back(l);
  }
  if (Decimal::parse(debtor_balance).signum() > 0) c.fund(0, "ACC-DEBTOR", debtor_balance);
  for (std::size_t i = 1; i < agents; ++i) {
    const auto& v = i < funding.size() ? funding[i] : std::string("1000000.00");
    if (Decimal::parse(v).signum() > 0) c.fund(i, nostro_name(c.path[i - 1]), v);
  }
  for (std::size_t i = 0; i < agents; ++i) c.directory.add(c.ledgers[i], relay_principal(c.path[i]));
  return c;
}

/// The debtor agent's outgoing pacs.008 along `path`.
inline iso20022::Pacs008Message payment(const std::vector<AgentId>& path, const Amount& amount, const std::string& e2e = "E2E-TEST-1",
                                        const std::string& debtor_account = "ACC-DEBTOR", const std::string& creditor_account = "ACC-CREDITOR") {
  iso20022::Pacs008Message msg;
  msg.group_header.msg_id = "MSG-" + e2e;
  msg.group_header.creation_time = kSimEpoch;
  msg.group_header.instructing_agent = path.front();
  msg.group_header.instructed_agent = path.at(1);
  iso20022::CreditTransferTxInfo tx;
  tx.end_to_end_id = e2e;
  tx.settlement_amount = amount;
  tx.debtor_name = "Debtor Name";
  tx.debtor_account = debtor_account;
  tx.debtor_agent = path.front();
  tx.creditor_name = "Creditor Name";
  tx.creditor_account = creditor_account;
  tx.creditor_agent = path.back();
  tx.intermediary_agents.assign(path.begin() + 1, path.end() - 1);
  msg.transactions.push_back(tx);
  iso20022::refresh_group_totals(msg);
  return msg;
}

inline DebtorInstruction instruction_for(const iso20022::Pacs008Message& msg) {
  return iso20022::extract_debtor_instruction(iso20022::serialize_pacs008(msg));
}

inline std::string random_alnum(std::mt19937_64& rng, std::size_t min_len, std::size_t max_len) {
  static constexpr char kChars[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-";
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, sizeof kChars - 2);
  std::string s(len(rng), 'x');
  for (auto& ch : s) ch = kChars[pick(rng)];
  return s;
}

inline AgentId random_bic(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> letter(0, 25);
  std::uniform_int_distribution<int> alnum(0, 35);
  std::string s;
  for (int i = 0; i < 6; ++i) s += static_cast<char>('A' + letter(rng));
  const int len = rng() % 2 ? 11 : 8;
  for (int i = 6; i < len; ++i) {
    const int v = alnum(rng);
    s += static_cast<char>(v < 26 ? 'A' + v : '0' + (v - 26));
  }
  return AgentId(s);
}

inline Amount random_amount(std::mt19937_64& rng, const std::string& currency) {
  std::uniform_int_distribution<long long> minor(1, 99999999999LL);
  return Amount::make(currency, Decimal(minor(rng), minor_units(currency)));
}

/// Random valid single- or multi-transaction message, optionally with
/// names containing characters that need escaping.
inline iso20022::Pacs008Message random_message(std::mt19937_64& rng, std::size_t max_txs = 3) {
  static const std::vector<std::string> kCurrencies = {"USD", "EUR", "GBP", "JPY", "BHD", "CHF"};
  static const std::vector<std::string> kNames = {"Alice & Bob Ltd", "O'Brien <Trading>", "Zoë \"Quotes\" GmbH", "plain name", "Ünïcödé"};
  iso20022::Pacs008Message msg;
  msg.group_header.msg_id = random_alnum(rng, 1, 35);
  msg.group_header.creation_time = kSimEpoch + std::chrono::seconds(rng() % 100000000);
  msg.group_header.instructing_agent = random_bic(rng);
  msg.group_header.instructed_agent = random_bic(rng);
  const std::size_t n = 1 + rng() % max_txs;
  const auto& ccy = kCurrencies[rng() % kCurrencies.size()];
  for (std::size_t i = 0; i < n; ++i) {
    iso20022::CreditTransferTxInfo tx;
    tx.end_to_end_id = random_alnum(rng, 1, 35);
    tx.settlement_amount = random_amount(rng, ccy);
    tx.debtor_name = rng() % 3 ? kNames[rng() % kNames.size()] : "";
    tx.debtor_account = random_alnum(rng, 1, 34);
    tx.debtor_agent = random_bic(rng);
    tx.creditor_name = rng() % 3 ? kNames[rng() % kNames.size()] : "";
    tx.creditor_account = random_alnum(rng, 1, 34);
    tx.creditor_agent = random_bic(rng);
    const std::size_t hops = rng() % 6;
    for (std::size_t h = 0; h < hops; ++h) tx.intermediary_agents.push_back(random_bic(rng));
    msg.transactions.push_back(std::move(tx));
  }
  iso20022::refresh_group_totals(msg);
  return msg;
}

}  // namespace cbpr::testing
