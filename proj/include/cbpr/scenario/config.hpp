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

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cbpr/bic.hpp"
#include "cbpr/decimal.hpp"
#include "cbpr/error.hpp"
#include "cbpr/iso20022/types.hpp"
#include "cbpr/ledger/types.hpp"
#include "cbpr/metering/metering.hpp"
#include "cbpr/money.hpp"

namespace cbpr::scenario {

struct AgentConfig {
  AgentId bic;
  std::string deployer;
  std::string relay_principal;  // granted Operator; the web client signs with it
};

struct AccountConfig {
  AgentId agent;
  std::string number;
  ledger::AccountKind kind = ledger::AccountKind::General;
  std::string currency;
  Decimal initial_balance;
  std::string owner;
  std::optional<AgentId> counterparty;
};

struct FxRateConfig {
  std::optional<AgentId> agent;  // unset: every agent's table
  std::string from;
  std::string to;
  Decimal rate;
};

struct TransactionConfig {
  std::string end_to_end_id;
  AgentId debtor_agent;
  std::string debtor_account;
  std::string debtor_name;
  AgentId creditor_agent;
  std::string creditor_account;
  std::string creditor_name;
  std::vector<AgentId> path;
  Amount amount;
};

struct ScenarioConfig {
  std::uint64_t seed = 0;
  std::vector<AgentConfig> agents;
  std::vector<AccountConfig> accounts;
  std::vector<FxRateConfig> fx_rates;
  std::vector<TransactionConfig> transactions;
  std::optional<metering::CostTable> cost_table;

  const AccountConfig* find_account(const AgentId& agent, const std::string& number) const {
    for (const auto& a : accounts)
      if (a.agent == agent && a.number == number) return &a;
    return nullptr;
  }

  const AccountConfig* find_nostro(const AgentId& holder, const AgentId& counterparty) const {
    for (const auto& a : accounts)
      if (a.agent == holder && a.kind == ledger::AccountKind::Nostro && a.counterparty == counterparty) return &a;
    return nullptr;
  }

  /// Number of adjacent agent pairs on any path with nostros on both sides.
  std::size_t nostro_relationship_count() const {
    std::set<std::pair<AgentId, AgentId>> pairs;
    for (const auto& tx : transactions)
      for (std::size_t i = 0; i + 1 < tx.path.size(); ++i)
        if (find_nostro(tx.path[i], tx.path[i + 1]) && find_nostro(tx.path[i + 1], tx.path[i])) pairs.insert(std::minmax(tx.path[i], tx.path[i + 1]));
    return pairs.size();
  }
};

namespace detail {

inline bool is_identifier(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '=') return false;
  return true;
}

inline std::string where(const YAML::Node& node) {
  const auto mark = node.Mark();
  if (mark.line < 0) return "";
  return " (line " + std::to_string(mark.line + 1) + ", column " + std::to_string(mark.column + 1) + ")";
}

/// Collects violations instead of throwing on the first one.
class Collector {
 public:
  void add(std::string message) { violations_.push_back(std::move(message)); }
  bool empty() const { return violations_.empty(); }
  std::vector<std::string>& violations() { return violations_; }

  std::string text(const YAML::Node& node, const std::string& key, const std::string& ctx, bool required = true) {
    const auto child = node[key];
    if (!child || child.IsNull()) {
      if (required) add(ctx + ": missing '" + key + "'" + where(node));
      return {};
    }
    if (!child.IsScalar()) {
      add(ctx + ": '" + key + "' must be a scalar" + where(child));
      return {};
    }
    return child.Scalar();
  }

  std::optional<AgentId> bic(const YAML::Node& node, const std::string& key, const std::string& ctx, bool required = true) {
    const auto value = text(node, key, ctx, required);
    if (value.empty()) return std::nullopt;
    if (!BicCode::valid(value)) {
      add(ctx + ": invalid BIC '" + value + "'" + where(node[key]));
      return std::nullopt;
    }
    return BicCode(value);
  }

  std::optional<Decimal> decimal(const YAML::Node& node, const std::string& key, const std::string& ctx, bool required = true) {
    const auto value = text(node, key, ctx, required);
    if (value.empty()) return std::nullopt;
    try {
      return Decimal::parse(value);
    } catch (const Error&) {
      add(ctx + ": '" + key + "' is not a decimal: '" + value + "'" + where(node[key]));
      return std::nullopt;
    }
  }

 private:
  std::vector<std::string> violations_;
};

inline metering::CostTable parse_cost_table(const YAML::Node& node, Collector& c, const std::string& ctx) {
  auto table = metering::CostTable::defaults();
  if (!node.IsMap()) {
    c.add(ctx + ": must be a mapping" + where(node));
    return table;
  }
  if (const auto per_byte = node["per_byte"]) {
    try {
      const auto v = per_byte.as<long long>();
      if (v < 0) c.add(ctx + ": per_byte must be >= 0" + where(per_byte));
      table.per_byte_cost = static_cast<metering::GasUnits>(v);
    } catch (const YAML::Exception&) {
      c.add(ctx + ": per_byte must be an integer" + where(per_byte));
    }
  }
  if (const auto base = node["base"]) {
    for (const auto& kv : base) {
      const auto op = kv.first.as<std::string>();
      if (std::find(metering::kMeteredOperations.begin(), metering::kMeteredOperations.end(), op) == metering::kMeteredOperations.end()) {
        c.add(ctx + ": unknown operation '" + op + "'" + where(kv.first));
        continue;
      }
      try {
        const auto v = kv.second.as<long long>();
        if (v < 0) c.add(ctx + ": cost of " + op + " must be >= 0" + where(kv.second));
        table.base_cost[op] = static_cast<metering::GasUnits>(v);
      } catch (const YAML::Exception&) {
        c.add(ctx + ": cost of " + op + " must be an integer" + where(kv.second));
      }
    }
  }
  return table;
}

inline YAML::Node load_yaml(const std::string& text, const std::string& origin) {
  try {
    return YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw Error(Errc::ParseError, origin + ": line " + std::to_string(e.mark.line + 1) + ", column " + std::to_string(e.mark.column + 1) +
                                      ": " + e.msg);
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

/// Parses a cost-table override file (`per_byte`, `base: {op: units}`);
/// unspecified operations keep their defaults.
inline metering::CostTable load_cost_table_text(const std::string& text, const std::string& origin = "<cost-table>") {
  detail::Collector c;
  auto table = detail::parse_cost_table(detail::load_yaml(text, origin), c, "cost_table");
  if (!c.empty()) throw ValidationErrors(std::move(c.violations()));
  return table;
}

inline metering::CostTable load_cost_table(const std::filesystem::path& path) {
  return load_cost_table_text(detail::read_file(path), path.string());
}

/// Parses and validates a scenario. Every violation is reported at once.
inline ScenarioConfig load_scenario_text(const std::string& text, const std::string& origin = "<scenario>") {
  using detail::where;
  const auto root = detail::load_yaml(text, origin);
  detail::Collector c;
  ScenarioConfig cfg;
  if (!root.IsMap()) throw Error(Errc::ParseError, origin + ": top level must be a mapping");

  if (const auto seed = root["seed"]) {
    try {
      cfg.seed = seed.as<std::uint64_t>();
    } catch (const YAML::Exception&) {
      c.add("seed must be a non-negative integer" + where(seed));
    }
  }
  if (const auto table = root["cost_table"]) cfg.cost_table = detail::parse_cost_table(table, c, "cost_table");

  std::set<AgentId> agents;
  const auto agent_nodes = root["agents"];
  if (!agent_nodes || !agent_nodes.IsSequence() || agent_nodes.size() == 0) c.add("agents: need a non-empty list");
  for (std::size_t i = 0; agent_nodes && agent_nodes.IsSequence() && i < agent_nodes.size(); ++i) {
    const auto n = agent_nodes[i];
    const auto ctx = "agents[" + std::to_string(i) + "]";
    const auto bic = c.bic(n, "bic", ctx);
    auto deployer = c.text(n, "deployer", ctx);
    if (!deployer.empty() && !detail::is_identifier(deployer)) c.add(ctx + ": deployer must not contain whitespace" + where(n));
    auto relay = c.text(n, "relay", ctx, false);
    if (!bic) continue;
    if (!agents.insert(*bic).second) c.add(ctx + ": duplicate agent " + bic->str() + where(n));
    if (relay.empty()) relay = "relay-" + bic->str();
    cfg.agents.push_back(AgentConfig{*bic, deployer, relay});
    if (const auto fx = n["fx"]) {
      for (std::size_t j = 0; j < fx.size(); ++j) {
        const auto f = fx[j];
        const auto fctx = ctx + ".fx[" + std::to_string(j) + "]";
        FxRateConfig rate{*bic, c.text(f, "from", fctx), c.text(f, "to", fctx), {}};
        if (auto r = c.decimal(f, "rate", fctx)) rate.rate = *r;
        if (!rate.from.empty() && !is_currency_code(rate.from)) c.add(fctx + ": invalid currency '" + rate.from + "'" + where(f));
        if (!rate.to.empty() && !is_currency_code(rate.to)) c.add(fctx + ": invalid currency '" + rate.to + "'" + where(f));
        if (rate.rate.signum() <= 0) c.add(fctx + ": rate must be positive" + where(f));
        cfg.fx_rates.push_back(rate);
      }
    }
  }

  if (const auto fx_nodes = root["fx_rates"]) {
    for (std::size_t i = 0; i < fx_nodes.size(); ++i) {
      const auto f = fx_nodes[i];
      const auto ctx = "fx_rates[" + std::to_string(i) + "]";
      FxRateConfig rate{c.bic(f, "agent", ctx, false), c.text(f, "from", ctx), c.text(f, "to", ctx), {}};
      if (auto r = c.decimal(f, "rate", ctx)) rate.rate = *r;
      if (rate.agent && !agents.contains(*rate.agent)) c.add(ctx + ": unknown agent " + rate.agent->str() + where(f));
      if (!rate.from.empty() && !is_currency_code(rate.from)) c.add(ctx + ": invalid currency '" + rate.from + "'" + where(f));
      if (!rate.to.empty() && !is_currency_code(rate.to)) c.add(ctx + ": invalid currency '" + rate.to + "'" + where(f));
      if (rate.rate.signum() <= 0) c.add(ctx + ": rate must be positive" + where(f));
      cfg.fx_rates.push_back(rate);
    }
  }

  const auto account_nodes = root["accounts"];
  for (std::size_t i = 0; account_nodes && i < account_nodes.size(); ++i) {
    const auto n = account_nodes[i];
    const auto ctx = "accounts[" + std::to_string(i) + "]";
    AccountConfig a;
    const auto agent = c.bic(n, "agent", ctx);
    a.number = c.text(n, "number", ctx);
    const auto kind = c.text(n, "kind", ctx);
    a.currency = c.text(n, "currency", ctx);
    const auto balance = c.decimal(n, "balance", ctx, false);
    a.owner = c.text(n, "owner", ctx, false);
    a.counterparty = c.bic(n, "counterparty", ctx, false);
    bool ok = agent.has_value() && !a.number.empty();
    if (agent && !agents.contains(*agent)) {
      c.add(ctx + ": unknown agent " + agent->str() + where(n));
      ok = false;
    }
    if (!a.number.empty() && !detail::is_identifier(a.number)) c.add(ctx + ": account number must not contain whitespace" + where(n));
    if (!a.owner.empty() && !detail::is_identifier(a.owner)) c.add(ctx + ": owner must not contain whitespace" + where(n));
    if (kind == "General")
      a.kind = ledger::AccountKind::General;
    else if (kind == "Nostro")
      a.kind = ledger::AccountKind::Nostro;
    else if (!kind.empty())
      c.add(ctx + ": kind must be General or Nostro, got '" + kind + "'" + where(n));
    if (!a.currency.empty() && !is_currency_code(a.currency)) c.add(ctx + ": invalid currency '" + a.currency + "'" + where(n));
    if (balance) {
      if (balance->signum() < 0) c.add(ctx + ": balance must be >= 0" + where(n));
      if (is_currency_code(a.currency) && balance->significant_scale() > minor_units(a.currency))
        c.add(ctx + ": balance has more fractional digits than " + a.currency + " allows" + where(n));
      a.initial_balance = *balance;
    }
    if (a.kind == ledger::AccountKind::Nostro && kind == "Nostro" && !a.counterparty)
      c.add(ctx + ": Nostro account " + a.number + " needs a counterparty" + where(n));
    if (a.kind == ledger::AccountKind::General && a.counterparty) c.add(ctx + ": General account " + a.number + " cannot have a counterparty" + where(n));
    if (a.counterparty && !agents.contains(*a.counterparty)) c.add(ctx + ": counterparty " + a.counterparty->str() + " is not a declared agent" + where(n));
    if (!ok) continue;
    a.agent = *agent;
    if (cfg.find_account(a.agent, a.number)) {
      c.add(ctx + ": duplicate account_number " + a.number + " on " + a.agent.str() + where(n));
      continue;
    }
    if (a.counterparty && cfg.find_nostro(a.agent, *a.counterparty))
      c.add(ctx + ": second nostro for counterparty " + a.counterparty->str() + " on " + a.agent.str() + where(n));
    if (a.owner.empty()) a.owner = a.kind == ledger::AccountKind::Nostro ? a.agent.str() : a.number;
    cfg.accounts.push_back(std::move(a));
  }

  std::set<std::string> e2e_ids;
  const auto tx_nodes = root["transactions"];
  for (std::size_t i = 0; tx_nodes && i < tx_nodes.size(); ++i) {
    const auto n = tx_nodes[i];
    const auto ctx = "transactions[" + std::to_string(i) + "]";
    TransactionConfig t;
    char fallback[24];
    std::snprintf(fallback, sizeof fallback, "E2E-%06zu", i + 1);
    t.end_to_end_id = c.text(n, "end_to_end_id", ctx, false);
    if (t.end_to_end_id.empty()) t.end_to_end_id = fallback;
    if (t.end_to_end_id.size() > iso20022::kMaxIdLength) c.add(ctx + ": end_to_end_id longer than 35 characters" + where(n));
    if (!e2e_ids.insert(t.end_to_end_id).second) c.add(ctx + ": duplicate end_to_end_id " + t.end_to_end_id + where(n));
    const auto debtor = c.bic(n, "debtor_agent", ctx);
    const auto creditor = c.bic(n, "creditor_agent", ctx);
    t.debtor_account = c.text(n, "debtor_account", ctx);
    t.creditor_account = c.text(n, "creditor_account", ctx);
    t.debtor_name = c.text(n, "debtor_name", ctx, false);
    t.creditor_name = c.text(n, "creditor_name", ctx, false);
    const auto currency = c.text(n, "currency", ctx);
    const auto value = c.decimal(n, "amount", ctx);
    if (value && !currency.empty()) {
      try {
        t.amount = Amount::make(currency, *value);
        if (value->signum() <= 0) c.add(ctx + ": amount must be positive" + where(n));
      } catch (const Error& e) {
        c.add(ctx + ": " + e.detail() + where(n));
      }
    }
    bool path_ok = true;
    const auto path = n["path"];
    if (!path || !path.IsSequence() || path.size() < 2) {
      c.add(ctx + ": path needs at least two agents" + where(n));
      path_ok = false;
    } else {
      for (std::size_t j = 0; j < path.size(); ++j) {
        const auto bic = path[j].IsScalar() ? path[j].Scalar() : std::string{};
        if (!BicCode::valid(bic)) {
          c.add(ctx + ".path[" + std::to_string(j) + "]: invalid BIC '" + bic + "'" + where(path[j]));
          path_ok = false;
          continue;
        }
        if (!agents.contains(BicCode(bic))) {
          c.add(ctx + ".path[" + std::to_string(j) + "]: unknown agent " + bic + where(path[j]));
          path_ok = false;
        }
        t.path.emplace_back(bic);
      }
    }
    if (!debtor || !creditor) continue;
    t.debtor_agent = *debtor;
    t.creditor_agent = *creditor;
    if (!path_ok) continue;
    if (std::set<AgentId>(t.path.begin(), t.path.end()).size() != t.path.size()) c.add(ctx + ": path visits an agent twice" + where(path));
    if (t.path.front() != t.debtor_agent) c.add(ctx + ": path must start at debtor_agent " + t.debtor_agent.str() + where(path));
    if (t.path.back() != t.creditor_agent) c.add(ctx + ": path must end at creditor_agent " + t.creditor_agent.str() + where(path));
    for (std::size_t j = 0; j + 1 < t.path.size(); ++j) {
      const auto& a = t.path[j];
      const auto& b = t.path[j + 1];
      if (!cfg.find_nostro(a, b) || !cfg.find_nostro(b, a))
        c.add(ctx + ": no nostro relationship between " + a.str() + " and " + b.str() + where(path));
    }
    const auto* dacct = cfg.find_account(t.debtor_agent, t.debtor_account);
    if (!t.debtor_account.empty() && !dacct) c.add(ctx + ": debtor_account " + t.debtor_account + " not declared on " + t.debtor_agent.str() + where(n));
    if (dacct && !t.amount.currency.empty() && dacct->currency != t.amount.currency)
      c.add(ctx + ": debtor_account " + t.debtor_account + " is " + dacct->currency + ", transaction is " + t.amount.currency + where(n));
    if (!t.creditor_account.empty() && !cfg.find_account(t.creditor_agent, t.creditor_account))
      c.add(ctx + ": creditor_account " + t.creditor_account + " not declared on " + t.creditor_agent.str() + where(n));
    cfg.transactions.push_back(std::move(t));
  }

  if (!c.empty()) throw ValidationErrors(std::move(c.violations()));
  return cfg;
}

inline ScenarioConfig load_scenario(const std::filesystem::path& path) {
  return load_scenario_text(detail::read_file(path), path.string());
}

}  // namespace cbpr::scenario
