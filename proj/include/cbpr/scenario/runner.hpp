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
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "cbpr/digest.hpp"
#include "cbpr/error.hpp"
#include "cbpr/iso20022/pacs008.hpp"
#include "cbpr/iso20022/reports.hpp"
#include "cbpr/ledger/ledger.hpp"
#include "cbpr/ledger/snapshot.hpp"
#include "cbpr/metering/metering.hpp"
#include "cbpr/relay/relay.hpp"
#include "cbpr/scenario/audit.hpp"
#include "cbpr/scenario/config.hpp"

namespace cbpr::scenario {

struct RunOptions {
  bool parallel = false;
  std::optional<metering::CostTable> cost_table;  // overrides the scenario's table
};

/// Everything a run produces. `artifacts` maps output-relative paths to
/// file contents; writing them out is a separate step so runs can be
/// compared byte for byte in memory.
struct RunResult {
  int exit_status = 0;
  std::vector<relay::TransactionOutcome> outcomes;
  ledger::Snapshot initial_snapshot;
  ledger::Snapshot final_snapshot;
  std::vector<metering::CallRecord> call_records;
  std::vector<metering::GasReportRow> gas_report;
  std::string audit_trail;
  std::size_t event_count = 0;
  std::map<std::string, std::string> artifacts;
};

/// Rejections caused by the scenario itself rather than by simulated
/// business conditions such as an underfunded debtor.
inline bool is_configuration_error(Errc code) {
  switch (code) {
    case Errc::AccountNotFound:
    case Errc::WrongAgent:
    case Errc::MissingNostro:
    case Errc::UnknownAgent:
    case Errc::MissingNostroRelationship:
    case Errc::MissingRate:
    case Errc::CurrencyMismatch:
    case Errc::PathMismatch:
    case Errc::Unauthorized:
      return true;
    default:
      return false;
  }
}

/// Ledgers and directory materialized from a config.
struct World {
  std::vector<std::shared_ptr<ledger::AgentLedger>> ledgers;  // declaration order
  std::vector<std::shared_ptr<metering::MeterSink>> sinks;    // parallel to `ledgers`
  relay::AgentDirectory directory;

  std::shared_ptr<ledger::AgentLedger> ledger_of(const AgentId& agent) const { return directory.at(agent).ledger; }

  ledger::Snapshot snapshot() const {
    std::vector<const ledger::AgentLedger*> raw;
    for (const auto& l : ledgers) raw.push_back(l.get());
    return ledger::Snapshot::of(raw);
  }
};

inline World build_world(const ScenarioConfig& cfg, const metering::CostTable& table) {
  World w;
  for (const auto& a : cfg.agents) {
    auto l = std::make_shared<ledger::AgentLedger>(a.bic, ledger::Principal{a.deployer});
    auto sink = std::make_shared<metering::MeterSink>(table);
    l->attach_meter(sink);
    l->grant_role(ledger::Principal{a.deployer}, ledger::Principal{a.relay_principal}, ledger::Role::Operator);
    w.ledgers.push_back(l);
    w.sinks.push_back(sink);
  }
  auto find = [&w](const AgentId& bic) -> ledger::AgentLedger& {
    for (auto& l : w.ledgers)
      if (l->agent() == bic) return *l;
    throw Error(Errc::UnknownAgent, bic.str());
  };
  auto deployer = [&cfg](const AgentId& bic) {
    for (const auto& a : cfg.agents)
      if (a.bic == bic) return ledger::Principal{a.deployer};
    throw Error(Errc::UnknownAgent, bic.str());
  };
  for (const auto& a : cfg.accounts) {
    auto& l = find(a.agent);
    const auto caller = deployer(a.agent);
    l.create_account(caller, ledger::AccountSpec{a.number, a.kind, a.currency, a.owner, a.counterparty});
    if (a.initial_balance.signum() > 0) l.deposit(caller, a.number, Amount::make(a.currency, a.initial_balance));
  }
  for (std::size_t i = 0; i < cfg.agents.size(); ++i) w.directory.add(w.ledgers[i], ledger::Principal{cfg.agents[i].relay_principal});
  for (const auto& fx : cfg.fx_rates) {
    if (fx.agent) {
      w.directory.set_rate(*fx.agent, fx.from, fx.to, fx.rate);
    } else {
      for (const auto& a : cfg.agents) w.directory.set_rate(a.bic, fx.from, fx.to, fx.rate);
    }
  }
  w.directory.validate();
  return w;
}

inline std::string numbered(std::string_view prefix, std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu", n);
  return std::string(prefix) + buf;
}

/// The debtor agent's outgoing pacs.008 for transaction `index`,
/// addressed to the first hop.
inline iso20022::Pacs008Message initial_message(const TransactionConfig& t, std::size_t index, SimTime created) {
  iso20022::Pacs008Message msg;
  msg.group_header.msg_id = numbered("MSG-", index + 1);
  msg.group_header.creation_time = created;
  msg.group_header.instructing_agent = t.path.front();
  msg.group_header.instructed_agent = t.path[1];
  iso20022::CreditTransferTxInfo tx;
  tx.end_to_end_id = t.end_to_end_id;
  tx.settlement_amount = t.amount;
  tx.debtor_name = t.debtor_name;
  tx.debtor_account = t.debtor_account;
  tx.debtor_agent = t.debtor_agent;
  tx.creditor_name = t.creditor_name;
  tx.creditor_account = t.creditor_account;
  tx.creditor_agent = t.creditor_agent;
  tx.intermediary_agents.assign(t.path.begin() + 1, t.path.end() - 1);
  msg.transactions.push_back(std::move(tx));
  iso20022::refresh_group_totals(msg);
  return msg;
}

inline relay::TransactionOutcome run_one(const TransactionConfig& t, std::size_t index, const World& world) {
  const auto created = world.ledger_of(t.debtor_agent)->clock().now();
  const auto bytes = iso20022::serialize_pacs008(initial_message(t, index, created));
  return relay::run_transaction(iso20022::extract_debtor_instruction(bytes), t.path, world.directory);
}

/// Groups consecutive transactions whose agent footprints are disjoint.
inline std::vector<std::vector<std::size_t>> disjoint_batches(const ScenarioConfig& cfg) {
  std::vector<std::vector<std::size_t>> batches;
  std::set<AgentId> footprint;
  for (std::size_t i = 0; i < cfg.transactions.size(); ++i) {
    const auto& path = cfg.transactions[i].path;
    const bool overlaps = std::any_of(path.begin(), path.end(), [&](const AgentId& a) { return footprint.contains(a); });
    if (batches.empty() || overlaps) {
      batches.emplace_back();
      footprint.clear();
    }
    batches.back().push_back(i);
    footprint.insert(path.begin(), path.end());
  }
  return batches;
}

namespace detail {

inline json outcome_json(const relay::TransactionOutcome& o, const std::vector<std::string>& files) {
  json j{{"end_to_end_id", o.end_to_end_id}, {"status", relay::to_string(o.status)}, {"hops_executed", o.hops_executed}};
  if (o.failure)
    j["failure"] = {{"code", to_string(o.failure->code)}, {"hop", o.failure->hop}, {"message", o.failure->message}};
  json events = json::array();
  for (const auto& [agent, e] : o.events) events.push_back(std::string(ledger::to_string(e.kind)) + "@" + agent.str());
  j["events"] = std::move(events);
  json fx = json::array();
  for (const auto& c : o.conversions)
    fx.push_back({{"at", c.receiver.str()}, {"from", c.from.to_string()}, {"to", c.to.to_string()}, {"rate", c.rate.to_string()}});
  j["conversions"] = std::move(fx);
  j["report"] = {{"status", iso20022::to_string(o.final_report.status_code)},
                 {"original_msg_id", o.final_report.original_msg_id},
                 {"original_end_to_end_id", o.final_report.original_end_to_end_id}};
  if (o.final_report.reason) j["report"]["reason"] = *o.final_report.reason;
  j["artifacts"] = files;
  return j;
}

inline std::string safe_name(const std::string& id) {
  std::string out;
  for (char c : id) out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_');
  return out;
}

}  // namespace detail

/// Executes every transaction in order and renders all artifacts. Output
/// is a pure function of the config (and options): logical clocks, minted
/// ids and file ordering never depend on wall time or thread timing.
inline RunResult run(const ScenarioConfig& cfg, const RunOptions& options = {}) {
  auto table = options.cost_table ? *options.cost_table : cfg.cost_table.value_or(metering::CostTable::defaults());
  table.require_complete();
  auto world = build_world(cfg, table);

  RunResult result;
  result.initial_snapshot = world.snapshot();
  result.outcomes.resize(cfg.transactions.size());

  if (options.parallel) {
    for (const auto& batch : disjoint_batches(cfg)) {
      std::vector<std::jthread> workers;
      for (auto i : batch) workers.emplace_back([&, i] { result.outcomes[i] = run_one(cfg.transactions[i], i, world); });
    }
  } else {
    for (std::size_t i = 0; i < cfg.transactions.size(); ++i) result.outcomes[i] = run_one(cfg.transactions[i], i, world);
  }
  result.final_snapshot = world.snapshot();

  // Audit trail in canonical (transaction, execution) order. Balance
  // digests come from replaying postings in that order, which is what a
  // verifier reconstructs.
  AuditTrailWriter trail;
  auto running = result.initial_snapshot;
  std::uint64_t seq = 0;
  auto& files = result.artifacts;
  json outcomes = json::array();
  for (std::size_t i = 0; i < result.outcomes.size(); ++i) {
    const auto& o = result.outcomes[i];
    const auto dir = "messages/" + numbered("tx", i + 1) + "-" + detail::safe_name(o.end_to_end_id) + "/";
    std::vector<std::string> written;
    auto put = [&](const std::string& name, std::string content) {
      files[dir + name] = std::move(content);
      written.push_back(dir + name);
    };

    for (std::size_t h = 0; h < o.delivered_pacs008.size(); ++h)
      put("pacs008_hop" + std::to_string(h) + "_" + o.delivered_pacs008[h].first.str() + ".xml",
          o.delivered_pacs008[h].second);
    std::size_t conversion_index = 0;
    std::size_t return_index = 0;
    for (const auto& [agent, e] : o.events) {
      AuditEntry entry{++seq, e.end_to_end_id, agent, e.kind, e.sequence, e.timestamp, e.iso_message, sha256_hex(e.iso_message), e.postings,
                       std::nullopt, {}};
      if (e.is_forward() && e.kind != ledger::EventKind::MakeTransfer && conversion_index < o.conversions.size() &&
          o.conversions[conversion_index].receiver == agent)
        entry.conversion = o.conversions[conversion_index++];
      auto& accounts = running.agents.at(agent);
      for (const auto& p : e.postings) accounts.at(p.account).balance += p.delta;
      entry.balances_digest = sha256_hex(running.to_text());
      trail.event(entry);
      if (e.kind == ledger::EventKind::TransferReturned) put("pacs004_" + std::to_string(++return_index) + "_" + agent.str() + ".xml", e.iso_message);
    }
    const iso20022::MessageStamp stamp{numbered("STS-", i + 1), o.events.empty() ? kSimEpoch : o.events.back().second.timestamp};
    const auto report_xml = iso20022::serialize_pacs002(o.final_report, stamp);
    put("pacs002.xml", report_xml);
    trail.status(StatusEntry{o.end_to_end_id, std::string(iso20022::to_string(o.final_report.status_code)), std::string(relay::to_string(o.status)),
                             o.final_report.reason, sha256_hex(report_xml)});
    outcomes.push_back(detail::outcome_json(o, written));
    if (o.status == relay::OutcomeStatus::Rejected && o.failure && is_configuration_error(o.failure->code)) result.exit_status = 2;
  }
  result.event_count = seq;
  result.audit_trail = trail.finish();

  for (const auto& sink : world.sinks) {
    const auto records = sink->records();
    result.call_records.insert(result.call_records.end(), records.begin(), records.end());
  }
  result.gas_report = metering::report(result.call_records);

  std::string records_jsonl;
  for (const auto& r : result.call_records) records_jsonl += metering::to_json(r).dump() + "\n";
  files["audit_trail.jsonl"] = result.audit_trail;
  files["snapshot_initial.txt"] = result.initial_snapshot.to_text();
  files["snapshot_final.txt"] = result.final_snapshot.to_text();
  files["gas_records.jsonl"] = records_jsonl;
  files["gas_report.txt"] = metering::format_report(result.gas_report);
  files["gas_report.json"] = metering::to_json(result.gas_report).dump(2) + "\n";
  files["outcomes.json"] = outcomes.dump(2) + "\n";
  return result;
}

inline void write_artifacts(const RunResult& result, const std::filesystem::path& out_dir) {
  for (const auto& [rel, content] : result.artifacts) {
    const auto path = out_dir / rel;
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot write " + path.string());
    out << content;
  }
}

}  // namespace cbpr::scenario
