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

#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "cbpr/cbpr.hpp"

namespace {

using namespace cbpr;

void configure_logging() {
  spdlog::set_pattern("%l: %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("CBPR_SIM_LOG")) spdlog::set_level(spdlog::level::from_str(level));
}

void print_violations(const ValidationErrors& e) {
  std::cerr << "invalid scenario: " << e.violations().size() << " violation(s)\n";
  for (const auto& v : e.violations()) std::cerr << "  - " << v << "\n";
}

int cmd_validate(const std::string& config) {
  const auto cfg = scenario::load_scenario(config);
  std::cout << config << ": ok (" << cfg.agents.size() << " agents, " << cfg.accounts.size() << " accounts, " << cfg.transactions.size()
            << " transactions, " << cfg.nostro_relationship_count() << " nostro relationships)\n";
  return 0;
}

int cmd_run(const std::string& config, const std::string& out, const std::string& cost_table, bool parallel) {
  const auto cfg = scenario::load_scenario(config);
  scenario::RunOptions options;
  options.parallel = parallel;
  if (!cost_table.empty()) options.cost_table = scenario::load_cost_table(cost_table);
  spdlog::info("running {} transaction(s){}", cfg.transactions.size(), parallel ? " in disjoint batches" : "");
  const auto result = scenario::run(cfg, options);
  scenario::write_artifacts(result, out);
  for (const auto& o : result.outcomes) {
    std::cout << o.end_to_end_id << " " << relay::to_string(o.status);
    if (o.failure) std::cout << " (" << to_string(o.failure->code) << " at hop " << o.failure->hop << ")";
    std::cout << "\n";
    if (o.failure) spdlog::debug("{}: {}", o.end_to_end_id, o.failure->message);
  }
  std::cout << result.event_count << " events, " << result.artifacts.size() << " files written to " << out << "\n";
  return result.exit_status;
}

int cmd_replay(const std::string& trail_path, const std::string& snapshot_path, const std::string& expect_path) {
  const auto trail = scenario::detail::read_file(trail_path);
  const auto initial = ledger::Snapshot::parse(scenario::detail::read_file(snapshot_path));
  const auto result = scenario::replay(trail, initial);
  spdlog::info("replayed {} events, {} status lines", result.events, result.status_lines);
  if (!expect_path.empty()) {
    const auto expected = ledger::Snapshot::parse(scenario::detail::read_file(expect_path));
    if (expected != result.final_snapshot) {
      std::cerr << "replayed snapshot differs from " << expect_path << "\n";
      std::cout << result.final_snapshot.to_text();
      return 1;
    }
  }
  std::cout << result.final_snapshot.to_text();
  return 0;
}

int cmd_report(const std::string& records_path, bool as_json) {
  std::ifstream in(records_path);
  if (!in) throw Error(Errc::Io, "cannot open " + records_path);
  std::vector<metering::CallRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      records.push_back(metering::call_record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::ParseError, records_path + ": line " + std::to_string(records.size() + 1) + ": " + e.what());
    }
  }
  const auto rows = metering::report(records);
  if (as_json)
    std::cout << metering::to_json(rows).dump(2) << "\n";
  else
    std::cout << metering::format_report(rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Cross-border payment relay simulator"};
  app.require_subcommand(1);

  std::string config, out, cost_table, trail, snapshot, expect, records;
  bool parallel = false, as_json = false;

  auto* validate = app.add_subcommand("validate", "Check a scenario file and list every violation");
  validate->add_option("config", config)->required()->check(CLI::ExistingFile);

  auto* run = app.add_subcommand("run", "Execute a scenario and write artifacts");
  run->add_option("config", config)->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "Output directory")->required();
  run->add_option("--cost-table", cost_table, "Gas cost table override (YAML)")->check(CLI::ExistingFile);
  run->add_flag("--parallel", parallel, "Run transactions with disjoint agents concurrently");

  auto* replay = app.add_subcommand("replay", "Rebuild final balances from an audit trail");
  replay->add_option("trail", trail)->required()->check(CLI::ExistingFile);
  replay->add_option("snapshot", snapshot, "Initial balance snapshot")->required()->check(CLI::ExistingFile);
  replay->add_option("--expect", expect, "Fail unless the result equals this snapshot")->check(CLI::ExistingFile);

  auto* report = app.add_subcommand("report", "Aggregate gas call records into a report");
  report->add_option("records", records, "JSON lines of call records")->required()->check(CLI::ExistingFile);
  report->add_flag("--json", as_json, "Emit JSON instead of the text table");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) return cmd_validate(config);
    if (*run) return cmd_run(config, out, cost_table, parallel);
    if (*replay) return cmd_replay(trail, snapshot, expect);
    if (*report) return cmd_report(records, as_json);
  } catch (const ValidationErrors& e) {
    print_violations(e);
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == Errc::CorruptTrail ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
