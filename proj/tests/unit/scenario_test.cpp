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

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "support.hpp"

using namespace cbpr;
using namespace cbpr::scenario;
namespace ct = cbpr::testing;
namespace fs = std::filesystem;

namespace {

fs::path corpus(const std::string& name) { return ct::fixture_path("scenarios/" + name); }

std::vector<fs::path> corpus_files() {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(ct::fixture_path("scenarios")))
    if (e.path().extension() == ".yaml") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> violations_of(const std::string& yaml) {
  try {
    load_scenario_text(yaml);
  } catch (const ValidationErrors& e) {
    return e.violations();
  }
  ADD_FAILURE() << "scenario unexpectedly valid";
  return {};
}

bool any_contains(const std::vector<std::string>& v, const std::string& needle) {
  return std::any_of(v.begin(), v.end(), [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

Errc replay_error(const std::string& trail, const ledger::Snapshot& initial) {
  try {
    replay(trail, initial);
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::Io;
}

const char* kTwoAgents = R"(
agents:
  - {bic: AAAAUS33, deployer: admin-a}
  - {bic: BBBBDEFF, deployer: admin-b}
accounts:
  - {agent: AAAAUS33, number: ACC-1, kind: General, currency: USD, balance: "100.00"}
  - {agent: AAAAUS33, number: NOS-B, kind: Nostro, currency: USD, counterparty: BBBBDEFF}
  - {agent: BBBBDEFF, number: NOS-A, kind: Nostro, currency: USD, balance: "100.00", counterparty: AAAAUS33}
  - {agent: BBBBDEFF, number: ACC-2, kind: General, currency: USD}
transactions:
  - {debtor_agent: AAAAUS33, debtor_account: ACC-1, creditor_agent: BBBBDEFF, creditor_account: ACC-2,
     path: [AAAAUS33, BBBBDEFF], amount: "5.00", currency: USD}
)";

/// A random single-currency chain scenario in config form.
std::string random_scenario(std::mt19937_64& rng) {
  const std::size_t agents = 2 + rng() % 6;
  std::ostringstream y;
  y << "seed: " << rng() % 1000 << "\nagents:\n";
  for (std::size_t i = 0; i < agents; ++i) y << "  - {bic: " << ct::bic(i).str() << ", deployer: admin-" << i << "}\n";
  y << "accounts:\n";
  auto money = [&](long long max) { return Decimal(static_cast<long long>(rng() % max), 2).to_string(2); };
  for (std::size_t i = 0; i < agents; ++i) {
    const auto me = ct::bic(i).str();
    if (i == 0) y << "  - {agent: " << me << ", number: ACC-D, kind: General, currency: USD, balance: \"" << money(100000) << "\"}\n";
    if (i + 1 == agents) y << "  - {agent: " << me << ", number: ACC-C, kind: General, currency: USD}\n";
    if (i > 0)
      y << "  - {agent: " << me << ", number: NOS-PREV, kind: Nostro, currency: USD, balance: \"" << money(50000)
        << "\", counterparty: " << ct::bic(i - 1).str() << "}\n";
    if (i + 1 < agents) y << "  - {agent: " << me << ", number: NOS-NEXT, kind: Nostro, currency: USD, counterparty: " << ct::bic(i + 1).str() << "}\n";
  }
  y << "transactions:\n";
  const std::size_t txs = 1 + rng() % 6;
  for (std::size_t t = 0; t < txs; ++t) {
    y << "  - {debtor_agent: " << ct::bic(0).str() << ", debtor_account: ACC-D, creditor_agent: " << ct::bic(agents - 1).str()
      << ", creditor_account: ACC-C, amount: \"" << Decimal(static_cast<long long>(rng() % 20000 + 1), 2).to_string(2)
      << "\", currency: USD, path: [";
    for (std::size_t i = 0; i < agents; ++i) y << (i ? ", " : "") << ct::bic(i).str();
    y << "]}\n";
  }
  return y.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
  return out;
}

fs::path temp_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("cbpr-sim-test-" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(ScenarioLoad, FigureOneConfig) {
  const auto cfg = load_scenario(corpus("fig1_three_agent.yaml"));
  EXPECT_EQ(cfg.agents.size(), 3u);
  EXPECT_EQ(cfg.nostro_relationship_count(), 2u);
  ASSERT_EQ(cfg.transactions.size(), 1u);
  EXPECT_EQ(cfg.transactions[0].amount, Amount::parse("USD", "250.00"));
  EXPECT_EQ(cfg.agents[0].relay_principal, "relay-AAAAUS33");
}

TEST(ScenarioLoad, EveryCorpusFileIsValid) {
  for (const auto& f : corpus_files()) EXPECT_NO_THROW(load_scenario(f)) << f;
}

TEST(ScenarioLoad, MissingNostroRelationshipNamesThePair) {
  std::string yaml = kTwoAgents;
  yaml.erase(yaml.find("  - {agent: BBBBDEFF, number: NOS-A"), yaml.find("  - {agent: BBBBDEFF, number: ACC-2") - yaml.find("  - {agent: BBBBDEFF, number: NOS-A"));
  const auto v = violations_of(yaml);
  EXPECT_TRUE(any_contains(v, "between AAAAUS33 and BBBBDEFF")) << ::testing::PrintToString(v);
}

TEST(ScenarioLoad, DuplicateAccountNumber) {
  std::string yaml = kTwoAgents;
  yaml.replace(yaml.find("number: ACC-2"), 13, "number: NOS-A");
  const auto v = violations_of(yaml);
  EXPECT_TRUE(any_contains(v, "duplicate account_number NOS-A on BBBBDEFF")) << ::testing::PrintToString(v);
}

TEST(ScenarioLoad, ReportsEveryViolationAtOnce) {
  std::string yaml = kTwoAgents;
  yaml.replace(yaml.find("currency: USD}"), 14, "currency: usd}");
  yaml.replace(yaml.find("amount: \"5.00\""), 14, "amount: \"5.001\"");
  yaml.replace(yaml.find("debtor_account: ACC-1"), 21, "debtor_account: ACC-9");
  yaml += "  - {debtor_agent: XXXXXXXX, creditor_agent: BBBBDEFF, path: [XXXXXXXX, BBBBDEFF], amount: \"1\", currency: USD}\n";
  const auto v = violations_of(yaml);
  EXPECT_GE(v.size(), 4u) << ::testing::PrintToString(v);
  EXPECT_TRUE(any_contains(v, "invalid currency 'usd'"));
  EXPECT_TRUE(any_contains(v, "debtor_account ACC-9 not declared"));
  EXPECT_TRUE(any_contains(v, "unknown agent XXXXXXXX"));
  EXPECT_TRUE(any_contains(v, "(line "));
}

TEST(ScenarioLoad, ParseErrorCarriesPosition) {
  try {
    load_scenario_text("agents: [\n  {bic: AAAAUS33\n", "bad.yaml");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ParseError);
    EXPECT_NE(std::string(e.what()).find("bad.yaml: line "), std::string::npos) << e.what();
  }
}

TEST(ScenarioLoad, CostTableOverride) {
  const auto t = load_cost_table_text("per_byte: 0\nbase:\n  get_balance: 1000\n");
  EXPECT_EQ(t.per_byte_cost, 0u);
  EXPECT_EQ(t.base_cost.at("get_balance"), 1000u);
  EXPECT_EQ(t.base_cost.at("deposit"), 30351u);
  EXPECT_THROW(load_cost_table_text("base:\n  foo: 1\n"), ValidationErrors);
}

TEST(ScenarioRun, CanonicalThreeAgentRun) {
  const auto r = run(load_scenario(corpus("fig1_three_agent.yaml")));
  EXPECT_EQ(r.exit_status, 0);
  const AgentId a("AAAAUS33"), b("BBBBDEFF"), c("CCCCGB2L");
  EXPECT_EQ(r.final_snapshot.account(a, "ACC-ALICE").balance - r.initial_snapshot.account(a, "ACC-ALICE").balance, Decimal::parse("-250.00"));
  EXPECT_EQ(r.final_snapshot.account(c, "ACC-BOB").balance - r.initial_snapshot.account(c, "ACC-BOB").balance, Decimal::parse("250.00"));
  EXPECT_EQ(r.final_snapshot.totals(), r.initial_snapshot.totals());
  std::size_t events = 0, statuses = 0;
  for (const auto& line : lines_of(r.audit_trail)) {
    events += line.find(R"("type":"event")") != std::string::npos;
    statuses += line.find(R"("type":"status")") != std::string::npos;
  }
  EXPECT_EQ(events, 3u);
  EXPECT_EQ(statuses, 1u);
  EXPECT_EQ(r.event_count, 3u);
  EXPECT_NE(r.artifacts.at("messages/tx000001-E2E-FIG1-0001/pacs002.xml").find("<TxSts>ACSC</TxSts>"), std::string::npos);
  EXPECT_NE(r.artifacts.at("gas_report.txt").find("| Function Name"), std::string::npos);
}

TEST(ScenarioRun, AuditTrailIsCompleteAndSequenced) {
  for (const auto& f : corpus_files()) {
    const auto r = run(load_scenario(f));
    std::size_t ledger_events = 0;
    for (const auto& o : r.outcomes) ledger_events += o.events.size();
    EXPECT_EQ(r.event_count, ledger_events) << f;
    std::uint64_t expected = 1;
    for (const auto& line : lines_of(r.audit_trail)) {
      const auto j = nlohmann::json::parse(line);
      if (j["type"] == "event") {
        EXPECT_EQ(j["seq"].get<std::uint64_t>(), expected++);
      }
    }
  }
}

TEST(ScenarioRun, MidChainFailureIsReturnedAndRestoresInitialState) {
  const auto r = run(load_scenario(corpus("midchain_failure.yaml")));
  EXPECT_EQ(r.exit_status, 0);
  ASSERT_EQ(r.outcomes.size(), 1u);
  EXPECT_EQ(r.outcomes[0].status, relay::OutcomeStatus::Returned);
  EXPECT_EQ(r.final_snapshot, r.initial_snapshot);
  EXPECT_EQ(r.artifacts.at("snapshot_final.txt"), r.artifacts.at("snapshot_initial.txt"));
  EXPECT_TRUE(r.artifacts.contains("messages/tx000001-E2E-FAIL-0001/pacs004_1_BBBBDEFF.xml"));
  EXPECT_TRUE(r.artifacts.contains("messages/tx000001-E2E-FAIL-0001/pacs004_2_AAAAUS33.xml"));
}

TEST(ScenarioRun, FxScenarioConverts) {
  const auto r = run(load_scenario(corpus("fx_boundary.yaml")));
  EXPECT_EQ(r.final_snapshot.account(AgentId("CCCCFRPP"), "ACC-DENIS").balance, Decimal::parse("91.50"));
  EXPECT_NE(r.audit_trail.find(R"("fx":{"sender":"AAAAUS33","receiver":"BBBBDEFF","from":"100.00 USD","to":"91.50 EUR","rate":"0.9150"})"),
            std::string::npos);
}

TEST(ScenarioRun, ConfigurationRejectionSetsExitStatus) {
  std::string yaml = kTwoAgents;
  yaml.replace(yaml.find("number: NOS-B, kind: Nostro, currency: USD"), 42, "number: NOS-B, kind: Nostro, currency: EUR");
  const auto r = run(load_scenario_text(yaml));
  EXPECT_EQ(r.outcomes[0].status, relay::OutcomeStatus::Rejected);
  EXPECT_EQ(r.outcomes[0].failure->code, Errc::CurrencyMismatch);
  EXPECT_EQ(r.exit_status, 2);
}

TEST(ScenarioRun, BusinessRejectionKeepsExitStatusZero) {
  const auto r = run(load_scenario(corpus("multi_tx.yaml")));
  EXPECT_EQ(r.outcomes[3].status, relay::OutcomeStatus::Rejected);
  EXPECT_EQ(r.outcomes[3].failure->code, Errc::InsufficientFunds);
  EXPECT_EQ(r.exit_status, 0);
}

TEST(ScenarioRun, CostTableOverrideChangesReport) {
  RunOptions opt;
  opt.cost_table = load_cost_table_text("per_byte: 0\n");
  const auto r = run(load_scenario(corpus("fig1_three_agent.yaml")), opt);
  for (const auto& row : r.gas_report) EXPECT_EQ(row.min, row.max) << row.operation;
  EXPECT_EQ(std::find_if(r.gas_report.begin(), r.gas_report.end(), [](const auto& row) { return row.operation == "make_transfer"; })->min,
            135213u);
}

TEST(ScenarioDeterminism, DoubleRunIsByteIdentical) {
  for (const auto& f : corpus_files()) {
    const auto cfg = load_scenario(f);
    const auto d1 = temp_dir("det1"), d2 = temp_dir("det2");
    write_artifacts(run(cfg), d1);
    write_artifacts(run(cfg), d2);
    EXPECT_EQ(read_tree(d1), read_tree(d2)) << f;
    fs::remove_all(d1);
    fs::remove_all(d2);
  }
}

TEST(ScenarioDeterminism, ParallelMatchesSequential) {
  std::mt19937_64 rng(31);
  std::vector<ScenarioConfig> configs;
  for (const auto& f : corpus_files()) configs.push_back(load_scenario(f));
  for (int i = 0; i < 10; ++i) configs.push_back(load_scenario_text(random_scenario(rng)));
  for (const auto& cfg : configs) {
    RunOptions par;
    par.parallel = true;
    EXPECT_EQ(run(cfg).artifacts, run(cfg, par).artifacts);
  }
}

TEST(ScenarioDeterminism, DisjointBatching) {
  const auto cfg = load_scenario(corpus("multi_tx.yaml"));
  // tx1 (A,B,C) and tx2 (E,F) share nothing; tx3 spans both corridors.
  const auto batches = disjoint_batches(cfg);
  ASSERT_GE(batches.size(), 2u);
  EXPECT_EQ(batches[0], (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(batches[1].front(), 2u);
}

TEST(ScenarioReplay, CorpusReplaysToLiveSnapshot) {
  for (const auto& f : corpus_files()) {
    const auto r = run(load_scenario(f));
    const auto initial = ledger::Snapshot::parse(r.artifacts.at("snapshot_initial.txt"));
    const auto replayed = replay(r.audit_trail, initial);
    EXPECT_EQ(replayed.final_snapshot, r.final_snapshot) << f;
    EXPECT_EQ(replayed.final_snapshot.to_text(), r.artifacts.at("snapshot_final.txt")) << f;
    EXPECT_EQ(replayed.events, r.event_count);
  }
}

TEST(ScenarioReplay, RandomScenariosReplayToLiveSnapshot) {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 40; ++i) {
    const auto r = run(load_scenario_text(random_scenario(rng)));
    EXPECT_EQ(replay(r.audit_trail, r.initial_snapshot).final_snapshot, r.final_snapshot);
  }
}

TEST(ScenarioReplay, SnapshotTextRoundTrips) {
  const auto r = run(load_scenario(corpus("multi_tx.yaml")));
  EXPECT_EQ(ledger::Snapshot::parse(r.final_snapshot.to_text()), r.final_snapshot);
  EXPECT_THROW(ledger::Snapshot::parse("account X General USD 1.00 owner=x\n"), Error);
}

TEST(ScenarioReplay, AnySingleDeletionIsDetected) {
  for (const auto& f : corpus_files()) {
    const auto r = run(load_scenario(f));
    const auto lines = lines_of(r.audit_trail);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      auto cut = lines;
      cut.erase(cut.begin() + static_cast<std::ptrdiff_t>(i));
      EXPECT_EQ(replay_error(join_lines(cut), r.initial_snapshot), Errc::CorruptTrail) << f << " line " << i + 1;
    }
  }
}

TEST(ScenarioReplay, DigestTamperIsDetected) {
  const auto r = run(load_scenario(corpus("multi_tx.yaml")));
  const auto lines = lines_of(r.audit_trail);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto j = nlohmann::ordered_json::parse(lines[i]);
    if (j["type"] != "event") continue;
    for (const auto* field : {"message_digest", "balances_digest"}) {
      auto tampered = lines;
      auto copy = j;
      auto digest = copy[field].get<std::string>();
      digest[0] = digest[0] == '0' ? '1' : '0';
      copy[field] = digest;
      tampered[i] = copy.dump();
      EXPECT_EQ(replay_error(join_lines(tampered), r.initial_snapshot), Errc::CorruptTrail) << field << " line " << i + 1;
    }
  }
}

TEST(ScenarioReplay, EditedPostingIsDetected) {
  const auto r = run(load_scenario(corpus("fig1_three_agent.yaml")));
  auto trail = r.audit_trail;
  const auto pos = trail.find(R"("delta":"-250.00")");
  ASSERT_NE(pos, std::string::npos);
  trail.replace(pos, 17, R"("delta":"-25.00")");
  EXPECT_EQ(replay_error(trail, r.initial_snapshot), Errc::CorruptTrail);
}

class CliTest : public ::testing::Test {
 protected:
  static int sim(const std::string& args) {
    const auto cmd = std::string(CBPR_SIM_BINARY) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  }
};

TEST_F(CliTest, VerbsAndExitStatuses) {
  const auto out = temp_dir("cli");
  const auto fig1 = corpus("fig1_three_agent.yaml").string();
  EXPECT_EQ(sim("validate " + fig1), 0);
  EXPECT_EQ(sim("run " + fig1 + " --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "audit_trail.jsonl"));
  EXPECT_EQ(sim("replay " + (out / "audit_trail.jsonl").string() + " " + (out / "snapshot_initial.txt").string() + " --expect " +
                (out / "snapshot_final.txt").string()),
            0);
  EXPECT_EQ(sim("report " + (out / "gas_records.jsonl").string()), 0);
  EXPECT_EQ(sim("report --json " + (out / "gas_records.jsonl").string()), 0);

  {
    std::ofstream bad(out / "bad.yaml");
    bad << "agents:\n  - {bic: nope}\n";
  }
  EXPECT_EQ(sim("validate " + (out / "bad.yaml").string()), 2);

  auto trail = slurp(out / "audit_trail.jsonl");
  trail.erase(trail.find("\n") + 1, trail.find("\n", trail.find("\n") + 1) - trail.find("\n"));
  {
    std::ofstream cut(out / "cut.jsonl");
    cut << trail;
  }
  EXPECT_EQ(sim("replay " + (out / "cut.jsonl").string() + " " + (out / "snapshot_initial.txt").string()), 3);
  EXPECT_NE(sim("frobnicate"), 0);
  fs::remove_all(out);
}
