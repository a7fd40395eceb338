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

#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cbpr/digest.hpp"
#include "cbpr/error.hpp"
#include "cbpr/ledger/snapshot.hpp"
#include "cbpr/ledger/types.hpp"
#include "cbpr/relay/relay.hpp"

// Line-delimited audit trail.
//
//   {"type":"header","format":"cbpr-audit-trail","version":1,"digest":"sha256"}
//   {"type":"event","seq":1,...,"prev":"<sha256 of previous line>"}
//   {"type":"status",...,"prev":...}
//   {"type":"trailer","events":N,"lines":M,"prev":...}
//
// Event lines are one-to-one with ledger EventRecords and carry the
// postings needed to replay balances, the ISO message with its digest,
// and the digest of the full balance snapshot after the event. Every line
// after the header names the digest of the line before it.
namespace cbpr::scenario {

using json = nlohmann::ordered_json;

inline constexpr std::string_view kTrailFormat = "cbpr-audit-trail";

struct AuditEntry {
  std::uint64_t sequence = 0;
  std::string end_to_end_id;
  AgentId agent;
  ledger::EventKind kind = ledger::EventKind::MakeTransfer;
  std::uint64_t ledger_sequence = 0;
  SimTime timestamp{};
  std::string message;
  std::string message_digest;
  std::vector<ledger::Posting> postings;
  std::optional<relay::Conversion> conversion;
  std::string balances_digest;
};

struct StatusEntry {
  std::string end_to_end_id;
  std::string status;  // ACSC / RJCT
  std::string outcome;
  std::optional<std::string> reason;
  std::string report_digest;
};

class AuditTrailWriter {
 public:
  AuditTrailWriter() {
    json header{{"type", "header"}, {"format", kTrailFormat}, {"version", 1}, {"digest", kDigestAlgorithm}};
    push(std::move(header), /*chained=*/false);
  }

  void event(const AuditEntry& e) {
    json postings = json::array();
    for (const auto& p : e.postings) postings.push_back({{"account", p.account}, {"delta", p.delta.to_string()}});
    json line{{"type", "event"},
              {"seq", e.sequence},
              {"e2e", e.end_to_end_id},
              {"agent", e.agent.str()},
              {"kind", ledger::to_string(e.kind)},
              {"ledger_seq", e.ledger_sequence},
              {"time", format_utc(e.timestamp)},
              {"postings", std::move(postings)}};
    if (e.conversion) {
      line["fx"] = {{"sender", e.conversion->sender.str()},
                    {"receiver", e.conversion->receiver.str()},
                    {"from", e.conversion->from.to_string()},
                    {"to", e.conversion->to.to_string()},
                    {"rate", e.conversion->rate.to_string()}};
    }
    line["message_digest"] = e.message_digest;
    line["balances_digest"] = e.balances_digest;
    line["message"] = e.message;
    ++events_;
    push(std::move(line));
  }

  void status(const StatusEntry& s) {
    json line{{"type", "status"}, {"e2e", s.end_to_end_id}, {"status", s.status}, {"outcome", s.outcome}};
    if (s.reason) line["reason"] = *s.reason;
    line["report_digest"] = s.report_digest;
    push(std::move(line));
  }

  /// Appends the trailer and returns the complete trail text.
  std::string finish() {
    json trailer{{"type", "trailer"}, {"events", events_}, {"lines", lines_ + 1}};
    push(std::move(trailer));
    return std::move(out_);
  }

 private:
  void push(json line, bool chained = true) {
    if (chained) line["prev"] = prev_;
    const auto text = line.dump(-1, ' ', false, json::error_handler_t::strict);
    prev_ = sha256_hex(text);
    out_ += text;
    out_ += '\n';
    ++lines_;
  }

  std::string out_;
  std::string prev_;
  std::uint64_t events_ = 0;
  std::uint64_t lines_ = 0;
};

struct ReplayResult {
  ledger::Snapshot final_snapshot;
  std::uint64_t events = 0;
  std::uint64_t status_lines = 0;
};

/// Rebuilds final balances from the trail alone. Any broken link, sequence
/// gap, digest mismatch, impossible posting or missing trailer is
/// reported as CorruptTrail.
inline ReplayResult replay(std::string_view trail, const ledger::Snapshot& initial) {
  auto corrupt = [](std::size_t line_no, const std::string& why) -> Error {
    return Error(Errc::CorruptTrail, "line " + std::to_string(line_no) + ": " + why);
  };
  ReplayResult result{initial, 0, 0};
  auto& snapshot = result.final_snapshot;
  std::istringstream in{std::string(trail)};
  std::string text;
  std::string prev;
  std::size_t line_no = 0;
  bool saw_trailer = false;
  while (std::getline(in, text)) {
    ++line_no;
    if (saw_trailer) throw corrupt(line_no, "content after trailer");
    json line;
    try {
      line = json::parse(text);
    } catch (const json::exception& e) {
      throw corrupt(line_no, std::string("not JSON: ") + e.what());
    }
    try {
      const auto type = line.at("type").get<std::string>();
      if (line_no == 1) {
        if (type != "header" || line.at("format") != kTrailFormat) throw corrupt(line_no, "missing trail header");
        if (line.at("digest") != kDigestAlgorithm) throw corrupt(line_no, "unsupported digest " + line.at("digest").dump());
      } else {
        if (type == "header") throw corrupt(line_no, "unexpected header");
        if (line.at("prev").get<std::string>() != prev) throw corrupt(line_no, "hash chain broken (entry deleted, reordered or edited)");
      }
      prev = sha256_hex(text);

      if (type == "event") {
        const auto seq = line.at("seq").get<std::uint64_t>();
        if (seq != result.events + 1)
          throw corrupt(line_no, "sequence gap: expected " + std::to_string(result.events + 1) + ", found " + std::to_string(seq));
        ++result.events;
        const auto& message = line.at("message").get_ref<const std::string&>();
        if (sha256_hex(message) != line.at("message_digest").get<std::string>()) throw corrupt(line_no, "message digest mismatch");
        const auto agent = line.at("agent").get<std::string>();
        if (!BicCode::valid(agent)) throw corrupt(line_no, "bad agent " + agent);
        auto agent_it = snapshot.agents.find(BicCode(agent));
        if (agent_it == snapshot.agents.end()) throw corrupt(line_no, "unknown agent " + agent);
        for (const auto& p : line.at("postings")) {
          const auto number = p.at("account").get<std::string>();
          auto acct = agent_it->second.find(number);
          if (acct == agent_it->second.end()) throw corrupt(line_no, "unknown account " + number + " on " + agent);
          acct->second.balance += Decimal::parse(p.at("delta").get<std::string>());
          if (acct->second.balance.signum() < 0) throw corrupt(line_no, "posting drives " + number + " negative");
        }
        if (sha256_hex(snapshot.to_text()) != line.at("balances_digest").get<std::string>())
          throw corrupt(line_no, "balances digest mismatch");
      } else if (type == "status") {
        ++result.status_lines;
      } else if (type == "trailer") {
        if (line.at("events").get<std::uint64_t>() != result.events) throw corrupt(line_no, "trailer event count mismatch");
        if (line.at("lines").get<std::uint64_t>() != line_no) throw corrupt(line_no, "trailer line count mismatch");
        saw_trailer = true;
      } else if (type != "header") {
        throw corrupt(line_no, "unknown entry type " + type);
      }
    } catch (const json::exception& e) {
      throw corrupt(line_no, std::string("malformed entry: ") + e.what());
    } catch (const Error& e) {
      if (e.code() == Errc::CorruptTrail) throw;
      throw corrupt(line_no, e.what());
    }
  }
  if (line_no == 0) throw corrupt(0, "empty trail");
  if (!saw_trailer) throw corrupt(line_no, "missing trailer (trail truncated)");
  return result;
}

}  // namespace cbpr::scenario
