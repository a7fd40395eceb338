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
#include <sstream>
#include <string>
#include <string_view>

#include "cbpr/error.hpp"
#include "cbpr/ledger/ledger.hpp"
#include "cbpr/ledger/types.hpp"

namespace cbpr::ledger {

/// Balances of every account on every agent, keyed by BIC then account
/// number. The text form is the golden/diff format:
///
///   # cbpr-sim balance snapshot v1
///   agent AAAAUS33
///   account ACC-001 General USD 250.00 owner=alice
///   account NOS-BBBB Nostro USD 250.00 owner=AAAAUS33 counterparty=BBBBDEFF
struct Snapshot {
  std::map<AgentId, std::map<std::string, Account>> agents;

  static Snapshot of(std::span<const AgentLedger* const> ledgers) {
    Snapshot s;
    for (const auto* l : ledgers) s.agents[l->agent()] = l->accounts();
    return s;
  }

  /// Per-currency sum of every balance on every agent.
  std::map<std::string, Decimal> totals() const {
    std::map<std::string, Decimal> out;
    for (const auto& [agent, accounts] : agents)
      for (const auto& [number, a] : accounts) out[a.currency] += a.balance;
    return out;
  }

  const Account& account(const AgentId& agent, const std::string& number) const {
    auto a = agents.find(agent);
    if (a == agents.end()) throw Error(Errc::UnknownAgent, agent.str());
    auto it = a->second.find(number);
    if (it == a->second.end()) throw Error(Errc::AccountNotFound, number + " on " + agent.str());
    return it->second;
  }

  std::string to_text() const {
    std::string out = "# cbpr-sim balance snapshot v1\n";
    for (const auto& [agent, accounts] : agents) {
      out += "agent " + agent.str() + "\n";
      for (const auto& [number, a] : accounts) {
        out += "account " + number + " " + std::string(to_string(a.kind)) + " " + a.currency + " " +
               a.balance.to_string(minor_units(a.currency)) + " owner=" + a.owner;
        if (a.counterparty) out += " counterparty=" + a.counterparty->str();
        out += "\n";
      }
    }
    return out;
  }

  static Snapshot parse(std::string_view text) {
    Snapshot s;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    std::map<std::string, Account>* current = nullptr;
    auto fail = [&line_no](const std::string& why) { throw Error(Errc::ParseError, "snapshot line " + std::to_string(line_no) + ": " + why); };
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line.front() == '#') continue;
      std::istringstream words(line);
      std::string tag;
      words >> tag;
      if (tag == "agent") {
        std::string bic;
        words >> bic;
        if (!BicCode::valid(bic)) fail("bad agent '" + bic + "'");
        current = &s.agents[BicCode(bic)];
      } else if (tag == "account") {
        if (current == nullptr) fail("account before any agent");
        Account a;
        std::string kind, balance;
        if (!(words >> a.number >> kind >> a.currency >> balance)) fail("truncated account line");
        try {
          a.kind = parse_account_kind(kind);
          a.balance = Decimal::parse(balance);
        } catch (const Error& e) {
          fail(e.what());
        }
        std::string attr;
        while (words >> attr) {
          if (attr.rfind("owner=", 0) == 0)
            a.owner = attr.substr(6);
          else if (attr.rfind("counterparty=", 0) == 0 && BicCode::valid(attr.substr(13)))
            a.counterparty = BicCode(attr.substr(13));
          else
            fail("unexpected attribute '" + attr + "'");
        }
        const auto number = a.number;
        if (!current->emplace(number, std::move(a)).second) fail("duplicate account " + number);
      } else {
        fail("unexpected tag '" + tag + "'");
      }
    }
    return s;
  }

  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

}  // namespace cbpr::ledger
