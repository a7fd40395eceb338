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
#include <charconv>
#include <initializer_list>
#include <string>
#include <string_view>

#include "cbpr/error.hpp"
#include "cbpr/iso20022/types.hpp"
#include "cbpr/iso20022/xml.hpp"

namespace cbpr::iso20022 {

namespace detail {

inline bool is_intermediary_name(std::string_view name) {
  constexpr std::string_view prefix = "IntrmyAgt";
  if (name.size() <= prefix.size() || name.substr(0, prefix.size()) != prefix) return false;
  return std::all_of(name.begin() + prefix.size(), name.end(), [](char c) { return c >= '0' && c <= '9'; });
}

/// Stores every child of `node` whose local name is not in `known` as an
/// opaque fragment under `path`.
inline void collect_unknown(const xml::Tree& node, std::initializer_list<std::string_view> known, OpaqueElements& extras,
                            const std::string& path, bool allow_intermediaries = false) {
  for (const auto& [k, v] : node) {
    if (xml::is_markup_key(k)) continue;
    const auto name = xml::local_name(k);
    if (std::find(known.begin(), known.end(), name) != known.end()) continue;
    if (allow_intermediaries && is_intermediary_name(name)) continue;
    extras[path].push_back(xml::canonical_fragment(k, v));
  }
}

inline void emit_extras(xml::Writer& w, const OpaqueElements& extras, const std::string& path) {
  if (auto it = extras.find(path); it != extras.end())
    for (const auto& fragment : it->second) w.raw(fragment);
}

inline BicCode read_agent(const xml::Tree& block, const std::string& display, const std::string& rel, OpaqueElements& extras) {
  const auto& agent = xml::require(block, display, rel);
  collect_unknown(agent, {"FinInstnId"}, extras, rel);
  const auto& fin = xml::require(agent, display + "/" + rel, "FinInstnId");
  collect_unknown(fin, {"BICFI"}, extras, rel + "/FinInstnId");
  const auto text = xml::require_text(fin, display + "/" + rel + "/FinInstnId", "BICFI");
  if (!BicCode::valid(text))
    throw Error(Errc::SchemaViolation, "invalid BICFI '" + text + "' at " + display + "/" + rel + "/FinInstnId/BICFI");
  return BicCode(text);
}

inline void write_agent(xml::Writer& w, std::string_view name, const BicCode& bic, const OpaqueElements& extras) {
  const std::string rel(name);
  w.open(name).open("FinInstnId").leaf("BICFI", bic.str());
  emit_extras(w, extras, rel + "/FinInstnId");
  w.close("FinInstnId");
  emit_extras(w, extras, rel);
  w.close(name);
}

inline std::string read_account(const xml::Tree& block, const std::string& display, const std::string& rel, OpaqueElements& extras) {
  const auto& acct = xml::require(block, display, rel);
  collect_unknown(acct, {"Id"}, extras, rel);
  const auto& id = xml::require(acct, display + "/" + rel, "Id");
  collect_unknown(id, {"Othr"}, extras, rel + "/Id");
  const auto& othr = xml::require(id, display + "/" + rel + "/Id", "Othr");
  collect_unknown(othr, {"Id"}, extras, rel + "/Id/Othr");
  return xml::require_text(othr, display + "/" + rel + "/Id/Othr", "Id");
}

inline void write_account(xml::Writer& w, std::string_view name, const std::string& account, const OpaqueElements& extras) {
  const std::string rel(name);
  w.open(name).open("Id").open("Othr").leaf("Id", account);
  emit_extras(w, extras, rel + "/Id/Othr");
  w.close("Othr");
  emit_extras(w, extras, rel + "/Id");
  w.close("Id");
  emit_extras(w, extras, rel);
  w.close(name);
}

inline std::string read_name(const xml::Tree& block, const std::string& display, const std::string& rel, OpaqueElements& extras) {
  const auto& party = xml::require(block, display, rel);
  collect_unknown(party, {"Nm"}, extras, rel);
  const auto* nm = xml::child(party, "Nm");
  return nm ? xml::trim(nm->data()) : std::string{};
}

inline void write_party(xml::Writer& w, std::string_view name, const std::string& party_name, const OpaqueElements& extras) {
  w.open(name);
  if (!party_name.empty()) w.leaf("Nm", party_name);
  emit_extras(w, extras, std::string(name));
  w.close(name);
}

inline std::string require_id(const xml::Tree& base, const std::string& display, std::string_view path) {
  auto text = xml::require_text(base, display, path);
  if (text.empty() || text.size() > kMaxIdLength)
    throw Error(Errc::SchemaViolation, display + "/" + std::string(path) + " must be 1.." + std::to_string(kMaxIdLength) + " characters");
  return text;
}

inline MoneyAmount read_amount(const xml::Tree& node, const std::string& display) {
  const auto currency = xml::attribute(node, "Ccy");
  if (currency.empty()) throw Error(Errc::SchemaViolation, "missing required attribute " + display + "/@Ccy");
  if (!is_currency_code(currency)) throw Error(Errc::SchemaViolation, "invalid currency '" + currency + "' at " + display + "/@Ccy");
  const auto text = xml::trim(node.data());
  Decimal value;
  try {
    value = Decimal::parse(text);
  } catch (const Error&) {
    throw Error(Errc::SchemaViolation, "invalid amount '" + text + "' at " + display);
  }
  if (value.scale() > minor_units(currency))
    throw Error(Errc::SchemaViolation, "amount '" + text + "' has more fractional digits than " + currency + " allows at " + display);
  if (value.signum() <= 0) throw Error(Errc::InvariantViolation, "settlement amount must be positive at " + display);
  return MoneyAmount{currency, value.rescaled(minor_units(currency))};
}

/// CtrlSum is rendered with the widest minor-unit count among the
/// transaction currencies so two-decimal currencies keep trailing zeros.
inline int ctrl_sum_scale(const Pacs008Message& msg) {
  int scale = 0;
  for (const auto& tx : msg.transactions) scale = std::max(scale, minor_units(tx.settlement_amount.currency));
  return std::max(scale, msg.group_header.ctrl_sum.significant_scale());
}

inline GroupHeader read_group_header(const xml::Tree& root) {
  static const std::string kDisplay = "GrpHdr";
  const auto& node = xml::require(root, "FIToFICstmrCdtTrf", "GrpHdr");
  GroupHeader h;
  collect_unknown(node, {"MsgId", "CreDtTm", "NbOfTxs", "CtrlSum", "InstgAgt", "InstdAgt"}, h.extras, "");
  h.msg_id = require_id(node, kDisplay, "MsgId");
  h.creation_time = parse_utc(xml::require_text(node, kDisplay, "CreDtTm"));
  const auto nb = xml::require_text(node, kDisplay, "NbOfTxs");
  const auto [ptr, ec] = std::from_chars(nb.data(), nb.data() + nb.size(), h.nb_of_txs);
  if (ec != std::errc{} || ptr != nb.data() + nb.size() || h.nb_of_txs <= 0)
    throw Error(Errc::SchemaViolation, "GrpHdr/NbOfTxs must be a positive integer, got '" + nb + "'");
  const auto sum = xml::require_text(node, kDisplay, "CtrlSum");
  try {
    h.ctrl_sum = Decimal::parse(sum);
  } catch (const Error&) {
    throw Error(Errc::SchemaViolation, "invalid GrpHdr/CtrlSum '" + sum + "'");
  }
  h.instructing_agent = read_agent(node, kDisplay, "InstgAgt", h.extras);
  h.instructed_agent = read_agent(node, kDisplay, "InstdAgt", h.extras);
  return h;
}

inline CreditTransferTxInfo read_transaction(const xml::Tree& node) {
  static const std::string kDisplay = "CdtTrfTxInf";
  CreditTransferTxInfo tx;
  collect_unknown(node, {"PmtId", "IntrBkSttlmAmt", "Dbtr", "DbtrAcct", "DbtrAgt", "CdtrAgt", "Cdtr", "CdtrAcct"}, tx.extras, "",
                  /*allow_intermediaries=*/true);
  const auto& pmt = xml::require(node, kDisplay, "PmtId");
  collect_unknown(pmt, {"EndToEndId"}, tx.extras, "PmtId");
  tx.end_to_end_id = require_id(node, kDisplay, "PmtId/EndToEndId");
  tx.settlement_amount = read_amount(xml::require(node, kDisplay, "IntrBkSttlmAmt"), kDisplay + "/IntrBkSttlmAmt");

  for (std::size_t n = 1;; ++n) {
    const std::string name = "IntrmyAgt" + std::to_string(n);
    if (xml::child(node, name) == nullptr) break;
    tx.intermediary_agents.push_back(read_agent(node, kDisplay, name, tx.extras));
  }
  std::size_t declared = 0;
  for (const auto& [k, v] : node)
    if (!xml::is_markup_key(k) && is_intermediary_name(xml::local_name(k))) ++declared;
  if (declared != tx.intermediary_agents.size())
    throw Error(Errc::SchemaViolation, "CdtTrfTxInf/IntrmyAgtN elements must be numbered contiguously from 1");

  tx.debtor_name = read_name(node, kDisplay, "Dbtr", tx.extras);
  tx.debtor_account = read_account(node, kDisplay, "DbtrAcct", tx.extras);
  tx.debtor_agent = read_agent(node, kDisplay, "DbtrAgt", tx.extras);
  tx.creditor_agent = read_agent(node, kDisplay, "CdtrAgt", tx.extras);
  tx.creditor_name = read_name(node, kDisplay, "Cdtr", tx.extras);
  tx.creditor_account = read_account(node, kDisplay, "CdtrAcct", tx.extras);
  return tx;
}

}  // namespace detail

/// Exact-decimal control-sum and transaction-count check.
inline bool validate_control_sum(const Pacs008Message& msg) {
  if (msg.group_header.nb_of_txs < 0 || static_cast<std::size_t>(msg.group_header.nb_of_txs) != msg.transactions.size()) return false;
  Decimal sum;
  for (const auto& tx : msg.transactions) sum += tx.settlement_amount.value;
  return sum == msg.group_header.ctrl_sum;
}

/// Recomputes NbOfTxs and CtrlSum from the transaction list.
inline void refresh_group_totals(Pacs008Message& msg) {
  Decimal sum;
  for (const auto& tx : msg.transactions) sum += tx.settlement_amount.value;
  msg.group_header.nb_of_txs = static_cast<int>(msg.transactions.size());
  msg.group_header.ctrl_sum = sum;
}

enum class ParseMode {
  Strict,   // enforce NbOfTxs and CtrlSum
  Lenient,  // structure only; caller checks totals itself
};

inline Pacs008Message parse_pacs008(std::string_view bytes, ParseMode mode = ParseMode::Strict) {
  const auto tree = xml::read(bytes);
  const xml::Tree* document = nullptr;
  for (const auto& [k, v] : tree) {
    if (xml::is_markup_key(k)) continue;
    if (document != nullptr || xml::local_name(k) != "Document")
      throw Error(Errc::SchemaViolation, "expected a single Document root element, found '" + k + "'");
    document = &v;
  }
  if (document == nullptr) throw Error(Errc::SchemaViolation, "missing required element Document");

  Pacs008Message msg;
  msg.xml_namespace = xml::attribute(*document, "xmlns");
  const auto& root = xml::require(*document, "Document", "FIToFICstmrCdtTrf");
  detail::collect_unknown(root, {"GrpHdr", "CdtTrfTxInf"}, msg.extras, "");
  msg.group_header = detail::read_group_header(root);
  for (const auto& [k, v] : root)
    if (!xml::is_markup_key(k) && xml::local_name(k) == "CdtTrfTxInf") msg.transactions.push_back(detail::read_transaction(v));
  if (msg.transactions.empty()) throw Error(Errc::SchemaViolation, "missing required element FIToFICstmrCdtTrf/CdtTrfTxInf");

  if (mode == ParseMode::Lenient) return msg;
  if (static_cast<std::size_t>(msg.group_header.nb_of_txs) != msg.transactions.size())
    throw Error(Errc::InvariantViolation, "GrpHdr/NbOfTxs " + std::to_string(msg.group_header.nb_of_txs) + " but message has " +
                                              std::to_string(msg.transactions.size()) + " CdtTrfTxInf blocks");
  if (!validate_control_sum(msg))
    throw Error(Errc::InvariantViolation, "GrpHdr/CtrlSum " + msg.group_header.ctrl_sum.to_string() +
                                              " does not equal the sum of settlement amounts");
  return msg;
}

/// Canonical XML: fixed element order, UTF-8, no insignificant whitespace,
/// amounts at the currency's minor units.
inline std::string serialize_pacs008(const Pacs008Message& msg) {
  if (msg.transactions.empty()) throw Error(Errc::InvariantViolation, "message has no transactions");
  if (!validate_control_sum(msg)) throw Error(Errc::InvariantViolation, "NbOfTxs/CtrlSum inconsistent with transactions");
  const auto& h = msg.group_header;
  if (h.msg_id.empty() || h.msg_id.size() > kMaxIdLength) throw Error(Errc::InvariantViolation, "MsgId must be 1..35 characters");
  if (h.instructing_agent.empty() || h.instructed_agent.empty()) throw Error(Errc::InvariantViolation, "group header agents must be set");

  xml::Writer w;
  w.raw(xml::kDeclaration);
  if (msg.xml_namespace.empty())
    w.open("Document");
  else
    w.open("Document", "xmlns", msg.xml_namespace);
  w.open("FIToFICstmrCdtTrf");

  w.open("GrpHdr")
      .leaf("MsgId", h.msg_id)
      .leaf("CreDtTm", format_utc(h.creation_time))
      .leaf("NbOfTxs", std::to_string(h.nb_of_txs))
      .leaf("CtrlSum", h.ctrl_sum.to_string(detail::ctrl_sum_scale(msg)));
  detail::write_agent(w, "InstgAgt", h.instructing_agent, h.extras);
  detail::write_agent(w, "InstdAgt", h.instructed_agent, h.extras);
  detail::emit_extras(w, h.extras, "");
  w.close("GrpHdr");

  for (const auto& tx : msg.transactions) {
    if (tx.end_to_end_id.empty() || tx.end_to_end_id.size() > kMaxIdLength)
      throw Error(Errc::InvariantViolation, "EndToEndId must be 1..35 characters");
    if (tx.settlement_amount.value.signum() <= 0) throw Error(Errc::InvariantViolation, "settlement amount must be positive");
    w.open("CdtTrfTxInf");
    w.open("PmtId").leaf("EndToEndId", tx.end_to_end_id);
    detail::emit_extras(w, tx.extras, "PmtId");
    w.close("PmtId");
    w.leaf("IntrBkSttlmAmt", "Ccy", tx.settlement_amount.currency, tx.settlement_amount.value_text());
    for (std::size_t i = 0; i < tx.intermediary_agents.size(); ++i)
      detail::write_agent(w, "IntrmyAgt" + std::to_string(i + 1), tx.intermediary_agents[i], tx.extras);
    detail::write_party(w, "Dbtr", tx.debtor_name, tx.extras);
    detail::write_account(w, "DbtrAcct", tx.debtor_account, tx.extras);
    detail::write_agent(w, "DbtrAgt", tx.debtor_agent, tx.extras);
    detail::write_agent(w, "CdtrAgt", tx.creditor_agent, tx.extras);
    detail::write_party(w, "Cdtr", tx.creditor_name, tx.extras);
    detail::write_account(w, "CdtrAcct", tx.creditor_account, tx.extras);
    detail::emit_extras(w, tx.extras, "");
    w.close("CdtTrfTxInf");
  }
  detail::emit_extras(w, msg.extras, "");
  w.close("FIToFICstmrCdtTrf").close("Document");
  return w.take();
}

/// Mirrors the contract-side extraction: amount, debtor agent and account
/// from the transaction, next agent from GrpHdr/InstdAgt, and the input
/// bytes embedded verbatim.
inline DebtorInstruction extract_debtor_instruction(std::string_view bytes) {
  const auto msg = parse_pacs008(bytes);
  if (msg.transactions.size() != 1)
    throw Error(Errc::MultiTransactionUnsupported,
                "debtor instruction needs exactly one CdtTrfTxInf, message has " + std::to_string(msg.transactions.size()));
  const auto& tx = msg.transactions.front();
  return DebtorInstruction{
      .settlement_amount = tx.settlement_amount,
      .debtor_agent = tx.debtor_agent,
      .debtor_account = tx.debtor_account,
      .iso_message = std::string(bytes),
      .next_agent = msg.group_header.instructed_agent,
  };
}

/// Re-addresses a message for the next hop. Only the group header's
/// agents, MsgId and CreDtTm change.
inline Pacs008Message advance_message(const Pacs008Message& msg, const BicCode& from, const BicCode& to, const MessageStamp& stamp) {
  if (msg.group_header.instructed_agent != from)
    throw Error(Errc::HopMismatch,
                "message is instructed to " + msg.group_header.instructed_agent.str() + ", cannot be advanced by " + from.str());
  Pacs008Message next = msg;
  next.group_header.instructing_agent = from;
  next.group_header.instructed_agent = to;
  next.group_header.msg_id = stamp.msg_id;
  next.group_header.creation_time = stamp.creation_time;
  return next;
}

/// Human-readable structured dump used as the golden-fixture sidecar.
inline std::string dump_pacs008(const Pacs008Message& msg) {
  std::string out;
  auto line = [&out](const std::string& key, const std::string& value) { out += key + ": " + value + "\n"; };
  auto dump_extras = [&line](const std::string& prefix, const OpaqueElements& extras) {
    for (const auto& [path, fragments] : extras)
      for (const auto& f : fragments) line(prefix + "extra[" + path + "]", f);
  };
  const auto& h = msg.group_header;
  line("namespace", msg.xml_namespace);
  line("GrpHdr.MsgId", h.msg_id);
  line("GrpHdr.CreDtTm", format_utc(h.creation_time));
  line("GrpHdr.NbOfTxs", std::to_string(h.nb_of_txs));
  line("GrpHdr.CtrlSum", h.ctrl_sum.to_string(detail::ctrl_sum_scale(msg)));
  line("GrpHdr.InstgAgt", h.instructing_agent.str());
  line("GrpHdr.InstdAgt", h.instructed_agent.str());
  dump_extras("GrpHdr.", h.extras);
  for (std::size_t i = 0; i < msg.transactions.size(); ++i) {
    const auto& tx = msg.transactions[i];
    const std::string p = "CdtTrfTxInf[" + std::to_string(i) + "].";
    line(p + "EndToEndId", tx.end_to_end_id);
    line(p + "IntrBkSttlmAmt", tx.settlement_amount.to_string());
    for (std::size_t j = 0; j < tx.intermediary_agents.size(); ++j)
      line(p + "IntrmyAgt" + std::to_string(j + 1), tx.intermediary_agents[j].str());
    line(p + "Dbtr.Nm", tx.debtor_name);
    line(p + "DbtrAcct", tx.debtor_account);
    line(p + "DbtrAgt", tx.debtor_agent.str());
    line(p + "CdtrAgt", tx.creditor_agent.str());
    line(p + "Cdtr.Nm", tx.creditor_name);
    line(p + "CdtrAcct", tx.creditor_account);
    dump_extras(p, tx.extras);
  }
  dump_extras("", msg.extras);
  return out;
}

}  // namespace cbpr::iso20022
