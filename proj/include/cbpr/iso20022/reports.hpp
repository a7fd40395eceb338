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

#include <optional>
#include <string>
#include <string_view>

#include "cbpr/error.hpp"
#include "cbpr/iso20022/pacs008.hpp"
#include "cbpr/iso20022/types.hpp"
#include "cbpr/iso20022/xml.hpp"

// Status reports (pacs.002) and payment returns (pacs.004). Only the
// fields the simulator needs are carried; the element layout follows the
// ISO names but is a minimal subset.
namespace cbpr::iso20022 {

/// References the original message and its first transaction.
inline Pacs002Report build_pacs002(const Pacs008Message& original, PaymentStatus status, std::optional<std::string> reason) {
  if (status == PaymentStatus::RJCT && (!reason || reason->empty()))
    throw Error(Errc::MissingReason, "RJCT status report requires a reason");
  if (original.transactions.empty()) throw Error(Errc::InvariantViolation, "original message has no transactions");
  return Pacs002Report{
      .original_msg_id = original.group_header.msg_id,
      .original_end_to_end_id = original.transactions.front().end_to_end_id,
      .status_code = status,
      .reason = std::move(reason),
  };
}

inline Pacs004Return build_pacs004(const Pacs008Message& original, std::string reason, const BicCode& returning_agent,
                                   const BicCode& next_agent) {
  if (original.transactions.size() != 1)
    throw Error(Errc::MultiTransactionUnsupported,
                "returns are issued per transaction, original has " + std::to_string(original.transactions.size()));
  const auto& tx = original.transactions.front();
  return Pacs004Return{
      .original_msg_id = original.group_header.msg_id,
      .original_end_to_end_id = tx.end_to_end_id,
      .returned_amount = tx.settlement_amount,
      .return_reason = std::move(reason),
      .returning_agent = returning_agent,
      .next_agent = next_agent,
  };
}

inline std::string serialize_pacs002(const Pacs002Report& report, const MessageStamp& stamp) {
  if (report.status_code == PaymentStatus::RJCT && (!report.reason || report.reason->empty()))
    throw Error(Errc::MissingReason, "RJCT status report requires a reason");
  xml::Writer w;
  w.raw(xml::kDeclaration).open("Document", "xmlns", kPacs002Namespace).open("FIToFIPmtStsRpt");
  w.open("GrpHdr").leaf("MsgId", stamp.msg_id).leaf("CreDtTm", format_utc(stamp.creation_time)).close("GrpHdr");
  w.open("OrgnlGrpInfAndSts").leaf("OrgnlMsgId", report.original_msg_id).leaf("OrgnlMsgNmId", "pacs.008.001.08").close("OrgnlGrpInfAndSts");
  w.open("TxInfAndSts").leaf("OrgnlEndToEndId", report.original_end_to_end_id).leaf("TxSts", to_string(report.status_code));
  if (report.reason) w.open("StsRsnInf").leaf("AddtlInf", *report.reason).close("StsRsnInf");
  w.close("TxInfAndSts").close("FIToFIPmtStsRpt").close("Document");
  return w.take();
}

inline Pacs002Report parse_pacs002(std::string_view bytes) {
  const auto tree = xml::read(bytes);
  const auto& root = xml::require(tree, "", "Document/FIToFIPmtStsRpt");
  const std::string base = "FIToFIPmtStsRpt";
  Pacs002Report r;
  r.original_msg_id = xml::require_text(root, base, "OrgnlGrpInfAndSts/OrgnlMsgId");
  r.original_end_to_end_id = xml::require_text(root, base, "TxInfAndSts/OrgnlEndToEndId");
  const auto status = xml::require_text(root, base, "TxInfAndSts/TxSts");
  if (status == "ACSC")
    r.status_code = PaymentStatus::ACSC;
  else if (status == "RJCT")
    r.status_code = PaymentStatus::RJCT;
  else
    throw Error(Errc::SchemaViolation, "unsupported TxSts '" + status + "'");
  if (const auto* info = xml::child(xml::require(root, base, "TxInfAndSts"), "StsRsnInf"))
    r.reason = xml::require_text(*info, base + "/TxInfAndSts/StsRsnInf", "AddtlInf");
  if (r.status_code == PaymentStatus::RJCT && (!r.reason || r.reason->empty()))
    throw Error(Errc::MissingReason, "RJCT status report requires a reason");
  return r;
}

inline std::string serialize_pacs004(const Pacs004Return& ret, const MessageStamp& stamp) {
  xml::Writer w;
  w.raw(xml::kDeclaration).open("Document", "xmlns", kPacs004Namespace).open("PmtRtr");
  w.open("GrpHdr").leaf("MsgId", stamp.msg_id).leaf("CreDtTm", format_utc(stamp.creation_time)).leaf("NbOfTxs", "1");
  detail::write_agent(w, "InstgAgt", ret.returning_agent, {});
  detail::write_agent(w, "InstdAgt", ret.next_agent, {});
  w.close("GrpHdr");
  w.open("TxInf");
  w.open("OrgnlGrpInf").leaf("OrgnlMsgId", ret.original_msg_id).leaf("OrgnlMsgNmId", "pacs.008.001.08").close("OrgnlGrpInf");
  w.leaf("OrgnlEndToEndId", ret.original_end_to_end_id);
  w.leaf("RtrdIntrBkSttlmAmt", "Ccy", ret.returned_amount.currency, ret.returned_amount.value_text());
  w.open("RtrRsnInf").leaf("AddtlInf", ret.return_reason).close("RtrRsnInf");
  w.close("TxInf").close("PmtRtr").close("Document");
  return w.take();
}

inline Pacs004Return parse_pacs004(std::string_view bytes) {
  const auto tree = xml::read(bytes);
  const auto& root = xml::require(tree, "", "Document/PmtRtr");
  const std::string base = "PmtRtr";
  const auto& hdr = xml::require(root, base, "GrpHdr");
  const auto& tx = xml::require(root, base, "TxInf");
  OpaqueElements ignored;
  Pacs004Return r;
  r.returning_agent = detail::read_agent(hdr, base + "/GrpHdr", "InstgAgt", ignored);
  r.next_agent = detail::read_agent(hdr, base + "/GrpHdr", "InstdAgt", ignored);
  r.original_msg_id = xml::require_text(tx, base + "/TxInf", "OrgnlGrpInf/OrgnlMsgId");
  r.original_end_to_end_id = xml::require_text(tx, base + "/TxInf", "OrgnlEndToEndId");
  r.returned_amount = detail::read_amount(xml::require(tx, base + "/TxInf", "RtrdIntrBkSttlmAmt"), base + "/TxInf/RtrdIntrBkSttlmAmt");
  r.return_reason = xml::require_text(tx, base + "/TxInf", "RtrRsnInf/AddtlInf");
  return r;
}

}  // namespace cbpr::iso20022
