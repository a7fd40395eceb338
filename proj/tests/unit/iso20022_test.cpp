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

#include <boost/multiprecision/cpp_int.hpp>
#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>

#include "support.hpp"

using namespace cbpr;
using namespace cbpr::iso20022;
namespace ct = cbpr::testing;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Error error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "no error thrown";
  return Error(Errc::Io, "none");
}

std::string fig1_xml() { return slurp(ct::fixture_path("tests/fixtures/pacs008/fig1_hop0.xml")); }

std::string replace_once(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  if (pos != std::string::npos) s.replace(pos, from.size(), to);
  return s;
}

}  // namespace

TEST(Pacs008Golden, FixturesParseToTheirSidecarDump) {
  std::size_t seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(ct::fixture_path("tests/fixtures/pacs008"))) {
    if (entry.path().extension() != ".xml") continue;
    ++seen;
    auto sidecar = entry.path();
    sidecar.replace_extension(".txt");
    const auto msg = parse_pacs008(slurp(entry.path()));
    EXPECT_EQ(dump_pacs008(msg), slurp(sidecar)) << entry.path();
    const auto canonical = serialize_pacs008(msg);
    EXPECT_EQ(parse_pacs008(canonical), msg) << entry.path();
    EXPECT_EQ(serialize_pacs008(parse_pacs008(canonical)), canonical) << entry.path();
  }
  EXPECT_GE(seen, 3u);
}

TEST(Pacs008Golden, CanonicalFormOfFigureOneMessage) {
  const auto canonical = serialize_pacs008(parse_pacs008(fig1_xml()));
  EXPECT_EQ(canonical.rfind("<?xml version=\"1.0\" encoding=\"UTF-8\"?><Document xmlns=\"urn:iso:std:iso:20022:tech:xsd:pacs.008.001.08\">", 0), 0u);
  EXPECT_EQ(canonical.find('\n'), std::string::npos);
  EXPECT_NE(canonical.find("<CtrlSum>250.00</CtrlSum>"), std::string::npos);
  EXPECT_NE(canonical.find("<IntrBkSttlmAmt Ccy=\"USD\">250.00</IntrBkSttlmAmt>"), std::string::npos);
}

TEST(Pacs008Codec, RoundTripOnRandomMessages) {
  std::mt19937_64 rng(20240101);
  for (int i = 0; i < 250; ++i) {
    const auto msg = ct::random_message(rng);
    const auto bytes = serialize_pacs008(msg);
    const auto parsed = parse_pacs008(bytes);
    ASSERT_EQ(parsed, msg) << bytes;
    ASSERT_EQ(serialize_pacs008(parsed), bytes);
  }
}

TEST(Pacs008Codec, WhitespaceAndAmountSpellingDoNotChangeCanonicalBytes) {
  const auto canonical = serialize_pacs008(parse_pacs008(fig1_xml()));
  auto variant = replace_once(fig1_xml(), "<CtrlSum>250.00</CtrlSum>", "<CtrlSum>250</CtrlSum>");
  variant = replace_once(variant, ">250.00</IntrBkSttlmAmt>", ">\n   250.0  </IntrBkSttlmAmt>");
  variant = replace_once(variant, "<Nm>Alice Example</Nm>", "<Nm>  Alice Example\n</Nm>");
  EXPECT_EQ(serialize_pacs008(parse_pacs008(variant)), canonical);
}

TEST(Pacs008Codec, NamespacePrefixesAreAccepted) {
  std::string prefixed = std::regex_replace(fig1_xml(), std::regex("<(/?)([A-Za-z])"), "<$1p:$2");
  prefixed = replace_once(prefixed, "<p:Document xmlns=", "<p:Document xmlns:p=");
  const auto msg = parse_pacs008(prefixed);
  EXPECT_EQ(msg.transactions.front().end_to_end_id, "E2E-FIG1-0001");
  EXPECT_EQ(msg.group_header.instructed_agent, BicCode("BBBBDEFF"));
}

TEST(Pacs008Codec, UnknownElementsSurviveRoundTrip) {
  const auto msg = parse_pacs008(slurp(ct::fixture_path("tests/fixtures/pacs008/settlement_info_extras.xml")));
  const auto bytes = serialize_pacs008(msg);
  EXPECT_NE(bytes.find("<SttlmInf><SttlmMtd>INDA</SttlmMtd></SttlmInf>"), std::string::npos);
  EXPECT_NE(bytes.find("<ChrgBr>SHAR</ChrgBr>"), std::string::npos);
  EXPECT_NE(bytes.find("<PmtId><EndToEndId>INV 2024/03 &amp; co</EndToEndId><InstrId>INSTR-1</InstrId></PmtId>"), std::string::npos);
  EXPECT_EQ(parse_pacs008(bytes), msg);
}

TEST(Pacs008Extraction, ReturnsDebtorInstructionFields) {
  const auto xml = fig1_xml();
  const auto instr = extract_debtor_instruction(xml);
  EXPECT_EQ(instr.settlement_amount, Amount::parse("USD", "250.00"));
  EXPECT_EQ(instr.debtor_agent, BicCode("AAAAUS33"));
  EXPECT_EQ(instr.debtor_account, "ACC-ALICE");
  EXPECT_EQ(instr.next_agent, BicCode("BBBBDEFF"));
  EXPECT_EQ(instr.iso_message, xml);
}

TEST(Pacs008Extraction, MatchesGeneratorOnRandomSingleTransactions) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 100; ++i) {
    const auto msg = ct::random_message(rng, 1);
    const auto bytes = serialize_pacs008(msg);
    const auto instr = extract_debtor_instruction(bytes);
    const auto& tx = msg.transactions.front();
    EXPECT_EQ(instr.settlement_amount, tx.settlement_amount);
    EXPECT_EQ(instr.debtor_agent, tx.debtor_agent);
    EXPECT_EQ(instr.debtor_account, tx.debtor_account);
    EXPECT_EQ(instr.next_agent, msg.group_header.instructed_agent);
    EXPECT_EQ(instr.iso_message, bytes);
  }
}

TEST(Pacs008Extraction, RejectsBatches) {
  const auto xml = slurp(ct::fixture_path("tests/fixtures/pacs008/batch_three_hops.xml"));
  EXPECT_EQ(error_of([&] { extract_debtor_instruction(xml); }).code(), Errc::MultiTransactionUnsupported);
}

// Oracle: exact rational sum of the amount strings, independent of Decimal.
TEST(Pacs008ControlSum, AgreesWithRationalOracle) {
  const auto rational = [](const std::string& text) { return ct::rational_of(text); };
  std::mt19937_64 rng(5);
  int accepted = 0;
  int rejected = 0;
  for (int i = 0; i < 300; ++i) {
    auto msg = ct::random_message(rng, 5);
    if (i % 2 == 1) {
      const Decimal delta(static_cast<long long>(rng() % 3) - 1, static_cast<int>(rng() % 4));
      msg.group_header.ctrl_sum += delta;
    }
    boost::multiprecision::cpp_rational sum = 0;
    for (const auto& tx : msg.transactions) sum += rational(tx.settlement_amount.value_text());
    const bool oracle = sum == rational(msg.group_header.ctrl_sum.to_string());
    EXPECT_EQ(validate_control_sum(msg), oracle);
    (oracle ? accepted : rejected) += 1;
  }
  EXPECT_GT(accepted, 100);
  EXPECT_GT(rejected, 100);
}

TEST(Pacs008ControlSum, MismatchIsAnInvariantViolation) {
  const auto bad = replace_once(fig1_xml(), "<CtrlSum>250.00</CtrlSum>", "<CtrlSum>250.01</CtrlSum>");
  EXPECT_EQ(error_of([&] { parse_pacs008(bad); }).code(), Errc::InvariantViolation);
  EXPECT_NO_THROW(parse_pacs008(bad, ParseMode::Lenient));
  const auto count = replace_once(fig1_xml(), "<NbOfTxs>1</NbOfTxs>", "<NbOfTxs>2</NbOfTxs>");
  EXPECT_EQ(error_of([&] { parse_pacs008(count); }).code(), Errc::InvariantViolation);
}

TEST(Pacs008Advance, RewritesOnlyTheGroupHeaderRouting) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const auto msg = ct::random_message(rng);
    const auto to = ct::random_bic(rng);
    const MessageStamp stamp{"NEXT-" + std::to_string(i), kSimEpoch + std::chrono::seconds(i)};
    const auto next = advance_message(msg, msg.group_header.instructed_agent, to, stamp);
    EXPECT_EQ(next.transactions, msg.transactions);
    EXPECT_EQ(next.group_header.ctrl_sum, msg.group_header.ctrl_sum);
    EXPECT_EQ(next.group_header.instructing_agent, msg.group_header.instructed_agent);
    EXPECT_EQ(next.group_header.instructed_agent, to);
    EXPECT_EQ(next.group_header.msg_id, stamp.msg_id);
    EXPECT_TRUE(validate_control_sum(next));
  }
}

TEST(Pacs008Advance, WrongHolderIsHopMismatch) {
  const auto msg = parse_pacs008(fig1_xml());
  EXPECT_EQ(error_of([&] { advance_message(msg, BicCode("CCCCGB2L"), BicCode("DDDDFRPP"), {"X", kSimEpoch}); }).code(), Errc::HopMismatch);
}

TEST(Pacs008Errors, MalformedXmlReportsLine) {
  const auto e = error_of([] { parse_pacs008("<?xml version=\"1.0\"?>\n<Document>\n<FIToFICstmrCdtTrf>\n</Document>"); });
  EXPECT_EQ(e.code(), Errc::MalformedXml);
  EXPECT_NE(std::string(e.what()).find("line "), std::string::npos) << e.what();
}

TEST(Pacs008Errors, MissingElementNamesItsPath) {
  const auto bad = replace_once(fig1_xml(), "<DbtrAcct><Id><Othr><Id>ACC-ALICE</Id></Othr></Id></DbtrAcct>", "");
  const auto e = error_of([&] { parse_pacs008(bad); });
  EXPECT_EQ(e.code(), Errc::SchemaViolation);
  EXPECT_NE(std::string(e.what()).find("CdtTrfTxInf/DbtrAcct"), std::string::npos) << e.what();
}

TEST(Pacs008Errors, SchemaViolations) {
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"<IntrBkSttlmAmt Ccy=\"USD\">", "<IntrBkSttlmAmt>"},
      {">250.00</IntrBkSttlmAmt>", ">250.001</IntrBkSttlmAmt>"},
      {">250.00</IntrBkSttlmAmt>", ">2.5e2</IntrBkSttlmAmt>"},
      {"<BICFI>AAAAUS33</BICFI></FinInstnId></DbtrAgt>", "<BICFI>nope</BICFI></FinInstnId></DbtrAgt>"},
      {"<CreDtTm>2024-01-01T00:00:03Z</CreDtTm>", "<CreDtTm>yesterday</CreDtTm>"},
      {"<NbOfTxs>1</NbOfTxs>", "<NbOfTxs>one</NbOfTxs>"},
      {"<EndToEndId>E2E-FIG1-0001</EndToEndId>", "<EndToEndId>" + std::string(36, 'x') + "</EndToEndId>"},
      {"<Document xmlns", "<Other xmlns"},
  };
  for (const auto& [from, to] : cases) {
    auto bad = replace_once(fig1_xml(), from, to);
    if (to == "<Other xmlns") bad = replace_once(bad, "</Document>", "</Other>");
    EXPECT_EQ(error_of([&] { parse_pacs008(bad); }).code(), Errc::SchemaViolation) << to;
  }
}

TEST(Pacs008Errors, IntermediariesMustBeNumberedContiguously) {
  auto bad = replace_once(fig1_xml(), "<IntrmyAgt1>", "<IntrmyAgt2>");
  bad = replace_once(bad, "</IntrmyAgt1>", "</IntrmyAgt2>");
  const auto e = error_of([&] { parse_pacs008(bad); });
  EXPECT_EQ(e.code(), Errc::SchemaViolation);
  EXPECT_NE(std::string(e.what()).find("IntrmyAgt"), std::string::npos);
}

TEST(Pacs008Errors, NonPositiveAmountIsInvariantViolation) {
  auto bad = replace_once(fig1_xml(), ">250.00</IntrBkSttlmAmt>", ">0.00</IntrBkSttlmAmt>");
  bad = replace_once(bad, "<CtrlSum>250.00</CtrlSum>", "<CtrlSum>0.00</CtrlSum>");
  EXPECT_EQ(error_of([&] { parse_pacs008(bad); }).code(), Errc::InvariantViolation);
}

TEST(Pacs008Errors, SerializeRefusesInconsistentMessages) {
  auto msg = parse_pacs008(fig1_xml());
  msg.group_header.ctrl_sum = Decimal::parse("1");
  EXPECT_EQ(error_of([&] { serialize_pacs008(msg); }).code(), Errc::InvariantViolation);
  msg.transactions.clear();
  EXPECT_EQ(error_of([&] { serialize_pacs008(msg); }).code(), Errc::InvariantViolation);
}

TEST(Pacs002, BuildAndRoundTrip) {
  const auto original = parse_pacs008(fig1_xml());
  const auto ok = build_pacs002(original, PaymentStatus::ACSC, std::nullopt);
  EXPECT_EQ(ok.original_msg_id, "MSG-000001");
  EXPECT_EQ(ok.original_end_to_end_id, "E2E-FIG1-0001");
  const MessageStamp stamp{"STS-1", kSimEpoch};
  EXPECT_EQ(parse_pacs002(serialize_pacs002(ok, stamp)), ok);
  const auto rj = build_pacs002(original, PaymentStatus::RJCT, "InsufficientFunds: ACC <x> & y");
  EXPECT_EQ(parse_pacs002(serialize_pacs002(rj, stamp)), rj);
}

TEST(Pacs002, RejectionNeedsReason) {
  const auto original = parse_pacs008(fig1_xml());
  EXPECT_EQ(error_of([&] { build_pacs002(original, PaymentStatus::RJCT, std::nullopt); }).code(), Errc::MissingReason);
  EXPECT_EQ(error_of([&] { build_pacs002(original, PaymentStatus::RJCT, ""); }).code(), Errc::MissingReason);
}

TEST(Pacs004, BuildAndRoundTrip) {
  const auto original = parse_pacs008(fig1_xml());
  const auto ret = build_pacs004(original, "nostro shortfall", BicCode("BBBBDEFF"), BicCode("AAAAUS33"));
  EXPECT_EQ(ret.returned_amount, Amount::parse("USD", "250.00"));
  EXPECT_EQ(ret.original_end_to_end_id, "E2E-FIG1-0001");
  EXPECT_EQ(parse_pacs004(serialize_pacs004(ret, {"RTR-1", kSimEpoch})), ret);
}

TEST(Pacs004, BatchesAreRejected) {
  const auto batch = parse_pacs008(slurp(ct::fixture_path("tests/fixtures/pacs008/batch_three_hops.xml")));
  EXPECT_EQ(error_of([&] { build_pacs004(batch, "x", BicCode("BANKAEAD"), BicCode("BANKBHBM")); }).code(), Errc::MultiTransactionUnsupported);
}
