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

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cbpr {

enum class Errc {
  // codec
  MalformedXml,
  SchemaViolation,
  InvariantViolation,
  MultiTransactionUnsupported,
  HopMismatch,
  MissingReason,
  InvalidBic,
  InvalidAmount,
  InvalidCurrency,
  // ledger
  Unauthorized,
  DuplicateAccount,
  MissingCounterparty,
  AccountNotFound,
  CurrencyMismatch,
  NonPositiveAmount,
  WrongAgent,
  InsufficientFunds,
  ControlSumMismatch,
  InstructionMessageMismatch,
  MissingNostro,
  InsufficientNostroFunds,
  UnknownTransaction,
  AlreadyReturned,
  ReturnAmountMismatch,
  // relay
  UnknownAgent,
  MissingNostroRelationship,
  MissingRate,
  PathMismatch,
  // metering
  UnknownOperation,
  // scenario
  ParseError,
  ValidationError,
  CorruptTrail,
  Io,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::MalformedXml: return "MalformedXml";
    case Errc::SchemaViolation: return "SchemaViolation";
    case Errc::InvariantViolation: return "InvariantViolation";
    case Errc::MultiTransactionUnsupported: return "MultiTransactionUnsupported";
    case Errc::HopMismatch: return "HopMismatch";
    case Errc::MissingReason: return "MissingReason";
    case Errc::InvalidBic: return "InvalidBic";
    case Errc::InvalidAmount: return "InvalidAmount";
    case Errc::InvalidCurrency: return "InvalidCurrency";
    case Errc::Unauthorized: return "Unauthorized";
    case Errc::DuplicateAccount: return "DuplicateAccount";
    case Errc::MissingCounterparty: return "MissingCounterparty";
    case Errc::AccountNotFound: return "AccountNotFound";
    case Errc::CurrencyMismatch: return "CurrencyMismatch";
    case Errc::NonPositiveAmount: return "NonPositiveAmount";
    case Errc::WrongAgent: return "WrongAgent";
    case Errc::InsufficientFunds: return "InsufficientFunds";
    case Errc::ControlSumMismatch: return "ControlSumMismatch";
    case Errc::InstructionMessageMismatch: return "InstructionMessageMismatch";
    case Errc::MissingNostro: return "MissingNostro";
    case Errc::InsufficientNostroFunds: return "InsufficientNostroFunds";
    case Errc::UnknownTransaction: return "UnknownTransaction";
    case Errc::AlreadyReturned: return "AlreadyReturned";
    case Errc::ReturnAmountMismatch: return "ReturnAmountMismatch";
    case Errc::UnknownAgent: return "UnknownAgent";
    case Errc::MissingNostroRelationship: return "MissingNostroRelationship";
    case Errc::MissingRate: return "MissingRate";
    case Errc::PathMismatch: return "PathMismatch";
    case Errc::UnknownOperation: return "UnknownOperation";
    case Errc::ParseError: return "ParseError";
    case Errc::ValidationError: return "ValidationError";
    case Errc::CorruptTrail: return "CorruptTrail";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure in the library is reported as an Error carrying a code.
/// The message is prefixed with the code name so logs stay greppable.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  Errc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

/// Scenario validation collects every violation before throwing.
class ValidationErrors : public Error {
 public:
  explicit ValidationErrors(std::vector<std::string> violations)
      : Error(Errc::ValidationError, join(violations)),
        violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& items) {
    std::string out = std::to_string(items.size()) + " violation(s)";
    for (const auto& v : items) out += "\n  - " + v;
    return out;
  }

  std::vector<std::string> violations_;
};

}  // namespace cbpr
