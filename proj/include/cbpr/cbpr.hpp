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

// Umbrella header.
#include "cbpr/bic.hpp"
#include "cbpr/decimal.hpp"
#include "cbpr/digest.hpp"
#include "cbpr/error.hpp"
#include "cbpr/iso20022/pacs008.hpp"
#include "cbpr/iso20022/reports.hpp"
#include "cbpr/ledger/ledger.hpp"
#include "cbpr/ledger/snapshot.hpp"
#include "cbpr/metering/metering.hpp"
#include "cbpr/money.hpp"
#include "cbpr/relay/relay.hpp"
#include "cbpr/scenario/audit.hpp"
#include "cbpr/scenario/config.hpp"
#include "cbpr/scenario/runner.hpp"
#include "cbpr/sim_time.hpp"
