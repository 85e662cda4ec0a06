// SPDX-License-Identifier: Apache-2.0
//
// iqcal - IQ mixer imbalance simulation and calibration
// Copyright (C) 2026 The iqcal Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

// Subcommand bodies shared by the CLI and the acceptance suite. Each returns
// the trace it would write; nothing here touches the filesystem.

#include "iqcal/scenario.hpp"
#include "iqcal/trace.hpp"

#include <functional>
#include <string>

namespace iqcal {

/// Receives non-fatal diagnostics such as rejected Kalman frames.
using WarningSink = std::function<void(const std::string&)>;

/// Calibrates the upconverter without noise, then lets its imbalance random-walk
/// with the pre-distortion frozen. Rows: step 0 (calibrated) .. drift.steps.
Trace cmd_drift(const ScenarioConfig& cfg);

/// Pure tone through the channel and the imbalanced downconverter (the
/// upconverter is taken as ideal and cfo as 0). One row per Kalman frame.
Trace cmd_cal_down(const ScenarioConfig& cfg, const WarningSink& warn = {});

/// Secant calibration of the upconverter read by a spectrum analyser after
/// the channel, power-averaged over upcal.average_records records.
Trace cmd_cal_up(const ScenarioConfig& cfg);

/// Joint calibration with cfg.joint.method. One row per secant measurement.
Trace cmd_cal_joint(const ScenarioConfig& cfg, const WarningSink& warn = {});

/// Dispatch by subcommand name (drift, cal-down, cal-up, cal-joint).
Trace run_command(const std::string& name, const ScenarioConfig& cfg, const WarningSink& warn = {});

} // namespace iqcal
