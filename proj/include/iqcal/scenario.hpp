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

// Scenario files: flat "key = value" lines grouped in [section] blocks.
// Unknown keys, duplicates and malformed values are errors that carry the
// offending line number.

#include "iqcal/frontend.hpp"
#include "iqcal/jointcal.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace iqcal {

enum class OutputFormat { Csv, JsonLines };

std::string_view to_string(OutputFormat f) noexcept;
std::optional<OutputFormat> parse_format(std::string_view text) noexcept;

using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

struct ScenarioConfig {
    JointScenario joint;
    DriftProcess drift;
    std::size_t drift_steps = 200;
    std::size_t kalman_frames = 100; // frames logged by cal-down
    std::size_t average_records = 1; // records power-averaged per cal-up reading
    std::string output_path;         // empty: stdout
    OutputFormat format = OutputFormat::Csv;

    std::string source; // file name or "<string>", for messages
    std::map<std::string, int> key_lines; // "section.key" -> 1-based line

    /// Runs every scenario check and rethrows failures as ConfigError
    /// pointing at the line of the responsible key, when it was given.
    void validate() const;

    /// Every parameter after defaults and alternate spellings are resolved,
    /// in a fixed order. Sufficient to reproduce a run.
    ConfigEntries resolved() const;
};

/// Parses and validates. Throws ConfigError.
ScenarioConfig parse_config(std::string_view text, std::string source = "<string>");
ScenarioConfig load_config(const std::filesystem::path& path);

/// FNV-1a over the resolved entries, as 16 hex digits.
std::string config_hash(const ConfigEntries& entries);

/// Shortest text that parses back to the same double ("inf", "-inf", "nan" for non-finite).
std::string format_double(double v);
std::optional<double> parse_double(std::string_view text);

} // namespace iqcal
