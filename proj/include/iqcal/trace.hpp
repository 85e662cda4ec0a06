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

// Trace files. Each subcommand has a fixed column schema; CSV and JSON-lines
// carry the same columns and the same resolved-config header.
//
// CSV layout:
//   # iqcal <command>
//   # config_hash = <16 hex digits>
//   # <section.key> = <value>      (one line per resolved entry)
//   <column>,<column>,...
//   <row>
//
// JSON-lines layout: a header object
//   {"iqcal":"<command>","config_hash":"...","config":{...}}
// followed by one object per row. Non-finite numbers are written as the
// strings "nan", "inf", "-inf".

#include "iqcal/scenario.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace iqcal {

enum class ColumnType { Integer, Real, Text };

struct Column {
    std::string_view name;
    ColumnType type;
};

using Cell = std::variant<std::int64_t, double, std::string>;
using Row = std::vector<Cell>;

/// Columns of the trace written by `command` (drift, cal-down, cal-up, cal-joint).
/// Throws std::invalid_argument for an unknown command.
std::span<const Column> trace_schema(std::string_view command);

struct Trace {
    std::string command;
    ConfigEntries config;
    std::vector<Row> rows;

    std::string hash() const { return config_hash(config); }
};

void write_trace(std::ostream& out, const Trace& trace, OutputFormat format);
std::string trace_to_string(const Trace& trace, OutputFormat format);

/// Detects the format from the first character. Throws std::runtime_error on
/// malformed input or a header whose hash does not match its config block.
Trace read_trace(std::istream& in);
Trace read_trace_string(std::string_view text);

/// Cell-by-cell equality with NaN == NaN and bitwise-identical doubles.
bool same_records(const Trace& a, const Trace& b);

} // namespace iqcal
