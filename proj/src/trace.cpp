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

#include "iqcal/trace.hpp"

#include <json.hpp>

#include <array>
#include <charconv>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace iqcal {

namespace {

using json = nlohmann::ordered_json;

constexpr std::array drift_cols = {
    Column{"step", ColumnType::Integer},
    Column{"gain", ColumnType::Real},
    Column{"phase_deg", ColumnType::Real},
    Column{"ilr_true_db", ColumnType::Real},
};

constexpr std::array cal_down_cols = {
    Column{"frame", ColumnType::Integer},      Column{"ilr_db", ColumnType::Real},
    Column{"k_re", ColumnType::Real},          Column{"k_im", ColumnType::Real},
    Column{"var_filtered", ColumnType::Real},  Column{"gain", ColumnType::Real},
    Column{"phase_deg", ColumnType::Real},     Column{"accepted", ColumnType::Integer},
};

// shared by cal-up and cal-joint; k_* are nan where no filter ran
constexpr std::array cal_cols = {
    Column{"iteration", ColumnType::Integer},  Column{"alpha_hat", ColumnType::Real},
    Column{"beta_hat", ColumnType::Real},      Column{"ilr_down_db", ColumnType::Real},
    Column{"ilr_true_db", ColumnType::Real},   Column{"method", ColumnType::Text},
    Column{"k_blue_re", ColumnType::Real},     Column{"k_blue_im", ColumnType::Real},
    Column{"k_red_re", ColumnType::Real},      Column{"k_red_im", ColumnType::Real},
    Column{"rejected_frames", ColumnType::Integer},
};

[[noreturn]] void fail(const std::string& msg, std::size_t line = 0)
{
    throw std::runtime_error(line > 0 ? "trace line " + std::to_string(line) + ": " + msg : "trace: " + msg);
}

std::string cell_text(const Cell& c)
{
    if (const auto* i = std::get_if<std::int64_t>(&c)) {
        return std::to_string(*i);
    }
    if (const auto* d = std::get_if<double>(&c)) {
        return format_double(*d);
    }
    return std::get<std::string>(c);
}

void check_row(std::span<const Column> cols, const Row& row)
{
    if (row.size() != cols.size()) {
        throw std::invalid_argument("trace row has " + std::to_string(row.size()) + " cells, schema has " +
                                    std::to_string(cols.size()));
    }
    for (std::size_t i = 0; i < cols.size(); ++i) {
        const bool ok = (cols[i].type == ColumnType::Integer && std::holds_alternative<std::int64_t>(row[i])) ||
                        (cols[i].type == ColumnType::Real && std::holds_alternative<double>(row[i])) ||
                        (cols[i].type == ColumnType::Text && std::holds_alternative<std::string>(row[i]));
        if (!ok) {
            throw std::invalid_argument("trace cell '" + std::string(cols[i].name) + "' has the wrong type");
        }
    }
}

Cell parse_cell(const Column& col, std::string_view text, std::size_t line)
{
    switch (col.type) {
    case ColumnType::Integer: {
        std::int64_t v = 0;
        const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
        if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
            fail("bad integer '" + std::string(text) + "' in column " + std::string(col.name), line);
        }
        return v;
    }
    case ColumnType::Real: {
        const auto v = parse_double(text);
        if (!v) {
            fail("bad number '" + std::string(text) + "' in column " + std::string(col.name), line);
        }
        return *v;
    }
    case ColumnType::Text:
        return std::string(text);
    }
    fail("unknown column type", line);
}

void write_csv(std::ostream& out, const Trace& t, std::span<const Column> cols)
{
    out << "# iqcal " << t.command << '\n';
    out << "# config_hash = " << t.hash() << '\n';
    for (const auto& [k, v] : t.config) {
        out << "# " << k << " = " << v << '\n';
    }
    for (std::size_t i = 0; i < cols.size(); ++i) {
        out << (i ? "," : "") << cols[i].name;
    }
    out << '\n';
    for (const auto& row : t.rows) {
        check_row(cols, row);
        for (std::size_t i = 0; i < row.size(); ++i) {
            const auto s = cell_text(row[i]);
            if (s.find_first_of(",\n\r\"") != std::string::npos) {
                throw std::invalid_argument("trace text cell contains a CSV delimiter: " + s);
            }
            out << (i ? "," : "") << s;
        }
        out << '\n';
    }
}

json cell_json(const Cell& c)
{
    if (const auto* i = std::get_if<std::int64_t>(&c)) {
        return *i;
    }
    if (const auto* d = std::get_if<double>(&c)) {
        if (std::isfinite(*d)) {
            return *d;
        }
        return format_double(*d);
    }
    return std::get<std::string>(c);
}

void write_jsonl(std::ostream& out, const Trace& t, std::span<const Column> cols)
{
    json head;
    head["iqcal"] = t.command;
    head["config_hash"] = t.hash();
    json cfg = json::object();
    for (const auto& [k, v] : t.config) {
        cfg[k] = v;
    }
    head["config"] = std::move(cfg);
    out << head.dump() << '\n';
    for (const auto& row : t.rows) {
        check_row(cols, row);
        json obj = json::object();
        for (std::size_t i = 0; i < cols.size(); ++i) {
            obj[std::string(cols[i].name)] = cell_json(row[i]);
        }
        out << obj.dump() << '\n';
    }
}

Cell json_cell(const Column& col, const json& v, std::size_t line)
{
    switch (col.type) {
    case ColumnType::Integer:
        if (!v.is_number_integer()) {
            fail("column " + std::string(col.name) + " must be an integer", line);
        }
        return v.get<std::int64_t>();
    case ColumnType::Real:
        if (v.is_number()) {
            return v.get<double>();
        }
        if (v.is_string()) {
            return parse_cell(col, v.get<std::string>(), line);
        }
        fail("column " + std::string(col.name) + " must be a number", line);
    case ColumnType::Text:
        if (!v.is_string()) {
            fail("column " + std::string(col.name) + " must be a string", line);
        }
        return v.get<std::string>();
    }
    fail("unknown column type", line);
}

void check_hash(const Trace& t, const std::string& recorded)
{
    if (t.hash() != recorded) {
        fail("config_hash " + recorded + " does not match the config block (" + t.hash() + ")");
    }
}

Trace read_jsonl(std::istream& in)
{
    Trace t;
    std::string line;
    std::size_t line_no = 0;
    std::span<const Column> cols;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            fail(e.what(), line_no);
        }
        if (line_no == 1) {
            if (!obj.contains("iqcal") || !obj.contains("config") || !obj.contains("config_hash")) {
                fail("missing header object", line_no);
            }
            t.command = obj["iqcal"].get<std::string>();
            cols = trace_schema(t.command);
            for (const auto& [k, v] : obj["config"].items()) {
                t.config.emplace_back(k, v.get<std::string>());
            }
            check_hash(t, obj["config_hash"].get<std::string>());
            continue;
        }
        if (obj.size() != cols.size()) {
            fail("row has " + std::to_string(obj.size()) + " fields", line_no);
        }
        Row row;
        for (const auto& col : cols) {
            const auto it = obj.find(std::string(col.name));
            if (it == obj.end()) {
                fail("missing column " + std::string(col.name), line_no);
            }
            row.push_back(json_cell(col, *it, line_no));
        }
        t.rows.push_back(std::move(row));
    }
    if (t.command.empty()) {
        fail("empty input");
    }
    return t;
}

Trace read_csv(std::istream& in)
{
    Trace t;
    std::string line;
    std::size_t line_no = 0;
    std::string recorded_hash;
    std::span<const Column> cols;
    bool have_columns = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        if (line.rfind("# ", 0) == 0) {
            if (have_columns) {
                fail("comment after the column header", line_no);
            }
            const std::string_view body = std::string_view(line).substr(2);
            if (line_no == 1) {
                if (body.rfind("iqcal ", 0) != 0) {
                    fail("first line must be '# iqcal <command>'", line_no);
                }
                t.command = std::string(body.substr(6));
                cols = trace_schema(t.command);
                continue;
            }
            const auto eq = body.find(" = ");
            if (eq == std::string_view::npos) {
                fail("malformed header line", line_no);
            }
            const std::string key(body.substr(0, eq));
            const std::string value(body.substr(eq + 3));
            if (key == "config_hash") {
                recorded_hash = value;
            } else {
                t.config.emplace_back(key, value);
            }
            continue;
        }
        if (t.command.empty()) {
            fail("missing '# iqcal <command>' header", line_no);
        }
        std::vector<std::string_view> fields;
        std::string_view rest(line);
        while (true) {
            const auto comma = rest.find(',');
            fields.push_back(rest.substr(0, comma));
            if (comma == std::string_view::npos) {
                break;
            }
            rest.remove_prefix(comma + 1);
        }
        if (fields.size() != cols.size()) {
            fail("expected " + std::to_string(cols.size()) + " fields, found " + std::to_string(fields.size()), line_no);
        }
        if (!have_columns) {
            for (std::size_t i = 0; i < cols.size(); ++i) {
                if (fields[i] != cols[i].name) {
                    fail("column " + std::to_string(i) + " should be " + std::string(cols[i].name), line_no);
                }
            }
            have_columns = true;
            continue;
        }
        Row row;
        for (std::size_t i = 0; i < cols.size(); ++i) {
            row.push_back(parse_cell(cols[i], fields[i], line_no));
        }
        t.rows.push_back(std::move(row));
    }
    if (!have_columns) {
        fail("missing column header");
    }
    check_hash(t, recorded_hash);
    return t;
}

} // namespace

std::span<const Column> trace_schema(std::string_view command)
{
    if (command == "drift") {
        return drift_cols;
    }
    if (command == "cal-down") {
        return cal_down_cols;
    }
    if (command == "cal-up" || command == "cal-joint") {
        return cal_cols;
    }
    throw std::invalid_argument("no trace schema for command '" + std::string(command) + "'");
}

void write_trace(std::ostream& out, const Trace& trace, OutputFormat format)
{
    const auto cols = trace_schema(trace.command);
    if (format == OutputFormat::Csv) {
        write_csv(out, trace, cols);
    } else {
        write_jsonl(out, trace, cols);
    }
}

std::string trace_to_string(const Trace& trace, OutputFormat format)
{
    std::ostringstream ss;
    write_trace(ss, trace, format);
    return ss.str();
}

Trace read_trace(std::istream& in)
{
    const int first = in.peek();
    if (first == '{') {
        return read_jsonl(in);
    }
    if (first == '#') {
        return read_csv(in);
    }
    fail("unrecognised trace format");
}

Trace read_trace_string(std::string_view text)
{
    std::istringstream ss{std::string(text)};
    return read_trace(ss);
}

bool same_records(const Trace& a, const Trace& b)
{
    if (a.command != b.command || a.config != b.config || a.rows.size() != b.rows.size()) {
        return false;
    }
    for (std::size_t r = 0; r < a.rows.size(); ++r) {
        const auto& x = a.rows[r];
        const auto& y = b.rows[r];
        if (x.size() != y.size()) {
            return false;
        }
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i].index() != y[i].index()) {
                return false;
            }
            if (const auto* dx = std::get_if<double>(&x[i])) {
                const double dy = std::get<double>(y[i]);
                const bool both_nan = std::isnan(*dx) && std::isnan(dy);
                if (!both_nan && std::memcmp(dx, &dy, sizeof dy) != 0) {
                    return false;
                }
            } else if (x[i] != y[i]) {
                return false;
            }
        }
    }
    return true;
}

} // namespace iqcal
