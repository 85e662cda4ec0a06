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

#include "iqcal/scenario.hpp"

#include "iqcal/errors.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace iqcal {

std::string_view to_string(OutputFormat f) noexcept
{
    return f == OutputFormat::Csv ? "csv" : "jsonl";
}

std::optional<OutputFormat> parse_format(std::string_view text) noexcept
{
    if (text == "csv") {
        return OutputFormat::Csv;
    }
    if (text == "jsonl" || text == "json-lines") {
        return OutputFormat::JsonLines;
    }
    return std::nullopt;
}

std::string format_double(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

std::optional<double> parse_double(std::string_view text)
{
    if (!text.empty() && text.front() == '+') {
        text.remove_prefix(1);
    }
    if (text.empty()) {
        return std::nullopt;
    }
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        return std::nullopt;
    }
    return v;
}

std::string config_hash(const ConfigEntries& entries)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](std::string_view s) {
        for (const unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& [k, v] : entries) {
        feed(k);
        feed("=");
        feed(v);
        feed("\n");
    }
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

namespace {

// Degree text that converts back to exactly `rad`, so a resolved config
// reproduces the run bit for bit.
std::string degrees_text(double rad)
{
    const double deg = rad * 180.0 / pi;
    double lo = deg;
    double hi = deg;
    for (int step = 0; step < 64; ++step) {
        if (hi * pi / 180.0 == rad) {
            return format_double(hi);
        }
        if (lo * pi / 180.0 == rad) {
            return format_double(lo);
        }
        hi = std::nextafter(hi, HUGE_VAL);
        lo = std::nextafter(lo, -HUGE_VAL);
    }
    return format_double(deg);
}


// The alpha/beta spelling gives a phase that no degree value maps to; snap
// it to the nearest one so the resolved config is a fixed point.
double degree_representable(double rad)
{
    return *parse_double(degrees_text(rad)) * pi / 180.0;
}

constexpr std::array known_keys = {
    "plant.sample_rate",       "plant.block_length",       "plant.lo_freq",         "plant.if_freq",
    "plant.drive_amplitude",   "up.gain",                  "up.phase_deg",          "up.alpha",
    "up.beta",                 "down.gain",                "down.phase_deg",        "down_red.gain",
    "down_red.phase_deg",      "channel.atten_signal_db",  "channel.atten_image_db", "channel.noise_variance",
    "channel.noise_floor_db",  "channel.cfo",              "drift.sigma_gain",      "drift.sigma_phase_deg",
    "drift.steps",             "kalman.pairs_per_frame",   "kalman.frames",         "kalman.init_k_re",
    "kalman.init_k_im",        "kalman.init_var",          "kalman.var_process",    "upcal.alpha0",
    "upcal.alpha1",            "upcal.beta0",              "upcal.beta1",           "upcal.threshold_db",
    "upcal.max_iters",         "upcal.epsilon",            "upcal.average_records", "joint.method",
    "joint.kalman_frames_per_step", "joint.noise_sampling_duration", "joint.measure_frames", "seeds.noise",
    "seeds.drift",             "output.path",              "output.format",
};

bool is_known(std::string_view key)
{
    for (const auto* k : known_keys) {
        if (key == k) {
            return true;
        }
    }
    return false;
}

bool is_section(std::string_view name)
{
    for (const auto* k : known_keys) {
        const std::string_view ks(k);
        if (ks.substr(0, ks.find('.')) == name) {
            return true;
        }
    }
    return false;
}

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct RawValue {
    std::string text;
    int line;
};

class Reader {
public:
    explicit Reader(std::map<std::string, RawValue> raw) : raw_(std::move(raw)) {}

    bool has(const std::string& key) const { return raw_.count(key) != 0; }
    int line(const std::string& key) const { return has(key) ? raw_.at(key).line : 0; }

    void real(const std::string& key, double& out) const
    {
        if (!has(key)) {
            return;
        }
        const auto& rv = raw_.at(key);
        const auto v = parse_double(rv.text);
        if (!v) {
            throw ConfigError(key + ": expected a number, got '" + rv.text + "'", rv.line);
        }
        out = *v;
    }

    template <class Int>
    void integer(const std::string& key, Int& out) const
    {
        if (!has(key)) {
            return;
        }
        const auto& rv = raw_.at(key);
        std::uint64_t v = 0;
        const auto* end = rv.text.data() + rv.text.size();
        const auto res = std::from_chars(rv.text.data(), end, v);
        if (res.ec != std::errc{} || res.ptr != end) {
            throw ConfigError(key + ": expected a non-negative integer, got '" + rv.text + "'", rv.line);
        }
        out = static_cast<Int>(v);
    }

    void text(const std::string& key, std::string& out) const
    {
        if (has(key)) {
            out = raw_.at(key).text;
        }
    }

private:
    std::map<std::string, RawValue> raw_;
};

ImbalanceParams read_mixer(const Reader& rd, const std::string& section, ImbalanceParams base)
{
    double g = base.gain;
    double deg = base.phase_deg();
    rd.real(section + ".gain", g);
    rd.real(section + ".phase_deg", deg);
    return ImbalanceParams::from_degrees(g, deg);
}

} // namespace

ScenarioConfig parse_config(std::string_view text, std::string source)
{
    std::map<std::string, RawValue> raw;
    std::map<std::string, int> lines;
    std::string section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        if (const auto hash = line.find_first_of("#;"); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("unterminated section header", line_no);
            }
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (!is_section(section)) {
                throw ConfigError("unknown section [" + section + "]", line_no);
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("expected 'key = value'", line_no);
        }
        if (section.empty()) {
            throw ConfigError("key outside of any [section]", line_no);
        }
        const std::string key = section + "." + std::string(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (!is_known(key)) {
            throw ConfigError("unknown key '" + key + "'", line_no);
        }
        if (raw.count(key) != 0) {
            throw ConfigError("duplicate key '" + key + "' (first set on line " + std::to_string(raw[key].line) + ")",
                              line_no);
        }
        if (value.empty()) {
            throw ConfigError("empty value for '" + key + "'", line_no);
        }
        raw[key] = {value, line_no};
        lines[key] = line_no;
    }

    const Reader rd(raw);
    ScenarioConfig cfg;
    cfg.source = std::move(source);
    cfg.key_lines = lines;
    auto& j = cfg.joint;

    rd.real("plant.sample_rate", j.sample_rate);
    rd.integer("plant.block_length", j.block_length);
    rd.real("plant.lo_freq", j.lo_freq);
    rd.real("plant.if_freq", j.if_freq);
    rd.real("plant.drive_amplitude", j.drive_amplitude);

    const bool up_polar = rd.has("up.gain") || rd.has("up.phase_deg");
    const bool up_cart = rd.has("up.alpha") || rd.has("up.beta");
    if (up_polar && up_cart) {
        throw ConfigError("[up] takes either gain/phase_deg or alpha/beta, not both",
                          std::max(rd.line("up.alpha"), rd.line("up.beta")));
    }
    if (up_cart) {
        double a = 1.0;
        double b = 0.0;
        rd.real("up.alpha", a);
        rd.real("up.beta", b);
        j.up_imb = ImbalanceParams::from_alpha_beta(a, b);
        j.up_imb.phase = degree_representable(j.up_imb.phase);
    } else {
        j.up_imb = read_mixer(rd, "up", {});
    }
    j.down_imb = read_mixer(rd, "down", {});
    if (rd.has("down_red.gain") || rd.has("down_red.phase_deg")) {
        j.down_imb_red = read_mixer(rd, "down_red", j.down_imb);
    }

    rd.real("channel.atten_signal_db", j.chan.atten_signal_db);
    rd.real("channel.atten_image_db", j.chan.atten_image_db);
    rd.real("channel.cfo", j.chan.cfo);
    if (rd.has("channel.noise_variance") && rd.has("channel.noise_floor_db")) {
        throw ConfigError("[channel] takes noise_variance or noise_floor_db, not both",
                          rd.line("channel.noise_floor_db"));
    }
    rd.real("channel.noise_variance", j.chan.noise_variance);
    if (rd.has("channel.noise_floor_db")) {
        double floor_db = 0.0;
        rd.real("channel.noise_floor_db", floor_db);
        // per-block image/signal power of a drive tone at the downconverter
        // output: floor = 4 var / (A^2 L)
        const double amp = j.drive_amplitude;
        j.chan.noise_variance =
            std::pow(10.0, floor_db / 10.0) * amp * amp * static_cast<double>(j.block_length) / 4.0;
    }

    double sigma_phase_deg = 0.0;
    rd.real("drift.sigma_gain", cfg.drift.sigma_gain);
    rd.real("drift.sigma_phase_deg", sigma_phase_deg);
    cfg.drift.sigma_phase = sigma_phase_deg * pi / 180.0;
    rd.integer("drift.steps", cfg.drift_steps);

    rd.integer("kalman.pairs_per_frame", j.pairs_per_frame);
    rd.integer("kalman.frames", cfg.kalman_frames);
    double kre = 0.0;
    double kim = 0.0;
    rd.real("kalman.init_k_re", kre);
    rd.real("kalman.init_k_im", kim);
    j.kalman_init_k = {kre, kim};
    rd.real("kalman.init_var", j.kalman_init_var);
    rd.real("kalman.var_process", j.kalman_var_process);

    rd.real("upcal.alpha0", j.upcal.alpha0);
    rd.real("upcal.alpha1", j.upcal.alpha1);
    rd.real("upcal.beta0", j.upcal.beta0);
    rd.real("upcal.beta1", j.upcal.beta1);
    rd.real("upcal.threshold_db", j.upcal.threshold_db);
    rd.integer("upcal.max_iters", j.upcal.max_iters);
    rd.real("upcal.epsilon", j.upcal.epsilon);
    rd.integer("upcal.average_records", cfg.average_records);

    if (rd.has("joint.method")) {
        std::string m;
        rd.text("joint.method", m);
        const auto parsed = parse_method(m);
        if (!parsed) {
            throw ConfigError("joint.method must be noise, cfo or naive, got '" + m + "'", rd.line("joint.method"));
        }
        j.method = *parsed;
    } else {
        j.method = j.chan.cfo != 0.0 ? JointMethod::Cfo : JointMethod::NoiseGated;
    }
    rd.integer("joint.kalman_frames_per_step", j.kalman_frames_per_step);
    rd.integer("joint.noise_sampling_duration", j.noise_sampling_duration);
    rd.integer("joint.measure_frames", j.measure_frames);

    rd.integer("seeds.noise", j.noise_seed);
    rd.integer("seeds.drift", cfg.drift.seed);

    rd.text("output.path", cfg.output_path);
    if (rd.has("output.format")) {
        std::string f;
        rd.text("output.format", f);
        const auto parsed = parse_format(f);
        if (!parsed) {
            throw ConfigError("output.format must be csv or jsonl, got '" + f + "'", rd.line("output.format"));
        }
        cfg.format = *parsed;
    }

    cfg.validate();
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open config file " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str(), path.string());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

namespace {

struct KeyHint {
    std::string_view token;
    std::array<std::string_view, 2> keys;
};

constexpr std::array key_hints = {
    KeyHint{"sample_rate", {"plant.sample_rate", ""}},
    KeyHint{"block_length", {"plant.block_length", ""}},
    KeyHint{"lo_freq", {"plant.lo_freq", ""}},
    KeyHint{"if_freq", {"plant.if_freq", ""}},
    KeyHint{"drive_amplitude", {"plant.drive_amplitude", ""}},
    KeyHint{"method", {"joint.method", "channel.cfo"}},
    KeyHint{"cfo", {"channel.cfo", ""}},
    KeyHint{"noise_variance", {"channel.noise_variance", "channel.noise_floor_db"}},
    KeyHint{"attenuations", {"channel.atten_signal_db", "channel.atten_image_db"}},
    KeyHint{"pairs_per_frame", {"kalman.pairs_per_frame", ""}},
    KeyHint{"kalman_frames_per_step", {"joint.kalman_frames_per_step", ""}},
    KeyHint{"noise_sampling_duration", {"joint.noise_sampling_duration", ""}},
    KeyHint{"measure_frames", {"joint.measure_frames", ""}},
    KeyHint{"init variance", {"kalman.init_var", ""}},
    KeyHint{"process variance", {"kalman.var_process", ""}},
    KeyHint{"alpha0", {"upcal.alpha1", "upcal.alpha0"}},
    KeyHint{"initial alpha", {"upcal.alpha0", "upcal.alpha1"}},
    KeyHint{"beta0", {"upcal.beta1", "upcal.beta0"}},
    KeyHint{"max_iters", {"upcal.max_iters", ""}},
    KeyHint{"epsilon", {"upcal.epsilon", ""}},
};

int line_for_message(const std::map<std::string, int>& lines, std::string_view msg)
{
    std::size_t best_pos = std::string_view::npos;
    const KeyHint* best = nullptr;
    for (const auto& h : key_hints) {
        const auto p = msg.find(h.token);
        if (p != std::string_view::npos && (best == nullptr || p < best_pos)) {
            best_pos = p;
            best = &h;
        }
    }
    if (best == nullptr) {
        return 0;
    }
    for (const auto k : best->keys) {
        if (const auto it = lines.find(std::string(k)); !k.empty() && it != lines.end()) {
            return it->second;
        }
    }
    return 0;
}

int first_line(const std::map<std::string, int>& lines, std::initializer_list<std::string_view> keys)
{
    for (const auto k : keys) {
        if (const auto it = lines.find(std::string(k)); it != lines.end()) {
            return it->second;
        }
    }
    return 0;
}

} // namespace

void ScenarioConfig::validate() const
{
    auto mixer = [this](const ImbalanceParams& m, std::string_view section) {
        try {
            m.validate();
        } catch (const std::invalid_argument& e) {
            const std::string s(section);
            throw ConfigError("[" + s + "] " + e.what(),
                              first_line(key_lines, {s + ".gain", s + ".phase_deg", s + ".alpha", s + ".beta"}));
        }
    };
    mixer(joint.up_imb, "up");
    mixer(joint.down_imb, "down");
    if (joint.down_imb_red) {
        mixer(*joint.down_imb_red, "down_red");
    }

    try {
        joint.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what(), line_for_message(key_lines, e.what()));
    }

    if (drift.sigma_gain < 0.0 || drift.sigma_phase < 0.0) {
        throw ConfigError("drift sigmas must be non-negative",
                          first_line(key_lines, {"drift.sigma_gain", "drift.sigma_phase_deg"}));
    }
    if (drift_steps == 0) {
        throw ConfigError("drift.steps must be at least 1", first_line(key_lines, {"drift.steps"}));
    }
    if (kalman_frames == 0) {
        throw ConfigError("kalman.frames must be at least 1", first_line(key_lines, {"kalman.frames"}));
    }
    if (average_records == 0) {
        throw ConfigError("upcal.average_records must be at least 1",
                          first_line(key_lines, {"upcal.average_records"}));
    }
}

ConfigEntries ScenarioConfig::resolved() const
{
    const auto& j = joint;
    auto d = [](double v) { return format_double(v); };
    auto u = [](std::uint64_t v) { return std::to_string(v); };
    ConfigEntries e = {
        {"plant.sample_rate", d(j.sample_rate)},
        {"plant.block_length", u(j.block_length)},
        {"plant.lo_freq", d(j.lo_freq)},
        {"plant.if_freq", d(j.if_freq)},
        {"plant.drive_amplitude", d(j.drive_amplitude)},
        {"up.gain", d(j.up_imb.gain)},
        {"up.phase_deg", degrees_text(j.up_imb.phase)},
        {"down.gain", d(j.down_imb.gain)},
        {"down.phase_deg", degrees_text(j.down_imb.phase)},
    };
    if (j.down_imb_red) {
        e.emplace_back("down_red.gain", d(j.down_imb_red->gain));
        e.emplace_back("down_red.phase_deg", degrees_text(j.down_imb_red->phase));
    }
    const ConfigEntries rest = {
        {"channel.atten_signal_db", d(j.chan.atten_signal_db)},
        {"channel.atten_image_db", d(j.chan.atten_image_db)},
        {"channel.noise_variance", d(j.chan.noise_variance)},
        {"channel.cfo", d(j.chan.cfo)},
        {"drift.sigma_gain", d(drift.sigma_gain)},
        {"drift.sigma_phase_deg", degrees_text(drift.sigma_phase)},
        {"drift.steps", u(drift_steps)},
        {"kalman.pairs_per_frame", u(j.pairs_per_frame)},
        {"kalman.frames", u(kalman_frames)},
        {"kalman.init_k_re", d(j.kalman_init_k.real())},
        {"kalman.init_k_im", d(j.kalman_init_k.imag())},
        {"kalman.init_var", d(j.kalman_init_var)},
        {"kalman.var_process", d(j.kalman_var_process)},
        {"upcal.alpha0", d(j.upcal.alpha0)},
        {"upcal.alpha1", d(j.upcal.alpha1)},
        {"upcal.beta0", d(j.upcal.beta0)},
        {"upcal.beta1", d(j.upcal.beta1)},
        {"upcal.threshold_db", d(j.upcal.threshold_db)},
        {"upcal.max_iters", u(j.upcal.max_iters)},
        {"upcal.epsilon", d(j.upcal.epsilon)},
        {"upcal.average_records", u(average_records)},
        {"joint.method", std::string(to_string(j.method))},
        {"joint.kalman_frames_per_step", u(j.kalman_frames_per_step)},
        {"joint.noise_sampling_duration", u(j.noise_sampling_duration)},
        {"joint.measure_frames", u(j.measure_frames)},
        {"seeds.noise", u(j.noise_seed)},
        {"seeds.drift", u(drift.seed)},
    };
    e.insert(e.end(), rest.begin(), rest.end());
    return e;
}

} // namespace iqcal
