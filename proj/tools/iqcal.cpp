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

// iqcal command-line front end.
//
//   iqcal drift      CONFIG... [--out PATH] [--format csv|jsonl]
//   iqcal cal-down   CONFIG... [--out PATH] [--format csv|jsonl]
//   iqcal cal-up     CONFIG... [--out PATH] [--format csv|jsonl]
//   iqcal cal-joint  CONFIG... [--method noise|cfo|naive] [--out PATH] [--format csv|jsonl]
//   iqcal validate   CONFIG...
//
// Several configs run as a batch, --jobs at a time, one plant per worker.
// Exit codes: 0 ok, 2 config error, 3 runtime error, 4 model violation.

#include "iqcal/commands.hpp"
#include "iqcal/errors.hpp"
#include "iqcal/scenario.hpp"
#include "iqcal/trace.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <future>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace {

enum Exit : int { Ok = 0, ConfigFailure = 2, RuntimeFailure = 3, ModelFailure = 4 };

struct Options {
    std::vector<std::string> configs;
    std::string out;
    std::string format;
    std::string method;
    unsigned jobs = 1;
};

std::mutex io_mutex;

void report(const std::string& msg)
{
    const std::lock_guard lock(io_mutex);
    std::cerr << msg << '\n';
}

iqcal::ScenarioConfig prepare(const std::string& command, const std::string& path, const Options& opt)
{
    auto cfg = iqcal::load_config(path);
    if (command == "cal-joint") {
        if (!opt.method.empty()) {
            const auto m = iqcal::parse_method(opt.method);
            if (!m) {
                throw iqcal::ConfigError("--method must be noise, cfo or naive");
            }
            cfg.joint.method = *m;
            try {
                cfg.validate();
            } catch (const iqcal::ConfigError& e) {
                throw iqcal::ConfigError(path + ": with --method " + opt.method + ": " + e.what());
            }
        } else if (cfg.key_lines.count("joint.method") == 0) {
            throw iqcal::ConfigError(path + ": cal-joint needs --method or a [joint] method key");
        }
    }
    if (!opt.format.empty()) {
        const auto f = iqcal::parse_format(opt.format);
        if (!f) {
            throw iqcal::ConfigError("--format must be csv or jsonl");
        }
        cfg.format = *f;
    }
    if (!opt.out.empty()) {
        cfg.output_path = opt.out;
    }
    return cfg;
}

struct Outcome {
    int code = Ok;
    std::string text; // trace, when written to stdout
};

Outcome run_one(const std::string& command, const std::string& path, const Options& opt)
{
    Outcome res;
    try {
        const auto cfg = prepare(command, path, opt);
        if (command == "validate") {
            const std::lock_guard lock(io_mutex);
            std::cout << path << ": ok (config_hash " << iqcal::config_hash(cfg.resolved()) << ")\n";
            return res;
        }
        const auto trace =
            iqcal::run_command(command, cfg, [&path](const std::string& msg) { report(path + ": warning: " + msg); });
        if (cfg.output_path.empty()) {
            res.text = iqcal::trace_to_string(trace, cfg.format);
        } else {
            std::ofstream out(cfg.output_path, std::ios::binary);
            if (!out) {
                throw std::runtime_error("cannot open output file " + cfg.output_path);
            }
            iqcal::write_trace(out, trace, cfg.format);
            if (!out) {
                throw std::runtime_error("failed writing " + cfg.output_path);
            }
        }
    } catch (const iqcal::ConfigError& e) {
        report(std::string("config error: ") + e.what());
        res.code = ConfigFailure;
    } catch (const iqcal::ModelViolation& e) {
        report(path + ": model violation: " + e.what());
        res.code = ModelFailure;
    } catch (const std::exception& e) {
        report(path + ": error: " + e.what());
        res.code = RuntimeFailure;
    }
    return res;
}

int run_batch(const std::string& command, const Options& opt)
{
    if (opt.configs.size() > 1 && !opt.out.empty()) {
        report("--out takes a single config; set [output] path per config for batches");
        return ConfigFailure;
    }
    const std::size_t jobs = std::max(1U, opt.jobs);
    int worst = Ok;
    for (std::size_t start = 0; start < opt.configs.size(); start += jobs) {
        const std::size_t end = std::min(opt.configs.size(), start + jobs);
        std::vector<std::future<Outcome>> running;
        for (std::size_t i = start; i < end; ++i) {
            running.push_back(std::async(std::launch::async, run_one, command, opt.configs[i], std::cref(opt)));
        }
        // stdout traces come out in argument order
        for (auto& f : running) {
            const auto res = f.get();
            std::cout << res.text;
            worst = std::max(worst, res.code);
        }
    }
    return worst;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"iqcal: IQ mixer imbalance simulation and calibration"};
    app.require_subcommand(1);
    Options opt;
    app.add_option("-j,--jobs", opt.jobs, "Configs processed in parallel")->check(CLI::Range(1U, 256U));

    auto add = [&](const std::string& name, const std::string& help, bool writes) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("configs", opt.configs, "Scenario files")->required()->check(CLI::ExistingFile);
        if (writes) {
            sub->add_option("-o,--out", opt.out, "Trace file (default: [output] path, else stdout)");
            sub->add_option("-f,--format", opt.format, "csv or jsonl (default: [output] format)")
                ->check(CLI::IsMember({"csv", "jsonl"}));
        }
        return sub;
    };
    add("drift", "Calibrate, then let the upconverter imbalance drift", true);
    add("cal-down", "Kalman-tracked blind downconversion calibration", true);
    add("cal-up", "Secant pre-distortion calibration of the upconverter", true);
    auto* joint = add("cal-joint", "Joint up/down calibration", true);
    joint->add_option("-m,--method", opt.method, "noise, cfo or naive (default: [joint] method)")
        ->check(CLI::IsMember({"noise", "cfo", "naive"}));
    add("validate", "Parse and check configs without running", false);

    CLI11_PARSE(app, argc, argv);
    return run_batch(app.get_subcommands().front()->get_name(), opt);
}
