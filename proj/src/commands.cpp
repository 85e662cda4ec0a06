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

#include "iqcal/commands.hpp"

#include "iqcal/downcal.hpp"
#include "iqcal/jointcal.hpp"
#include "iqcal/upcal.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <random>
#include <stdexcept>

namespace iqcal {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

Trace empty_trace(const std::string& command, const ScenarioConfig& cfg)
{
    Trace t;
    t.command = command;
    t.config = cfg.resolved();
    return t;
}

// the upconverter alone, with no downconverter in the loop
JointScenario up_only(const ScenarioConfig& cfg)
{
    JointScenario scn = cfg.joint;
    scn.chan.cfo = 0.0;
    scn.method = JointMethod::Naive;
    scn.down_imb_red.reset();
    return scn;
}

std::int64_t as_int(std::size_t v)
{
    return static_cast<std::int64_t>(v);
}

} // namespace

Trace cmd_drift(const ScenarioConfig& cfg)
{
    const auto& j = cfg.joint;
    const UpconverterProbe probe{j.sample_rate, j.lo_freq, j.if_freq, j.block_length, j.drive_amplitude};
    ImbalanceParams imb = j.up_imb;

    const auto cal = calibrate_upconversion(
        [&](double ah, double bh) { return simulate_upconversion_ilr(imb, ah, bh, probe); }, j.upcal);
    const auto best = std::min_element(cal.cost_history.begin(), cal.cost_history.end(),
                                       [](const CostSample& a, const CostSample& b) { return a.ilr < b.ilr; });

    Trace t = empty_trace("drift", cfg);
    for (std::size_t step = 0; step <= cfg.drift_steps; ++step) {
        if (step > 0) {
            imb = drift_step(imb, cfg.drift, step);
        }
        const double ilr = simulate_upconversion_ilr(imb, best->alpha_hat, best->beta_hat, probe);
        t.rows.push_back({as_int(step), imb.gain, imb.phase_deg(), to_db(ilr)});
    }
    return t;
}

Trace cmd_cal_down(const ScenarioConfig& cfg, const WarningSink& warn)
{
    JointScenario scn = up_only(cfg);
    scn.up_imb = ImbalanceParams{};
    SimulatedPlant plant(scn);
    const std::array bands{Band{scn.if_freq, -scn.if_freq}};
    const std::array mixers{scn.down_imb};
    KalmanState kal = init_kalman(scn.kalman_init_k, scn.kalman_init_var, scn.kalman_var_process);

    Trace t = empty_trace("cal-down", cfg);
    for (std::size_t f = 1; f <= cfg.kalman_frames; ++f) {
        const auto cap = plant.capture(true, 1.0, 0.0, bands, mixers, scn.pairs_per_frame);
        const auto& frame = cap.bands.front();
        const auto step = kalman_frame(kal, frame);
        kal = step.state;
        if (!step.estimate && warn) {
            warn("cal-down: frame " + std::to_string(f) + " rejected (outside the estimator model)");
        }
        const auto p = reconstructed_powers(frame, kal.k_filtered);
        const auto imb = imbalance_from_leakage(kal.k_filtered);
        t.rows.push_back({as_int(f), to_db(p.ilr()), kal.k_filtered.real(), kal.k_filtered.imag(), kal.var_filtered,
                          imb.gain, imb.phase_deg(), std::int64_t{step.estimate ? 1 : 0}});
    }
    return t;
}

Trace cmd_cal_up(const ScenarioConfig& cfg)
{
    const JointScenario scn = up_only(cfg);
    const SimulatedPlant plant(scn);
    const std::array bands{Band{scn.lo_freq + scn.if_freq, scn.lo_freq - scn.if_freq}};
    const std::size_t records = cfg.average_records;
    std::mt19937_64 rng(scn.noise_seed);

    Trace t = empty_trace("cal-up", cfg);
    auto measure = [&](double ah, double bh) {
        const auto rf = plant.rf_block(ah, bh);
        ComplexSignal record;
        record.sample_rate = rf.sample_rate;
        record.samples.reserve(rf.size() * records);
        for (std::size_t r = 0; r < records; ++r) {
            record.samples.insert(record.samples.end(), rf.samples.begin(), rf.samples.end());
        }
        const auto received = apply_channel(record, scn.chan, scn.lo_freq, scn.if_freq, rng());
        const auto obs = measure_pairs(received, bands, records).front();
        double sig = 0.0;
        double img = 0.0;
        for (const auto& p : obs.pairs) {
            sig += p.signal_power();
            img += p.image_power();
        }
        const double ilr = img / sig;
        t.rows.push_back({as_int(t.rows.size() + 1), ah, bh, to_db(ilr), to_db(plant.true_ilr(ah, bh)),
                          std::string("up"), nan, nan, nan, nan, std::int64_t{0}});
        return ilr;
    };
    calibrate_upconversion(measure, scn.upcal);
    return t;
}

Trace cmd_cal_joint(const ScenarioConfig& cfg, const WarningSink& warn)
{
    const auto run = run_joint(cfg.joint);
    Trace t = empty_trace("cal-joint", cfg);
    const std::string method(to_string(run.method));
    for (const auto& it : run.iterations) {
        if (it.rejected_frames > 0 && warn) {
            warn("cal-joint: iteration " + std::to_string(it.iteration) + ": " + std::to_string(it.rejected_frames) +
                 " Kalman frame(s) rejected");
        }
        const cplx red = it.k_red.value_or(cplx{nan, nan});
        t.rows.push_back({as_int(it.iteration), it.alpha_hat, it.beta_hat, to_db(it.ilr_down), to_db(it.ilr_true),
                          method, it.k_blue.real(), it.k_blue.imag(), red.real(), red.imag(),
                          as_int(it.rejected_frames)});
    }
    return t;
}

Trace run_command(const std::string& name, const ScenarioConfig& cfg, const WarningSink& warn)
{
    if (name == "drift") {
        return cmd_drift(cfg);
    }
    if (name == "cal-down") {
        return cmd_cal_down(cfg, warn);
    }
    if (name == "cal-up") {
        return cmd_cal_up(cfg);
    }
    if (name == "cal-joint") {
        return cmd_cal_joint(cfg, warn);
    }
    throw std::invalid_argument("unknown command '" + name + "'");
}

} // namespace iqcal
