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

#include "iqcal/jointcal.hpp"

#include "iqcal/errors.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace iqcal {

std::string_view to_string(JointMethod m) noexcept
{
    switch (m) {
    case JointMethod::NoiseGated:
        return "noise";
    case JointMethod::Cfo:
        return "cfo";
    case JointMethod::Naive:
        return "naive";
    }
    return "unknown";
}

std::optional<JointMethod> parse_method(std::string_view text) noexcept
{
    if (text == "noise") {
        return JointMethod::NoiseGated;
    }
    if (text == "cfo") {
        return JointMethod::Cfo;
    }
    if (text == "naive") {
        return JointMethod::Naive;
    }
    return std::nullopt;
}

namespace {

void require(bool ok, const std::string& msg)
{
    if (!ok) {
        throw std::invalid_argument(msg);
    }
}

void require_coherent(double freq, const JointScenario& scn, const std::string& name)
{
    require(is_coherent(freq, scn.block_length, scn.sample_rate),
            name + " = " + std::to_string(freq) + " Hz is not a multiple of sample_rate/block_length = " +
                std::to_string(scn.sample_rate / static_cast<double>(scn.block_length)) + " Hz");
}

} // namespace

void JointScenario::validate() const
{
    up_imb.validate();
    down_imb.validate();
    if (down_imb_red) {
        down_imb_red->validate();
    }
    require(sample_rate > 0.0, "sample_rate must be positive");
    require(block_length >= 2, "block_length must be at least 2");
    require(if_freq > 0.0, "if_freq must be positive");
    require(drive_amplitude > 0.0, "drive_amplitude must be positive");
    require_coherent(lo_freq, *this, "lo_freq");
    require_coherent(if_freq, *this, "if_freq");
    require_coherent(chan.cfo, *this, "cfo");

    const double down_lo = lo_freq - chan.cfo;
    require(lo_freq > 0.0 && lo_freq <= sample_rate / 4.0, "lo_freq must lie in (0, sample_rate/4]");
    require(down_lo > 0.0 && down_lo <= sample_rate / 4.0, "lo_freq - cfo must lie in (0, sample_rate/4]");
    require(if_freq + std::abs(chan.cfo) < down_lo, "if_freq + |cfo| must stay below the downconversion LO");
    require(lo_freq + if_freq < sample_rate / 2.0, "lo_freq + if_freq must stay below Nyquist");

    if (method == JointMethod::Cfo) {
        require(chan.cfo != 0.0, "method cfo requires a nonzero cfo");
        require(std::abs(chan.cfo) != if_freq, "cfo = +/-if_freq makes the red and blue bands collide");
    } else {
        require(chan.cfo == 0.0, "method " + std::string(to_string(method)) + " requires cfo = 0");
    }
    require(chan.noise_variance >= 0.0, "noise_variance must be non-negative");
    require(std::isfinite(chan.atten_signal_db) && std::isfinite(chan.atten_image_db),
            "channel attenuations must be finite");

    require(pairs_per_frame >= 2, "pairs_per_frame must be at least 2");
    require(kalman_frames_per_step >= 1 && kalman_frames_per_step <= 10000,
            "kalman_frames_per_step must lie in [1, 10000]");
    require(noise_sampling_duration >= 1, "noise_sampling_duration must be at least 1");
    require(measure_frames >= 1, "measure_frames must be at least 1");
    require(kalman_init_var > 0.0, "kalman init variance must be positive or inf");
    require(kalman_var_process >= 0.0, "kalman process variance must be non-negative");
    upcal.validate();
}

std::vector<FrameObservation> measure_pairs(const ComplexSignal& z, std::span<const Band> bands, std::size_t n_pairs)
{
    if (n_pairs == 0 || z.size() % n_pairs != 0) {
        throw std::invalid_argument("measure_pairs: record length " + std::to_string(z.size()) +
                                    " is not a whole number of " + std::to_string(n_pairs) + " blocks");
    }
    const std::size_t block = z.size() / n_pairs;

    std::vector<double> all;
    for (const auto& b : bands) {
        all.push_back(b.center);
        all.push_back(b.mirror);
    }
    for (std::size_t i = 0; i < all.size(); ++i) {
        for (std::size_t j = i + 1; j < all.size(); ++j) {
            if (all[i] == all[j]) {
                throw std::invalid_argument("measure_pairs: overlapping bins at " + std::to_string(all[i]) + " Hz");
            }
        }
    }

    std::vector<FrameObservation> out(bands.size());
    for (std::size_t bi = 0; bi < bands.size(); ++bi) {
        const CoherentBin center(bands[bi].center, block, z.sample_rate);
        const CoherentBin mirror(bands[bi].mirror, block, z.sample_rate);
        auto& frame = out[bi];
        frame.samples_per_pair = block;
        frame.pairs.reserve(n_pairs);
        const std::span<const cplx> all_samples(z.samples);
        for (std::size_t p = 0; p < n_pairs; ++p) {
            const auto blk = all_samples.subspan(p * block, block);
            frame.pairs.push_back({center.demod(blk), std::conj(mirror.demod(blk)), bands[bi].center});
        }
    }
    return out;
}

std::vector<Band> method_bands(const JointScenario& scn)
{
    const double w = scn.if_freq;
    const double df = scn.chan.cfo;
    if (scn.method == JointMethod::Cfo) {
        return {Band{w + df, -(w + df)}, Band{-w + df, w - df}};
    }
    return {Band{w, -w}};
}

SimulatedPlant::SimulatedPlant(const JointScenario& scn) : scn_(scn), rng_(scn.noise_seed)
{
    scn_.validate();
}

ComplexSignal SimulatedPlant::rf_block(double alpha_hat, double beta_hat) const
{
    const auto x = synth_tone(scn_.if_freq, scn_.drive_amplitude, 0.0, scn_.sample_rate, scn_.block_length);
    return upconvert(predistort(x, alpha_hat, beta_hat), scn_.lo_freq, scn_.up_imb);
}

double SimulatedPlant::true_ilr(double alpha_hat, double beta_hat) const
{
    const auto lines = rf_sidebands(rf_block(alpha_hat, beta_hat), scn_.lo_freq, scn_.if_freq);
    return lines.image_power() / lines.signal_power();
}

SimulatedPlant::Capture SimulatedPlant::capture(bool drive_on, double alpha_hat, double beta_hat,
                                                std::span<const Band> bands,
                                                std::span<const ImbalanceParams> band_mixers, std::size_t n_pairs)
{
    if (bands.size() != band_mixers.size()) {
        throw std::invalid_argument("capture: one mixer per band required");
    }
    const std::size_t block = scn_.block_length;
    ComplexSignal record;
    record.sample_rate = scn_.sample_rate;
    record.samples.assign(block * n_pairs, cplx{});
    if (drive_on) {
        const auto rf = rf_block(alpha_hat, beta_hat);
        for (std::size_t p = 0; p < n_pairs; ++p) {
            std::copy(rf.samples.begin(), rf.samples.end(), record.samples.begin() + static_cast<long>(p * block));
        }
    }

    Capture cap;
    cap.received = apply_channel(record, scn_.chan, scn_.lo_freq, scn_.if_freq, rng_());
    const double down_lo = scn_.lo_freq - scn_.chan.cfo;

    cap.bands.resize(bands.size());
    std::vector<bool> done(bands.size(), false);
    for (std::size_t i = 0; i < bands.size(); ++i) {
        if (done[i]) {
            continue;
        }
        const auto& mixer = band_mixers[i];
        const auto z = downconvert(cap.received, down_lo, mixer);
        for (std::size_t j = i; j < bands.size(); ++j) {
            if (!done[j] && band_mixers[j].gain == mixer.gain && band_mixers[j].phase == mixer.phase) {
                cap.bands[j] = measure_pairs(z, bands.subspan(j, 1), n_pairs).front();
                done[j] = true;
            }
        }
    }
    return cap;
}

namespace {

void require_method(const JointScenario& scn, JointMethod m)
{
    if (scn.method != m) {
        throw std::invalid_argument("scenario method is " + std::string(to_string(scn.method)) + ", expected " +
                                    std::string(to_string(m)));
    }
}

KalmanState initial_filter(const JointScenario& scn)
{
    return init_kalman(scn.kalman_init_k, scn.kalman_init_var, scn.kalman_var_process);
}

void check_not_all_rejected(std::size_t rejected, std::size_t frames)
{
    if (rejected == frames) {
        throw ModelViolation("every Kalman frame in the calibration step was rejected");
    }
}

} // namespace

JointTrace run_noise_gated(const JointScenario& scn)
{
    require_method(scn, JointMethod::NoiseGated);
    SimulatedPlant plant(scn);
    const auto bands = method_bands(scn);
    const std::array mixers{scn.down_imb};
    KalmanState filter = initial_filter(scn);

    JointTrace trace;
    trace.method = scn.method;
    auto measure = [&](double ah, double bh) {
        // drive off: the filter only sees channel noise in both bands
        std::size_t rejected = 0;
        for (std::size_t f = 0; f < scn.noise_sampling_duration; ++f) {
            auto cap = plant.capture(false, ah, bh, bands, mixers, scn.pairs_per_frame);
            auto step = kalman_frame(filter, cap.bands.front());
            rejected += step.estimate ? 0 : 1;
            filter = step.state;
        }
        check_not_all_rejected(rejected, scn.noise_sampling_duration);

        SidebandPowers acc;
        for (std::size_t f = 0; f < scn.measure_frames; ++f) {
            auto cap = plant.capture(true, ah, bh, bands, mixers, scn.pairs_per_frame);
            const auto p = reconstructed_powers(cap.bands.front(), filter.k_filtered);
            acc.signal += p.signal;
            acc.image += p.image;
        }

        JointIteration it;
        it.iteration = trace.iterations.size() + 1;
        it.alpha_hat = ah;
        it.beta_hat = bh;
        it.ilr_down = acc.ilr();
        it.ilr_true = plant.true_ilr(ah, bh);
        it.k_blue = filter.k_filtered;
        it.var_blue = filter.var_filtered;
        it.rejected_frames = rejected;
        trace.iterations.push_back(it);
        return it.ilr_down;
    };
    trace.upcal = calibrate_upconversion(measure, scn.upcal);
    trace.final_estimate = {filter.k_filtered, filter.k_filtered};
    return trace;
}

JointTrace run_cfo(const JointScenario& scn)
{
    require_method(scn, JointMethod::Cfo);
    SimulatedPlant plant(scn);
    const auto bands = method_bands(scn); // {blue, red}
    const std::array mixers{scn.down_imb, scn.down_imb_red.value_or(scn.down_imb)};
    KalmanState blue = initial_filter(scn);
    KalmanState red = initial_filter(scn);

    JointTrace trace;
    trace.method = scn.method;
    auto measure = [&](double ah, double bh) {
        std::vector<FrameObservation> blue_frames;
        std::vector<FrameObservation> red_frames;
        std::size_t rejected_blue = 0;
        std::size_t rejected_red = 0;
        for (std::size_t f = 0; f < scn.kalman_frames_per_step; ++f) {
            auto cap = plant.capture(true, ah, bh, bands, mixers, scn.pairs_per_frame);
            auto sb = kalman_frame(blue, cap.bands[0]);
            auto sr = kalman_frame(red, cap.bands[1]);
            rejected_blue += sb.estimate ? 0 : 1;
            rejected_red += sr.estimate ? 0 : 1;
            blue = sb.state;
            red = sr.state;
            blue_frames.push_back(std::move(cap.bands[0]));
            red_frames.push_back(std::move(cap.bands[1]));
        }
        check_not_all_rejected(rejected_blue, scn.kalman_frames_per_step);
        check_not_all_rejected(rejected_red, scn.kalman_frames_per_step);

        // The red pair's signal slot holds the upconverter image, so both
        // powers come from signal slots, each corrected with its own filter.
        double p_blue = 0.0;
        double p_red = 0.0;
        for (std::size_t f = 0; f < blue_frames.size(); ++f) {
            p_blue += reconstructed_powers(blue_frames[f], blue.k_filtered).signal;
            p_red += reconstructed_powers(red_frames[f], red.k_filtered).signal;
        }

        JointIteration it;
        it.iteration = trace.iterations.size() + 1;
        it.alpha_hat = ah;
        it.beta_hat = bh;
        it.ilr_down = p_red / p_blue;
        it.ilr_true = plant.true_ilr(ah, bh);
        it.k_blue = blue.k_filtered;
        it.k_red = red.k_filtered;
        it.var_blue = blue.var_filtered;
        it.rejected_frames = rejected_blue + rejected_red;
        trace.iterations.push_back(it);
        return it.ilr_down;
    };
    trace.upcal = calibrate_upconversion(measure, scn.upcal);
    trace.final_estimate = {red.k_filtered, blue.k_filtered};
    return trace;
}

JointTrace run_naive(const JointScenario& scn)
{
    require_method(scn, JointMethod::Naive);
    SimulatedPlant plant(scn);
    const auto bands = method_bands(scn);
    const std::array mixers{scn.down_imb};
    KalmanState filter = initial_filter(scn);

    JointTrace trace;
    trace.method = scn.method;
    auto measure = [&](double ah, double bh) {
        std::vector<FrameObservation> frames;
        std::size_t rejected = 0;
        for (std::size_t f = 0; f < scn.kalman_frames_per_step; ++f) {
            auto cap = plant.capture(true, ah, bh, bands, mixers, scn.pairs_per_frame);
            auto step = kalman_frame(filter, cap.bands.front());
            rejected += step.estimate ? 0 : 1;
            filter = step.state;
            frames.push_back(std::move(cap.bands.front()));
        }
        check_not_all_rejected(rejected, scn.kalman_frames_per_step);

        SidebandPowers acc;
        for (const auto& fr : frames) {
            const auto p = reconstructed_powers(fr, filter.k_filtered);
            acc.signal += p.signal;
            acc.image += p.image;
        }

        JointIteration it;
        it.iteration = trace.iterations.size() + 1;
        it.alpha_hat = ah;
        it.beta_hat = bh;
        it.ilr_down = acc.ilr();
        it.ilr_true = plant.true_ilr(ah, bh);
        it.k_blue = filter.k_filtered;
        it.var_blue = filter.var_filtered;
        it.rejected_frames = rejected;
        trace.iterations.push_back(it);
        return it.ilr_down;
    };
    trace.upcal = calibrate_upconversion(measure, scn.upcal);
    trace.final_estimate = {filter.k_filtered, filter.k_filtered};
    return trace;
}

JointTrace run_joint(const JointScenario& scn)
{
    switch (scn.method) {
    case JointMethod::NoiseGated:
        return run_noise_gated(scn);
    case JointMethod::Cfo:
        return run_cfo(scn);
    case JointMethod::Naive:
        return run_naive(scn);
    }
    throw std::invalid_argument("unknown joint method");
}

} // namespace iqcal
