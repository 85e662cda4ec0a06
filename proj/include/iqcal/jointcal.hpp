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

// In-situ calibration of an up/down mixer pair around a simulated plant.
//
//   NoiseGated  IF drive off while the Kalman filter samples channel noise in
//               both bands; drive on to read the downconversion ILR.
//   Cfo         continuous drive, downconversion LO detuned by cfo; the signal
//               (blue) and image (red) each get their own noise-only mirror
//               band and their own filter.
//   Naive       continuous drive, no detuning: the filter sees correlated
//               sidebands. Kept as the failing control.

#include "iqcal/downcal.hpp"
#include "iqcal/frontend.hpp"
#include "iqcal/upcal.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace iqcal {

enum class JointMethod { NoiseGated, Cfo, Naive };

std::string_view to_string(JointMethod m) noexcept;
std::optional<JointMethod> parse_method(std::string_view text) noexcept;

struct JointScenario {
    ImbalanceParams up_imb;
    ImbalanceParams down_imb;
    std::optional<ImbalanceParams> down_imb_red; // frequency-dependent imbalance for the red pair
    ChannelParams chan;
    JointMethod method = JointMethod::Cfo;

    double sample_rate = 10e6;
    std::size_t block_length = 1000; // samples per sideband pair
    double lo_freq = 2e6;
    double if_freq = 100e3;
    double drive_amplitude = 1.0;

    std::size_t pairs_per_frame = 64;
    std::size_t kalman_frames_per_step = 50;
    std::size_t noise_sampling_duration = 50; // frames with the drive off (NoiseGated)
    std::size_t measure_frames = 50;          // frames per drive-on ILR reading (NoiseGated)
    double kalman_init_var = std::numeric_limits<double>::infinity();
    cplx kalman_init_k{};
    double kalman_var_process = 0.0;

    UpcalOptions upcal;
    std::uint64_t noise_seed = 1;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

/// A measured pair: signal slot at `center`, image slot at `mirror` (= -center).
struct Band {
    double center;
    double mirror;
};

struct DualEstimate {
    cplx k_red{};
    cplx k_blue{};
};

struct JointIteration {
    std::size_t iteration = 0;
    double alpha_hat = 1.0;
    double beta_hat = 0.0;
    double ilr_down = 0.0; // downconversion estimate, linear
    double ilr_true = 0.0; // ideal observer before the channel, linear
    cplx k_blue{};         // signal-pair filter (the only filter outside Cfo)
    std::optional<cplx> k_red;
    double var_blue = 0.0;
    std::size_t rejected_frames = 0;
};

struct JointTrace {
    JointMethod method = JointMethod::Cfo;
    std::vector<JointIteration> iterations;
    PredistortState upcal;
    DualEstimate final_estimate;
};

/// Splits a baseband record into n_pairs equal blocks and demodulates each
/// band in each block. Returns one FrameObservation per band.
std::vector<FrameObservation> measure_pairs(const ComplexSignal& z, std::span<const Band> bands, std::size_t n_pairs);

/// The bands read by a method: one pair (+-if) without detuning, or
/// {blue, red} = {(if+cfo, -(if+cfo)), (-if+cfo, if-cfo)} with it.
std::vector<Band> method_bands(const JointScenario& scn);

/// Upconverter + channel + downconverter(s) with explicit noise seeding.
class SimulatedPlant {
public:
    explicit SimulatedPlant(const JointScenario& scn);

    struct Capture {
        std::vector<FrameObservation> bands; // one per requested band
        ComplexSignal received;              // RF at the downconverter input
    };

    /// One block of upconverter output for the given pre-distortion.
    ComplexSignal rf_block(double alpha_hat, double beta_hat) const;

    /// Image/signal power at the upconverter output, read before the channel.
    double true_ilr(double alpha_hat, double beta_hat) const;

    /// Records n_pairs blocks, drive on or off, through the channel, and
    /// downconverts each band with its own mixer parameters.
    Capture capture(bool drive_on, double alpha_hat, double beta_hat, std::span<const Band> bands,
                    std::span<const ImbalanceParams> band_mixers, std::size_t n_pairs);

    const JointScenario& scenario() const noexcept { return scn_; }

private:
    JointScenario scn_;
    std::mt19937_64 rng_;
};

JointTrace run_noise_gated(const JointScenario& scn);
JointTrace run_cfo(const JointScenario& scn);
JointTrace run_naive(const JointScenario& scn);

/// Dispatches on scn.method.
JointTrace run_joint(const JointScenario& scn);

} // namespace iqcal
