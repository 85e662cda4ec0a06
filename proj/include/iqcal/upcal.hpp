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

// Digital pre-distortion of the IF drive and the alternating secant
// minimisation of the image-leakage cost.

#include "iqcal/frontend.hpp"
#include "iqcal/sigproc.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace iqcal {

struct CostSample {
    double alpha_hat;
    double beta_hat;
    double ilr;  // linear power ratio as measured
    double cost; // 4 alpha_hat^2 ilr
};

enum class SecantPhase { UpdateAlpha, UpdateBeta };

struct PredistortState {
    double alpha_hat = 1.0;
    double beta_hat = 0.0;
    double alpha_prev = 1.0;
    double beta_prev = 0.0;
    std::vector<CostSample> cost_history;
    SecantPhase phase = SecantPhase::UpdateAlpha;
    std::size_t perturbations = 0; // degenerate secant steps recovered by nudging

    double last_ilr() const { return cost_history.empty() ? 1.0 : cost_history.back().ilr; }
};

/// z_I = x_I + (beta_hat/alpha_hat) x_Q,  z_Q = x_Q / alpha_hat.
///
/// With alpha_hat = alpha and beta_hat = beta the imbalanced upconverter's
/// image cancels exactly. Throws std::invalid_argument for alpha_hat <= 0.
ComplexSignal predistort(const ComplexSignal& x, double alpha_hat, double beta_hat);

/// ILR of an upconverter (alpha, beta) driven through pre-distortion (alpha_hat, beta_hat).
double ilr_closed_form(double alpha, double beta, double alpha_hat, double beta_hat);

/// C = 4 alpha_hat^2 ILR.
double cost(double alpha_hat, double ilr_measured);

/// Minimiser of the parabola through two cost samples with unit curvature:
/// 0.5 (x_older + x_newer - (c_older - c_newer) / (x_older - x_newer)).
/// Throws DegenerateSecant when x_older == x_newer.
double secant_minimum(double x_older, double c_older, double x_newer, double c_newer);

/// Next alpha_hat from the most recent pair of history entries measured at a common beta_hat.
double update_alpha(const PredistortState& state);

/// Next beta_hat from the most recent pair of history entries measured at a common alpha_hat.
double update_beta(const PredistortState& state);

/// Returns the measured ILR (linear power ratio) for the given pre-distortion.
using IlrMeasurement = std::function<double(double alpha_hat, double beta_hat)>;

struct UpcalOptions {
    double alpha0 = 1.00;
    double alpha1 = 0.99;
    double beta0 = 0.00;
    double beta1 = 0.01;
    double threshold_db = -70.0;
    std::size_t max_iters = 20; // measurements, including the three seed points
    double epsilon = 1e-3;      // nudge applied on a degenerate secant step

    void validate() const;
};

/// Runs the alternating schedule: measure (a0,b0), (a1,b0), (a1,b1), then
/// alternately update alpha and beta, one measurement per update, until the
/// measured ILR is at or below threshold_db or max_iters measurements are spent.
PredistortState calibrate_upconversion(const IlrMeasurement& plant, const UpcalOptions& options);

/// Geometry for a direct time-domain look at the upconverter output.
struct UpconverterProbe {
    double sample_rate = 10e6;
    double lo_freq = 2e6;
    double if_freq = 100e3;
    std::size_t n_samples = 1000;
    double amplitude = 1.0;
};

/// Drives a tone at if_freq through predistort + upconvert and reads the two
/// sidebands by coherent demodulation (an ideal spectrum analyser).
double simulate_upconversion_ilr(const ImbalanceParams& imb, double alpha_hat, double beta_hat,
                                 const UpconverterProbe& probe);

} // namespace iqcal
