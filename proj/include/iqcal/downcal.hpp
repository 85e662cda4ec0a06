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

// Blind estimation of the downconversion leakage ratio k_q from sideband
// statistics, tracked over time frames by a scalar complex Kalman filter.

#include "iqcal/frontend.hpp"
#include "iqcal/sigproc.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace iqcal {

/// Filter state. Variances are total (real + imaginary) variances of the
/// complex estimate; an infinite predicted variance encodes "no prior".
struct KalmanState {
    cplx k_filtered{};
    cplx k_predicted{};
    double var_filtered = 0.0;
    double var_predicted = 0.0;
    double var_process = 0.0;
    std::size_t frame_index = 0;
    std::size_t rejected_frames = 0;
};

/// N sideband pairs recorded within one time frame.
struct FrameObservation {
    std::vector<SidebandPair> pairs;
    std::size_t samples_per_pair = 0;

    std::size_t size() const noexcept { return pairs.size(); }
};

/// Y_m = Z_m - k Z*_{-m},  Y*_{-m} = -k* Z_m + Z*_{-m}  (overall scale ignored).
SidebandPair reconstruct(const SidebandPair& z, cplx k_hat);

/// <Z_m Z_{-m}> / <|Z_m + Z*_{-m}|^2> over the frame.
/// Throws std::invalid_argument for N < 2, ModelViolation for a zero denominator.
cplx estimate_kp(const FrameObservation& frame);

struct LeakageEstimate {
    cplx k_q;
    double gain;
    double phase; // radians
};

/// b = -2 Im k_p, a = sqrt(1 - b^2 - 4 Re k_p), k_q = (1 - a - jb) / (1 + a + jb),
/// G = sqrt(a^2 + b^2), phi = atan2(b, a). Throws ModelViolation on a negative radicand.
LeakageEstimate kp_to_kq(cplx k_p);

/// [N (1 + var_k / var_negk)(1 + var_negk / var_k)]^{-1}.
double sigma_q_sq(std::size_t n, double var_k, double var_negk);

/// Cold start is (0, +inf, var_process).
KalmanState init_kalman(cplx k0, double var0, double var_process);

/// Measurement update with an already-formed frame estimate, followed by the
/// prediction step. Precision form: the prior carries weight 1/var_predicted.
KalmanState kalman_update(const KalmanState& state, cplx k_measured, double var_measured);

struct FrameEstimate {
    cplx k_raw;
    double sigma_q2;
    double var_signal; // mean |Y_m|^2 of the reconstructed frame
    double var_image;  // mean |Y*_{-m}|^2
};

struct KalmanStep {
    KalmanState state;
    std::optional<FrameEstimate> estimate; // empty when the frame was rejected
};

/// One full filter iteration on a frame: reconstruct with the predicted
/// estimate to obtain the band variances, estimate k_q from the raw frame,
/// then update. A frame outside the estimator's model is rejected and leaves
/// the state untouched apart from frame_index and rejected_frames.
KalmanStep kalman_frame(const KalmanState& state, const FrameObservation& frame);

struct SidebandPowers {
    double signal = 0.0;
    double image = 0.0;

    double ilr() const { return image / signal; }
};

/// Summed |Y_m|^2 and |Y*_{-m}|^2 after reconstruction with k_hat.
SidebandPowers reconstructed_powers(const FrameObservation& frame, cplx k_hat);

} // namespace iqcal
