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

#include "iqcal/downcal.hpp"

#include "iqcal/errors.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace iqcal {

SidebandPair reconstruct(const SidebandPair& z, cplx k_hat)
{
    return {z.signal - k_hat * z.image_conj, -std::conj(k_hat) * z.signal + z.image_conj, z.offset};
}

cplx estimate_kp(const FrameObservation& frame)
{
    if (frame.size() < 2) {
        throw std::invalid_argument("estimate_kp needs at least two sideband pairs");
    }
    cplx num{};
    double den = 0.0;
    for (const auto& p : frame.pairs) {
        num += p.signal * std::conj(p.image_conj); // Z_m Z_{-m}
        den += std::norm(p.signal + p.image_conj);
    }
    if (!(den > 0.0)) {
        throw ModelViolation("estimate_kp: degenerate frame with zero sideband power");
    }
    return num / den; // the 1/N factors cancel
}

LeakageEstimate kp_to_kq(cplx k_p)
{
    const double b = -2.0 * k_p.imag();
    const double radicand = 1.0 - b * b - 4.0 * k_p.real();
    if (!(radicand >= 0.0)) {
        throw ModelViolation("kp_to_kq: negative radicand, sideband statistics outside the imbalance model");
    }
    const double a = std::sqrt(radicand);
    const cplx ab{a, b};
    return {(1.0 - ab) / (1.0 + ab), std::hypot(a, b), std::atan2(b, a)};
}

double sigma_q_sq(std::size_t n, double var_k, double var_negk)
{
    if (n < 1) {
        throw std::domain_error("sigma_q_sq: N must be at least 1");
    }
    if (!(var_k > 0.0) || !(var_negk > 0.0)) {
        throw std::domain_error("sigma_q_sq: band variances must be positive");
    }
    return 1.0 / (static_cast<double>(n) * (1.0 + var_k / var_negk) * (1.0 + var_negk / var_k));
}

KalmanState init_kalman(cplx k0, double var0, double var_process)
{
    if (!(var0 > 0.0)) {
        throw std::invalid_argument("init_kalman: initial variance must be positive or infinite");
    }
    if (!(var_process >= 0.0)) {
        throw std::invalid_argument("init_kalman: process variance must be non-negative");
    }
    KalmanState st;
    st.k_filtered = k0;
    st.k_predicted = k0;
    st.var_filtered = var0;
    st.var_predicted = var0;
    st.var_process = var_process;
    return st;
}

KalmanState kalman_update(const KalmanState& state, cplx k_measured, double var_measured)
{
    const double prior_precision = 1.0 / state.var_predicted; // exactly 0 for an infinite prior
    const double meas_precision = 1.0 / var_measured;
    const double precision = prior_precision + meas_precision;

    KalmanState next = state;
    next.var_filtered = 1.0 / precision;
    const double w_prior = prior_precision / precision;
    const double w_meas = meas_precision / precision;
    next.k_predicted = w_prior * state.k_predicted + w_meas * k_measured;
    next.var_predicted = next.var_filtered + state.var_process;
    next.k_filtered = next.k_predicted;
    next.frame_index = state.frame_index + 1;
    return next;
}

KalmanStep kalman_frame(const KalmanState& state, const FrameObservation& frame)
{
    if (frame.size() < 2) {
        throw std::invalid_argument("kalman_frame needs at least two sideband pairs");
    }
    double var_sig = 0.0;
    double var_img = 0.0;
    for (const auto& p : frame.pairs) {
        const auto y = reconstruct(p, state.k_predicted);
        var_sig += y.signal_power();
        var_img += y.image_power();
    }
    const auto n = static_cast<double>(frame.size());
    var_sig /= n;
    var_img /= n;

    KalmanStep step;
    try {
        const auto k = kp_to_kq(estimate_kp(frame));
        const double sq2 = sigma_q_sq(frame.size(), var_sig, var_img);
        step.state = kalman_update(state, k.k_q, sq2);
        step.estimate = FrameEstimate{k.k_q, sq2, var_sig, var_img};
    } catch (const ModelViolation&) {
        step.state = state;
        ++step.state.frame_index;
        ++step.state.rejected_frames;
    } catch (const std::domain_error&) {
        step.state = state;
        ++step.state.frame_index;
        ++step.state.rejected_frames;
    }
    return step;
}

SidebandPowers reconstructed_powers(const FrameObservation& frame, cplx k_hat)
{
    SidebandPowers out;
    for (const auto& p : frame.pairs) {
        const auto y = reconstruct(p, k_hat);
        out.signal += y.signal_power();
        out.image += y.image_power();
    }
    return out;
}

} // namespace iqcal
