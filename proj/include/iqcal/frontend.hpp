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

// The analog plant under calibration: imbalanced up- and downconversion
// mixers (time-domain and sideband-matrix forms), a random-walk drift of the
// imbalance, and a channel with per-sideband attenuation and additive noise.

#include "iqcal/sigproc.hpp"

#include <cstdint>

namespace iqcal {

/// One mixer's gain imbalance G and phase imbalance phi (radians).
struct ImbalanceParams {
    double gain = 1.0;
    double phase = 0.0;

    static ImbalanceParams from_alpha_beta(double alpha, double beta);
    static ImbalanceParams from_degrees(double gain, double phase_deg);

    double alpha() const noexcept; // G cos(phi)
    double beta() const noexcept;  // G sin(phi)
    cplx j_factor() const noexcept; // 1 + G e^{-j phi}
    cplx k_factor() const noexcept; // 1 - G e^{+j phi}
    double phase_deg() const noexcept;

    /// Throws std::invalid_argument unless G > 0 and phi in (-pi, pi].
    void validate() const;
};

/// 2x2 complex matrix acting on a sideband vector (first, second entry).
struct Matrix2 {
    cplx m00, m01, m10, m11;

    Matrix2 operator*(const Matrix2& o) const noexcept;
    Matrix2 operator*(double s) const noexcept;
    SidebandPair apply(const SidebandPair& v) const noexcept;
    double max_abs_diff(const Matrix2& o) const noexcept;
    double max_abs() const noexcept;
};

/// Random-walk drift of (G, phi); per-step standard deviations.
struct DriftProcess {
    double sigma_gain = 0.0;
    double sigma_phase = 0.0; // radians
    std::uint64_t seed = 0;
};

/// Path between the up- and downconverter.
struct ChannelParams {
    double atten_signal_db = 0.0; // upper sideband
    double atten_image_db = 0.0;  // lower sideband
    double noise_variance = 0.0;  // real additive Gaussian noise, per sample
    double cfo = 0.0;             // downconversion LO detuning (Hz); down LO = up LO - cfo
};

/// r(t) = Re{ z(t) [cos(W t) + j G sin(W t + phi)] }. Returns a real record.
ComplexSignal upconvert(const ComplexSignal& z, double lo_freq, const ImbalanceParams& imb);

/// (1/4) [[J*, K], [K*, J]] with J, K of `imb`.
Matrix2 upconversion_matrix(const ImbalanceParams& imb);

/// Maps the baseband pair (z[+w], z*[-w]) to the two-sided RF lines
/// (c[W+w], c*[W-w]) produced by `upconvert`.
SidebandPair upconvert_matrix(const SidebandPair& z_pair, const ImbalanceParams& imb);

/// z(t) = LPF{ r(t) [cos(W t) - j G sin(W t + phi)] }.
///
/// The low-pass filter is an exact spectral projection: every bin at or above
/// lo_freq is discarded. Requires a real input and lo_freq <= fs/4 so that the
/// 2W mixing products cannot alias back below the cutoff.
ComplexSignal downconvert(const ComplexSignal& r, double lo_freq, const ImbalanceParams& imb);

/// (1/4) [[J, K], [K*, J*]].
Matrix2 downconversion_matrix(const ImbalanceParams& imb);

/// Maps RF peak amplitudes (Y_sig, Y*_img), i.e. r = Re{Y e^{j w t}} per
/// sideband, to the baseband pair (Z_sig, Z*_img) produced by `downconvert`.
SidebandPair downconvert_matrix(const SidebandPair& y_pair, const ImbalanceParams& imb);

/// [[1, k_q], [k_q*, 1]].
Matrix2 leakage_matrix(cplx k_q);

/// diag(J, J*).
Matrix2 scaling_matrix(const ImbalanceParams& imb);

/// k_q = K / J* = (1 - G e^{j phi}) / (1 + G e^{j phi}).
/// Throws std::domain_error when G e^{j phi} = -1.
cplx leakage_ratio(const ImbalanceParams& imb);

/// Inverse of leakage_ratio: G e^{j phi} = (1 - k_q) / (1 + k_q).
ImbalanceParams imbalance_from_leakage(cplx k_q);

/// One random-walk step. Deterministic in (drift.seed, step_index).
ImbalanceParams drift_step(const ImbalanceParams& imb, const DriftProcess& drift, std::uint64_t step_index);

/// Applies per-sideband attenuation around `carrier` and adds real white
/// Gaussian noise. Bins above the carrier are the upper (signal) sideband.
ComplexSignal apply_channel(const ComplexSignal& r, const ChannelParams& chan, double carrier, double if_freq,
                            std::uint64_t seed);

/// Two-sided lines (r[carrier+offset], r*[carrier-offset]) of a real record.
SidebandPair rf_sidebands(const ComplexSignal& r, double carrier, double offset);

/// (z[+offset], z*[-offset]) of a complex baseband record.
SidebandPair baseband_pair(const ComplexSignal& z, double offset);

} // namespace iqcal
