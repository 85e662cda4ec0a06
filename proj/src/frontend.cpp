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

#include "iqcal/frontend.hpp"

#include "spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace iqcal {

ImbalanceParams ImbalanceParams::from_alpha_beta(double alpha, double beta)
{
    return {std::hypot(alpha, beta), std::atan2(beta, alpha)};
}

ImbalanceParams ImbalanceParams::from_degrees(double gain, double phase_deg)
{
    return {gain, phase_deg * pi / 180.0};
}

double ImbalanceParams::alpha() const noexcept { return gain * std::cos(phase); }
double ImbalanceParams::beta() const noexcept { return gain * std::sin(phase); }
cplx ImbalanceParams::j_factor() const noexcept { return 1.0 + std::polar(gain, -phase); }
cplx ImbalanceParams::k_factor() const noexcept { return 1.0 - std::polar(gain, phase); }
double ImbalanceParams::phase_deg() const noexcept { return phase * 180.0 / pi; }

void ImbalanceParams::validate() const
{
    if (!(gain > 0.0) || !std::isfinite(gain)) {
        throw std::invalid_argument("gain imbalance must be positive and finite");
    }
    if (!(phase > -pi && phase <= pi)) {
        throw std::invalid_argument("phase imbalance must lie in (-pi, pi]");
    }
}

Matrix2 Matrix2::operator*(const Matrix2& o) const noexcept
{
    return {m00 * o.m00 + m01 * o.m10, m00 * o.m01 + m01 * o.m11,
            m10 * o.m00 + m11 * o.m10, m10 * o.m01 + m11 * o.m11};
}

Matrix2 Matrix2::operator*(double s) const noexcept { return {m00 * s, m01 * s, m10 * s, m11 * s}; }

SidebandPair Matrix2::apply(const SidebandPair& v) const noexcept
{
    return {m00 * v.signal + m01 * v.image_conj, m10 * v.signal + m11 * v.image_conj, v.offset};
}

double Matrix2::max_abs_diff(const Matrix2& o) const noexcept
{
    return std::max({std::abs(m00 - o.m00), std::abs(m01 - o.m01), std::abs(m10 - o.m10), std::abs(m11 - o.m11)});
}

double Matrix2::max_abs() const noexcept
{
    return std::max({std::abs(m00), std::abs(m01), std::abs(m10), std::abs(m11)});
}

namespace {

void require_nonempty(const ComplexSignal& s, const char* what)
{
    if (s.samples.empty()) {
        throw std::invalid_argument(std::string(what) + ": empty record");
    }
}

} // namespace

ComplexSignal upconvert(const ComplexSignal& z, double lo_freq, const ImbalanceParams& imb)
{
    require_nonempty(z, "upconvert");
    const CoherentBin lo(lo_freq, z.size(), z.sample_rate);
    const cplx phase_rot = std::polar(1.0, imb.phase);
    ComplexSignal r;
    r.sample_rate = z.sample_rate;
    r.samples.resize(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) {
        const cplx& p = lo.phasor(k);
        const double c = p.real();
        const double s_shift = (p * phase_rot).imag(); // sin(W t + phi)
        r.samples[k] = {z.samples[k].real() * c - imb.gain * z.samples[k].imag() * s_shift, 0.0};
    }
    return r;
}

Matrix2 upconversion_matrix(const ImbalanceParams& imb)
{
    const cplx j = imb.j_factor();
    const cplx k = imb.k_factor();
    return Matrix2{std::conj(j), k, std::conj(k), j} * 0.25;
}

SidebandPair upconvert_matrix(const SidebandPair& z_pair, const ImbalanceParams& imb)
{
    return upconversion_matrix(imb).apply(z_pair);
}

ComplexSignal downconvert(const ComplexSignal& r, double lo_freq, const ImbalanceParams& imb)
{
    require_nonempty(r, "downconvert");
    if (!r.is_real()) {
        throw std::invalid_argument("downconvert: RF input must be real-valued");
    }
    if (!(lo_freq > 0.0) || lo_freq > r.sample_rate / 4.0) {
        throw std::invalid_argument("downconvert: lo_freq must lie in (0, fs/4]");
    }
    const CoherentBin lo(lo_freq, r.size(), r.sample_rate);
    const cplx phase_rot = std::polar(1.0, imb.phase);
    ComplexSignal z;
    z.sample_rate = r.sample_rate;
    z.samples.resize(r.size());
    for (std::size_t k = 0; k < r.size(); ++k) {
        const cplx& p = lo.phasor(k);
        const double s_shift = (p * phase_rot).imag();
        const double x = r.samples[k].real();
        z.samples[k] = {x * p.real(), -imb.gain * x * s_shift};
    }
    detail::apply_spectral_gain(z.samples, z.sample_rate,
                                [lo_freq](double f) { return std::abs(f) < lo_freq ? 1.0 : 0.0; });
    return z;
}

Matrix2 downconversion_matrix(const ImbalanceParams& imb)
{
    const cplx j = imb.j_factor();
    const cplx k = imb.k_factor();
    return Matrix2{j, k, std::conj(k), std::conj(j)} * 0.25;
}

SidebandPair downconvert_matrix(const SidebandPair& y_pair, const ImbalanceParams& imb)
{
    return downconversion_matrix(imb).apply(y_pair);
}

Matrix2 leakage_matrix(cplx k_q) { return {1.0, k_q, std::conj(k_q), 1.0}; }

Matrix2 scaling_matrix(const ImbalanceParams& imb)
{
    const cplx j = imb.j_factor();
    return {j, 0.0, 0.0, std::conj(j)};
}

cplx leakage_ratio(const ImbalanceParams& imb)
{
    const cplx g = std::polar(imb.gain, imb.phase);
    const cplx den = 1.0 + g;
    // polar(1, pi) leaves a rounding-sized imaginary part
    if (std::abs(den) <= 4.0 * std::numeric_limits<double>::epsilon()) {
        throw std::domain_error("leakage ratio undefined for G e^{j phi} = -1");
    }
    return (1.0 - g) / den;
}

ImbalanceParams imbalance_from_leakage(cplx k_q)
{
    const cplx den = 1.0 + k_q;
    if (std::abs(den) <= 4.0 * std::numeric_limits<double>::epsilon()) {
        throw std::domain_error("leakage ratio -1 has no finite imbalance");
    }
    const cplx g = (1.0 - k_q) / den;
    return {std::abs(g), std::arg(g)};
}

ImbalanceParams drift_step(const ImbalanceParams& imb, const DriftProcess& drift, std::uint64_t step_index)
{
    if (drift.sigma_gain < 0.0 || drift.sigma_phase < 0.0) {
        throw std::invalid_argument("drift standard deviations must be non-negative");
    }
    if (drift.sigma_gain == 0.0 && drift.sigma_phase == 0.0) {
        return imb;
    }
    std::seed_seq seq{static_cast<std::uint32_t>(drift.seed), static_cast<std::uint32_t>(drift.seed >> 32),
                      static_cast<std::uint32_t>(step_index), static_cast<std::uint32_t>(step_index >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double dg = normal(rng) * drift.sigma_gain;
    const double dphi = normal(rng) * drift.sigma_phase;

    ImbalanceParams out;
    out.gain = std::max(imb.gain + dg, 1e-9);
    double phi = std::remainder(imb.phase + dphi, 2.0 * pi); // [-pi, pi]
    if (phi <= -pi) {
        phi += 2.0 * pi;
    }
    out.phase = phi;
    return out;
}

ComplexSignal apply_channel(const ComplexSignal& r, const ChannelParams& chan, double carrier, double if_freq,
                            std::uint64_t seed)
{
    require_nonempty(r, "apply_channel");
    if (!r.is_real()) {
        throw std::invalid_argument("apply_channel: RF input must be real-valued");
    }
    if (!is_coherent(carrier + if_freq, r.size(), r.sample_rate) ||
        !is_coherent(carrier - if_freq, r.size(), r.sample_rate)) {
        throw std::invalid_argument("apply_channel: carrier +/- if_freq must be coherent on the record grid");
    }
    if (!std::isfinite(chan.atten_signal_db) || !std::isfinite(chan.atten_image_db)) {
        throw std::invalid_argument("apply_channel: attenuations must be finite");
    }
    if (chan.noise_variance < 0.0) {
        throw std::invalid_argument("apply_channel: noise variance must be non-negative");
    }
    ComplexSignal out = r;
    if (chan.atten_signal_db != 0.0 || chan.atten_image_db != 0.0) {
        const double g_sig = std::pow(10.0, -chan.atten_signal_db / 20.0);
        const double g_img = std::pow(10.0, -chan.atten_image_db / 20.0);
        detail::apply_spectral_gain(out.samples, out.sample_rate, [=](double f) {
            const double af = std::abs(f);
            if (af > carrier) {
                return g_sig;
            }
            return af < carrier ? g_img : 1.0;
        });
        for (auto& s : out.samples) {
            s.imag(0.0);
        }
    }
    if (chan.noise_variance > 0.0) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal(0.0, std::sqrt(chan.noise_variance));
        for (auto& s : out.samples) {
            s.real(s.real() + normal(rng));
        }
    }
    return out;
}

SidebandPair rf_sidebands(const ComplexSignal& r, double carrier, double offset)
{
    return {demod_bin(r, carrier + offset), std::conj(demod_bin(r, carrier - offset)), offset};
}

SidebandPair baseband_pair(const ComplexSignal& z, double offset)
{
    return {demod_bin(z, offset), std::conj(demod_bin(z, -offset)), offset};
}

} // namespace iqcal
