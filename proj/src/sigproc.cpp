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

#include "iqcal/sigproc.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace iqcal {

bool ComplexSignal::is_real() const noexcept
{
    for (const auto& s : samples) {
        if (s.imag() != 0.0) {
            return false;
        }
    }
    return true;
}

std::optional<std::int64_t> coherent_bin(double freq, std::size_t n, double sample_rate)
{
    if (n == 0 || !(sample_rate > 0.0) || !std::isfinite(freq)) {
        return std::nullopt;
    }
    const double cycles = freq * static_cast<double>(n) / sample_rate;
    const double nearest = std::round(cycles);
    if (std::abs(cycles - nearest) > 1e-9 * std::max(1.0, std::abs(cycles))) {
        return std::nullopt;
    }
    return static_cast<std::int64_t>(nearest);
}

namespace {

// exp(j 2 pi ((m k) mod n) / n) for k = 0..n-1
std::vector<cplx> grid_phasors(std::int64_t m, std::size_t n)
{
    std::vector<cplx> table(n);
    const auto nn = static_cast<std::int64_t>(n);
    std::int64_t idx = 0;
    const std::int64_t step = ((m % nn) + nn) % nn;
    for (std::size_t k = 0; k < n; ++k) {
        const double angle = 2.0 * pi * static_cast<double>(idx) / static_cast<double>(n);
        table[k] = {std::cos(angle), std::sin(angle)};
        idx += step;
        if (idx >= nn) {
            idx -= nn;
        }
    }
    return table;
}

} // namespace

CoherentBin::CoherentBin(double freq, std::size_t n, double sample_rate) : freq_(freq)
{
    const auto bin = coherent_bin(freq, n, sample_rate);
    if (!bin) {
        throw std::invalid_argument("frequency " + std::to_string(freq) + " Hz is not coherent on a " +
                                    std::to_string(n) + "-sample grid at " + std::to_string(sample_rate) + " Hz");
    }
    table_ = grid_phasors(*bin, n);
}

cplx CoherentBin::demod(std::span<const cplx> block) const
{
    if (block.size() != table_.size()) {
        throw std::invalid_argument("demod block length does not match the bin grid");
    }
    double re = 0.0;
    double im = 0.0;
    for (std::size_t k = 0; k < block.size(); ++k) {
        const cplx& s = block[k];
        const cplx& p = table_[k];
        // s * conj(p)
        re += s.real() * p.real() + s.imag() * p.imag();
        im += s.imag() * p.real() - s.real() * p.imag();
    }
    const double inv = 1.0 / static_cast<double>(block.size());
    return {re * inv, im * inv};
}

ComplexSignal synth_tone(double freq, double amplitude, double phase, double sample_rate, std::size_t n_samples)
{
    if (!(sample_rate > 0.0)) {
        throw std::invalid_argument("sample_rate must be positive");
    }
    if (n_samples == 0) {
        throw std::invalid_argument("synth_tone needs at least one sample");
    }
    if (!(std::abs(freq) < sample_rate / 2.0)) {
        throw std::out_of_range("tone frequency " + std::to_string(freq) + " Hz is at or beyond Nyquist");
    }
    ComplexSignal out;
    out.sample_rate = sample_rate;
    out.samples.resize(n_samples);
    const cplx rot = std::polar(amplitude, phase);
    if (const auto bin = coherent_bin(freq, n_samples, sample_rate)) {
        const auto table = grid_phasors(*bin, n_samples);
        for (std::size_t k = 0; k < n_samples; ++k) {
            out.samples[k] = rot * table[k];
        }
    } else {
        for (std::size_t k = 0; k < n_samples; ++k) {
            double cycles = freq * static_cast<double>(k) / sample_rate;
            cycles -= std::floor(cycles);
            out.samples[k] = rot * std::polar(1.0, 2.0 * pi * cycles);
        }
    }
    return out;
}

cplx demod_bin(const ComplexSignal& sig, double freq)
{
    if (sig.samples.empty()) {
        throw std::invalid_argument("demod_bin on an empty record");
    }
    const CoherentBin bin(freq, sig.size(), sig.sample_rate);
    return bin.demod(sig.samples);
}

double ilr_db(double image_power, double signal_power)
{
    if (!(signal_power > 0.0)) {
        throw std::domain_error("ILR needs a positive signal power");
    }
    if (image_power < 0.0) {
        throw std::domain_error("ILR needs a non-negative image power");
    }
    return to_db(image_power / signal_power);
}

double to_db(double power_ratio)
{
    if (power_ratio == 0.0) {
        return -std::numeric_limits<double>::infinity();
    }
    return 10.0 * std::log10(power_ratio);
}

ComplexSignal awgn(std::size_t n_samples, double variance, std::uint64_t seed, double sample_rate)
{
    if (variance < 0.0) {
        throw std::invalid_argument("noise variance must be non-negative");
    }
    ComplexSignal out;
    out.sample_rate = sample_rate;
    out.samples.assign(n_samples, cplx{});
    if (variance == 0.0) {
        return out;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
    for (auto& s : out.samples) {
        const double re = normal(rng);
        const double im = normal(rng);
        s = {re, im};
    }
    return out;
}

} // namespace iqcal
