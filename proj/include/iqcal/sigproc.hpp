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

// Complex-signal primitives: tone synthesis, coherent single-bin demodulation
// (a digital lock-in), ILR arithmetic and seeded Gaussian noise.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace iqcal {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;

/// Uniformly sampled record. A real RF record is a ComplexSignal whose
/// imaginary parts are exactly zero.
struct ComplexSignal {
    std::vector<cplx> samples;
    double sample_rate = 1.0; // Hz

    std::size_t size() const noexcept { return samples.size(); }
    bool is_real() const noexcept;
};

/// One (signal, image) pair of complex lines at mirrored offsets +offset / -offset.
///
/// `image_conj` holds the *conjugate* of the mirror-band line, i.e. the second
/// entry of the sideband vectors used by the mixer matrix models. `offset` is
/// signed: a pair whose signal slot sits on a negative frequency is valid.
struct SidebandPair {
    cplx signal{};
    cplx image_conj{};
    double offset = 0.0; // Hz

    double image_power() const noexcept { return std::norm(image_conj); }
    double signal_power() const noexcept { return std::norm(signal); }
};

/// Integer bin index of `freq` on an n-sample grid, if it is coherent.
std::optional<std::int64_t> coherent_bin(double freq, std::size_t n, double sample_rate);

inline bool is_coherent(double freq, std::size_t n, double sample_rate)
{
    return coherent_bin(freq, n, sample_rate).has_value();
}

/// Precomputed lock-in reference for one coherent bin on an n-sample grid.
/// Phases are reduced with integer arithmetic, so distinct bins are orthogonal
/// to rounding precision regardless of record length.
class CoherentBin {
public:
    /// Throws std::invalid_argument if `freq` is not coherent on the grid.
    CoherentBin(double freq, std::size_t n, double sample_rate);

    /// (1/n) * sum_k block[k] * exp(-j 2 pi f k / fs).
    cplx demod(std::span<const cplx> block) const;

    /// exp(+j 2 pi f k / fs).
    const cplx& phasor(std::size_t k) const { return table_[k]; }

    double frequency() const noexcept { return freq_; }
    std::size_t length() const noexcept { return table_.size(); }

private:
    double freq_;
    std::vector<cplx> table_;
};

/// samples[k] = amplitude * exp(j (2 pi freq k / fs + phase)).
/// Throws std::out_of_range when |freq| >= fs/2.
ComplexSignal synth_tone(double freq, double amplitude, double phase, double sample_rate, std::size_t n_samples);

/// Coherent single-bin demodulation over the whole record.
/// Throws std::invalid_argument when freq is not on the record's bin grid.
cplx demod_bin(const ComplexSignal& sig, double freq);

/// Image leakage ratio in dB from band powers; image_power == 0 gives -inf.
double ilr_db(double image_power, double signal_power);

/// Linear ILR to dB (0 -> -inf).
double to_db(double power_ratio);

/// Circular complex white Gaussian noise with total per-sample variance `variance`.
ComplexSignal awgn(std::size_t n_samples, double variance, std::uint64_t seed, double sample_rate = 1.0);

} // namespace iqcal
