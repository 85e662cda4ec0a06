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

// In-place FFT used for ideal (brick-wall) spectral masks. Internal to the
// library; backed by FFTW with a process-wide plan cache.

#include <complex>
#include <functional>
#include <vector>

namespace iqcal::detail {

void fft_forward(std::vector<std::complex<double>>& data);

/// Unnormalised inverse transform.
void fft_inverse(std::vector<std::complex<double>>& data);

/// Signed frequency of FFT bin `index` on an n-point grid.
double bin_frequency(std::size_t index, std::size_t n, double sample_rate);

/// Multiplies every bin by gain(f) and transforms back, normalised.
void apply_spectral_gain(std::vector<std::complex<double>>& data, double sample_rate,
                         const std::function<double(double)>& gain);

} // namespace iqcal::detail
