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

#include "spectral.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace iqcal::detail {

namespace {

class PlanCache {
public:
    ~PlanCache()
    {
        for (auto& [key, plan] : plans_) {
            fftw_destroy_plan(plan);
        }
    }

    fftw_plan get(std::size_t n, int sign)
    {
        std::lock_guard lock(mutex_);
        const auto key = std::make_pair(n, sign);
        if (auto it = plans_.find(key); it != plans_.end()) {
            return it->second;
        }
        // Planned on scratch storage; executed later through the new-array interface.
        std::vector<std::complex<double>> scratch(n);
        auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
        fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache& plan_cache()
{
    static PlanCache cache;
    return cache;
}

void execute(std::vector<std::complex<double>>& data, int sign)
{
    if (data.empty()) {
        return;
    }
    fftw_plan plan = plan_cache().get(data.size(), sign);
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, buf, buf);
}

} // namespace

void fft_forward(std::vector<std::complex<double>>& data) { execute(data, FFTW_FORWARD); }

void fft_inverse(std::vector<std::complex<double>>& data) { execute(data, FFTW_BACKWARD); }

double bin_frequency(std::size_t index, std::size_t n, double sample_rate)
{
    const double df = sample_rate / static_cast<double>(n);
    if (2 * index < n) {
        return static_cast<double>(index) * df;
    }
    if (2 * index == n) {
        return sample_rate / 2.0;
    }
    return (static_cast<double>(index) - static_cast<double>(n)) * df;
}

void apply_spectral_gain(std::vector<std::complex<double>>& data, double sample_rate,
                         const std::function<double(double)>& gain)
{
    const std::size_t n = data.size();
    fft_forward(data);
    const double norm = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        data[i] *= gain(bin_frequency(i, n, sample_rate)) * norm;
    }
    fft_inverse(data);
}

} // namespace iqcal::detail
