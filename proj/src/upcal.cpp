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

#include "iqcal/upcal.hpp"

#include "iqcal/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace iqcal {

ComplexSignal predistort(const ComplexSignal& x, double alpha_hat, double beta_hat)
{
    if (!(alpha_hat > 0.0)) {
        throw std::invalid_argument("predistort: alpha_hat must be positive");
    }
    const double mix = beta_hat / alpha_hat;
    const double scale = 1.0 / alpha_hat;
    ComplexSignal z;
    z.sample_rate = x.sample_rate;
    z.samples.resize(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double xi = x.samples[k].real();
        const double xq = x.samples[k].imag();
        z.samples[k] = {xi + mix * xq, xq * scale};
    }
    return z;
}

double ilr_closed_form(double alpha, double beta, double alpha_hat, double beta_hat)
{
    const double db = beta - beta_hat;
    const double num = (alpha - alpha_hat) * (alpha - alpha_hat) + db * db;
    const double den = (alpha + alpha_hat) * (alpha + alpha_hat) + db * db;
    if (den == 0.0) {
        throw std::domain_error("ILR closed form: zero denominator");
    }
    return num / den;
}

double cost(double alpha_hat, double ilr_measured)
{
    if (ilr_measured < 0.0) {
        throw std::invalid_argument("cost: ILR must be non-negative");
    }
    return 4.0 * alpha_hat * alpha_hat * ilr_measured;
}

double secant_minimum(double x_older, double c_older, double x_newer, double c_newer)
{
    const double dx = x_older - x_newer;
    if (dx == 0.0) {
        throw DegenerateSecant("secant step with coincident parameter values");
    }
    return 0.5 * (x_older + x_newer - (c_older - c_newer) / dx);
}

double update_alpha(const PredistortState& state)
{
    const auto& h = state.cost_history;
    for (std::size_t i = h.size(); i-- > 1;) {
        if (h[i - 1].beta_hat == h[i].beta_hat) {
            return secant_minimum(h[i - 1].alpha_hat, h[i - 1].cost, h[i].alpha_hat, h[i].cost);
        }
    }
    throw std::invalid_argument("update_alpha: no two measurements share a beta_hat");
}

double update_beta(const PredistortState& state)
{
    const auto& h = state.cost_history;
    for (std::size_t i = h.size(); i-- > 1;) {
        if (h[i - 1].alpha_hat == h[i].alpha_hat) {
            return secant_minimum(h[i - 1].beta_hat, h[i - 1].cost, h[i].beta_hat, h[i].cost);
        }
    }
    throw std::invalid_argument("update_beta: no two measurements share an alpha_hat");
}

void UpcalOptions::validate() const
{
    if (alpha0 == alpha1) {
        throw std::invalid_argument("upcal: alpha0 and alpha1 must differ");
    }
    if (beta0 == beta1) {
        throw std::invalid_argument("upcal: beta0 and beta1 must differ");
    }
    if (!(alpha0 > 0.0) || !(alpha1 > 0.0)) {
        throw std::invalid_argument("upcal: initial alpha values must be positive");
    }
    if (max_iters < 1) {
        throw std::invalid_argument("upcal: max_iters must be at least 1");
    }
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("upcal: epsilon must be positive");
    }
}

PredistortState calibrate_upconversion(const IlrMeasurement& plant, const UpcalOptions& options)
{
    options.validate();
    PredistortState st;
    st.alpha_hat = options.alpha0;
    st.beta_hat = options.beta0;
    st.alpha_prev = options.alpha0;
    st.beta_prev = options.beta0;

    // true when the run is finished
    auto measure = [&](double a, double b) {
        st.alpha_prev = st.alpha_hat;
        st.beta_prev = st.beta_hat;
        st.alpha_hat = a;
        st.beta_hat = b;
        const double ilr = plant(a, b);
        st.cost_history.push_back({a, b, ilr, cost(a, ilr)});
        return to_db(ilr) <= options.threshold_db || st.cost_history.size() >= options.max_iters;
    };

    if (measure(options.alpha0, options.beta0) || measure(options.alpha1, options.beta0) ||
        measure(options.alpha1, options.beta1)) {
        return st;
    }

    st.phase = SecantPhase::UpdateAlpha;
    for (;;) {
        const bool alpha_turn = st.phase == SecantPhase::UpdateAlpha;
        const double current = alpha_turn ? st.alpha_hat : st.beta_hat;
        double next = 0.0;
        try {
            next = alpha_turn ? update_alpha(st) : update_beta(st);
        } catch (const DegenerateSecant&) {
            next = current + options.epsilon;
            ++st.perturbations;
        }
        if (!std::isfinite(next) || (alpha_turn && !(next > 0.0))) {
            next = current + options.epsilon;
            ++st.perturbations;
        }
        const bool done = alpha_turn ? measure(next, st.beta_hat) : measure(st.alpha_hat, next);
        st.phase = alpha_turn ? SecantPhase::UpdateBeta : SecantPhase::UpdateAlpha;
        if (done) {
            return st;
        }
    }
}

double simulate_upconversion_ilr(const ImbalanceParams& imb, double alpha_hat, double beta_hat,
                                 const UpconverterProbe& probe)
{
    const auto x = synth_tone(probe.if_freq, probe.amplitude, 0.0, probe.sample_rate, probe.n_samples);
    const auto r = upconvert(predistort(x, alpha_hat, beta_hat), probe.lo_freq, imb);
    const auto lines = rf_sidebands(r, probe.lo_freq, probe.if_freq);
    return lines.image_power() / lines.signal_power();
}

} // namespace iqcal
