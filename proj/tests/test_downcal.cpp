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

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

using namespace iqcal;

namespace {

const ImbalanceParams ref_mixer = ImbalanceParams::from_degrees(0.961, 0.96);

// N pairs of circular Gaussian sidebands with the given powers, through the mixer matrix
FrameObservation gaussian_frame(std::mt19937_64& rng, std::size_t n, double var_sig, double var_img,
                                const ImbalanceParams& imb)
{
    FrameObservation f;
    f.samples_per_pair = 1;
    for (std::size_t i = 0; i < n; ++i) {
        const cplx ys = oracle::circular_normal(rng, var_sig);
        const cplx yi = oracle::circular_normal(rng, var_img);
        f.pairs.push_back(downconvert_matrix({ys, yi, 1.0}, imb));
    }
    return f;
}

} // namespace

TEST_CASE("reconstruct")
{
    const SidebandPair z{cplx(0.3, 0.1), cplx(-0.02, 0.05), 1.0};
    const auto same = reconstruct(z, 0.0);
    CHECK(same.signal == z.signal);
    CHECK(same.image_conj == z.image_conj);

    const cplx k = leakage_ratio(ref_mixer);
    const auto zz = downconvert_matrix({cplx(0.7, -0.4), 0.0, 1.0}, ref_mixer);
    const auto y = reconstruct(zz, k);
    CHECK(std::abs(y.image_conj) <= 1e-12 * std::abs(y.signal));

    // wrong estimate: compare with [[1, -kh], [-kh*, 1]] multiplied out by hand
    const cplx kh(0.01, 0.002);
    const auto got = reconstruct(zz, kh);
    const cplx s = zz.signal - kh * zz.image_conj;
    const cplx i = -std::conj(kh) * zz.signal + zz.image_conj;
    CHECK(std::abs(got.signal - s) < 1e-16);
    CHECK(std::abs(got.image_conj - i) < 1e-16);
    // residual image relative to signal is (k - kh)* / (1 - kh k*)
    const cplx ratio = std::conj(k - kh) / (1.0 - std::conj(k) * kh);
    CHECK(std::abs(got.image_conj / got.signal - ratio) < 1e-12);
}

TEST_CASE("estimate_kp edge cases")
{
    FrameObservation ones;
    ones.pairs.assign(8, {1.0, 1.0, 1.0});
    CHECK(estimate_kp(ones) == cplx(0.25, 0.0));

    FrameObservation single;
    single.pairs.assign(1, {1.0, 1.0, 1.0});
    CHECK_THROWS_AS(estimate_kp(single), std::invalid_argument);

    FrameObservation zeros;
    zeros.pairs.assign(4, {0.0, 0.0, 1.0});
    CHECK_THROWS_AS(estimate_kp(zeros), ModelViolation);
}

TEST_CASE("balanced mixer with uncorrelated sidebands gives k_p near zero")
{
    std::mt19937_64 rng(31);
    const std::size_t n = 10000;
    const auto f = gaussian_frame(rng, n, 1.0, 1.0, {});
    CHECK(std::abs(estimate_kp(f)) < 3.0 * std::sqrt(sigma_q_sq(n, 1.0, 1.0)));
}

TEST_CASE("kp_to_kq")
{
    const auto z = kp_to_kq(0.0);
    CHECK(z.k_q == cplx(0.0, 0.0));
    CHECK(z.gain == 1.0);
    CHECK(z.phase == 0.0);
    CHECK_THROWS_AS(kp_to_kq(cplx(0.3, 0.0)), ModelViolation);
}

TEST_CASE("round trip through exact forward statistics")
{
    // Y pairs (1, +c) and (1, -c) make <Y_m Y_-m> vanish exactly
    auto stats = [](const ImbalanceParams& imb, cplx c) {
        FrameObservation f;
        f.pairs.push_back(downconvert_matrix({1.0, c, 1.0}, imb));
        f.pairs.push_back(downconvert_matrix({1.0, -c, 1.0}, imb));
        return estimate_kp(f);
    };
    for (int gi = 0; gi <= 10; ++gi) {
        for (int pi_ = 0; pi_ <= 10; ++pi_) {
            const double g = 0.9 + 0.02 * gi;
            const double phi = (-5.0 + pi_) * pi / 180.0;
            const ImbalanceParams imb{g, phi};
            const cplx kp = stats(imb, cplx(0.3, -0.8));
            CHECK(std::abs(kp - oracle::kp(g, phi)) < 1e-14);
            const auto est = kp_to_kq(kp);
            CHECK(std::abs(est.gain - g) < 1e-10);
            CHECK(std::abs(est.phase - phi) < 1e-10);
            CHECK(std::abs(est.k_q - oracle::kq(g, phi)) < 1e-10);
        }
    }
}

TEST_CASE("chained estimate on a tone-driven frame")
{
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> ph(-pi, pi);
    const std::size_t n = 1000;
    const double noise = 1e-3;
    FrameObservation f;
    for (std::size_t i = 0; i < n; ++i) {
        const cplx ys = std::polar(1.0, ph(rng)) + oracle::circular_normal(rng, noise);
        const cplx yi = oracle::circular_normal(rng, noise);
        f.pairs.push_back(downconvert_matrix({ys, yi, 1.0}, ref_mixer));
    }
    const auto est = kp_to_kq(estimate_kp(f));
    const double sq = sigma_q_sq(n, 1.0 + noise, noise);
    CHECK(std::abs(est.k_q - leakage_ratio(ref_mixer)) < 3.0 * std::sqrt(sq));
}

TEST_CASE("sigma_q_sq")
{
    CHECK(sigma_q_sq(1, 2.0, 2.0) == doctest::Approx(0.25));
    CHECK(sigma_q_sq(100, 0.5, 0.5) == doctest::Approx(1.0 / 400));
    CHECK(sigma_q_sq(10, 10.0, 1.0) == doctest::Approx(1.0 / (10 * 11 * 1.1)));
    CHECK_THROWS_AS(sigma_q_sq(10, 0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(sigma_q_sq(0, 1.0, 1.0), std::domain_error);
}

TEST_CASE("init_kalman")
{
    const auto cold = init_kalman(0.0, std::numeric_limits<double>::infinity(), 1e-6);
    CHECK(cold.k_predicted == cplx(0.0, 0.0));
    CHECK(std::isinf(cold.var_predicted));
    CHECK(cold.var_process == 1e-6);
    CHECK_THROWS_AS(init_kalman(0.0, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(init_kalman(0.0, 1.0, -1.0), std::invalid_argument);
}

TEST_CASE("infinite prior hands the first frame to the measurement")
{
    std::mt19937_64 rng(33);
    const auto cold = init_kalman(0.0, std::numeric_limits<double>::infinity(), 0.0);
    const auto step = kalman_frame(cold, gaussian_frame(rng, 64, 1.0, 0.5, ref_mixer));
    REQUIRE(step.estimate);
    CHECK(step.state.k_filtered == step.estimate->k_raw);
    CHECK(step.state.var_filtered == step.estimate->sigma_q2);
    CHECK(step.state.frame_index == 1);
}

TEST_CASE("warm start blends by precision")
{
    const cplx k0(0.02, -0.01);
    const cplx km(0.025, -0.004);
    const auto st = kalman_update(init_kalman(k0, 4e-6, 0.0), km, 1e-6);
    const cplx expect = (k0 / 4e-6 + km / 1e-6) / (1 / 4e-6 + 1 / 1e-6);
    CHECK(std::abs(st.k_filtered - expect) < 1e-17);
    CHECK(st.var_filtered == doctest::Approx(1.0 / (1 / 4e-6 + 1 / 1e-6)).epsilon(1e-15));
}

TEST_CASE("identical frames shrink the variance harmonically")
{
    const double sq = 3.7e-4;
    auto st = init_kalman(0.0, std::numeric_limits<double>::infinity(), 0.0);
    for (int i = 1; i <= 200; ++i) {
        st = kalman_update(st, cplx(0.01, 0.0), sq);
        CHECK(std::abs(st.var_filtered - sq / i) <= 1e-12 * sq / i);
        CHECK(st.var_predicted == st.var_filtered);
    }
}

TEST_CASE("process noise inflates the prediction")
{
    auto st = init_kalman(0.0, 1e-3, 2e-6);
    st = kalman_update(st, cplx(0.01, 0.0), 1e-3);
    CHECK(st.var_predicted == st.var_filtered + 2e-6);
}

TEST_CASE("Kalman invariants over a noisy run")
{
    std::mt19937_64 rng(34);
    auto st = init_kalman(0.0, std::numeric_limits<double>::infinity(), 0.0);
    double prev_var = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 100; ++i) {
        const double prior = st.var_predicted;
        const auto step = kalman_frame(st, gaussian_frame(rng, 64, 1.0, 1e-2, ref_mixer));
        REQUIRE(step.estimate);
        const double lhs = 1.0 / step.state.var_filtered;
        const double rhs = 1.0 / prior + 1.0 / step.estimate->sigma_q2;
        CHECK(std::abs(lhs - rhs) <= 4 * std::numeric_limits<double>::epsilon() * rhs);
        CHECK(step.state.var_filtered <= prev_var);
        CHECK(std::abs(step.state.k_filtered) < 1.0);
        prev_var = step.state.var_filtered;
        st = step.state;
    }
}

TEST_CASE("rejected frames leave the estimate alone")
{
    std::mt19937_64 rng(35);
    auto st = init_kalman(0.0, std::numeric_limits<double>::infinity(), 0.0);
    st = kalman_frame(st, gaussian_frame(rng, 64, 1.0, 0.1, ref_mixer)).state;

    FrameObservation zeros;
    zeros.pairs.assign(16, {0.0, 0.0, 1.0});
    const auto a = kalman_frame(st, zeros);
    CHECK_FALSE(a.estimate);
    CHECK(a.state.k_filtered == st.k_filtered);
    CHECK(a.state.var_filtered == st.var_filtered);
    CHECK(a.state.frame_index == st.frame_index + 1);
    CHECK(a.state.rejected_frames == st.rejected_frames + 1);

    // no image power at all after reconstruction: the variance formula is undefined
    auto cold = init_kalman(0.0, std::numeric_limits<double>::infinity(), 0.0);
    FrameObservation clean;
    for (int i = 0; i < 16; ++i) {
        clean.pairs.push_back({std::polar(1.0, 0.3 * i), 0.0, 1.0});
    }
    const auto b = kalman_frame(cold, clean);
    CHECK_FALSE(b.estimate);
    CHECK(b.state.k_filtered == cold.k_filtered);
}

TEST_CASE("filter is consistent over repeated runs")
{
    std::mt19937_64 rng(36);
    const cplx truth = leakage_ratio(ref_mixer);
    std::vector<double> ratio;
    for (int run = 0; run < 100; ++run) {
        auto st = init_kalman(0.0, std::numeric_limits<double>::infinity(), 0.0);
        for (int f = 0; f < 100; ++f) {
            st = kalman_frame(st, gaussian_frame(rng, 16, 1.0, 0.2, ref_mixer)).state;
        }
        ratio.push_back(std::abs(st.k_filtered - truth) / std::sqrt(st.var_filtered));
    }
    std::nth_element(ratio.begin(), ratio.begin() + 50, ratio.end());
    CHECK(ratio[50] < 3.0);
}

TEST_CASE("reconstructed_powers")
{
    FrameObservation f;
    f.pairs = {{1.0, 0.1, 1.0}, {cplx(0, 2), 0.0, 1.0}};
    const auto p = reconstructed_powers(f, 0.0);
    CHECK(p.signal == doctest::Approx(5.0));
    CHECK(p.image == doctest::Approx(0.01));
    CHECK(p.ilr() == doctest::Approx(0.002));
}
