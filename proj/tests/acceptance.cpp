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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Pass criterion numbers as arguments to run a subset.

#include "iqcal/commands.hpp"
#include "iqcal/downcal.hpp"
#include "iqcal/frontend.hpp"
#include "iqcal/scenario.hpp"
#include "iqcal/trace.hpp"
#include "iqcal/upcal.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

using namespace iqcal;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
    void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string num(double v, int digits = 3)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

ScenarioConfig scenario(const char* name) { return load_config(std::string(IQCAL_SCENARIO_DIR "/") + name + ".cfg"); }

// runs the subcommand and reads its rows back from the emitted CSV
Trace emitted(const std::string& command, const ScenarioConfig& cfg)
{
    return read_trace_string(trace_to_string(run_command(command, cfg), OutputFormat::Csv));
}

double real(const Row& r, std::size_t i) { return std::get<double>(r.at(i)); }

// cal-up / cal-joint columns
constexpr std::size_t col_down = 3;
constexpr std::size_t col_true = 4;

Outcome closed_form_grid()
{
    Outcome o;
    const UpconverterProbe probe;
    const double va[] = {0.8, 0.9, 1.0, 1.1, 1.2};
    const double vb[] = {-0.1, -0.05, 0.0, 0.05, 0.1};
    int compared = 0;
    double worst = 0.0;
    for (const double a : va) {
        for (const double b : vb) {
            const auto imb = ImbalanceParams::from_alpha_beta(a, b);
            for (const double ah : va) {
                for (const double bh : vb) {
                    const double ref = oracle::db(oracle::up_ilr(a, b, ah, bh));
                    if (!(ref > -120.0)) {
                        continue;
                    }
                    const double sim = oracle::db(simulate_upconversion_ilr(imb, ah, bh, probe));
                    worst = std::max(worst, std::abs(sim - ref));
                    ++compared;
                }
            }
        }
    }
    o.require(worst <= 0.1, "worst deviation above 0.1 dB");
    o.require(compared >= 500, "too few grid points above -120 dB");
    o.note(std::to_string(compared) + " points, worst " + num(worst) + " dB");
    return o;
}

Outcome matrix_identities()
{
    Outcome o;
    double worst_decomp = 0.0;
    for (int gi = 0; gi <= 20; ++gi) {
        for (int pi_ = 0; pi_ <= 20; ++pi_) {
            const ImbalanceParams imb{0.5 + 0.05 * gi, (-30.0 + 3.0 * pi_) * pi / 180.0};
            const auto d = downconversion_matrix(imb);
            const auto f = leakage_matrix(leakage_ratio(imb)) * scaling_matrix(imb) * 0.25;
            worst_decomp = std::max(worst_decomp, f.max_abs_diff(d) / d.max_abs());
        }
    }

    const double fs = 10e6;
    const double lo = 2e6;
    const double w = 100e3;
    const std::size_t n = 1000;
    std::mt19937_64 rng(2);
    double worst_td = 0.0;
    auto rel = [](cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
    for (const double g : {0.8, 0.923, 0.961, 1.0, 1.13}) {
        for (const double deg : {-7.0, -2.03, 0.0, 0.96, 4.0}) {
            const auto imb = ImbalanceParams::from_degrees(g, deg);
            const cplx a = oracle::circular_normal(rng, 1.0);
            const cplx b = oracle::circular_normal(rng, 1.0);
            const auto r = upconvert(oracle::two_tone(a, b, w, fs, n), lo, imb);
            const auto mu = upconvert_matrix({a, std::conj(b), w}, imb);
            worst_td = std::max(worst_td, rel(oracle::dft_bin(r.samples, lo + w, fs), mu.signal));
            worst_td = std::max(worst_td, rel(std::conj(oracle::dft_bin(r.samples, lo - w, fs)), mu.image_conj));

            const cplx ys = oracle::circular_normal(rng, 1.0);
            const cplx yi = oracle::circular_normal(rng, 1.0);
            const auto z = downconvert(oracle::rf_two_line(ys, yi, lo, w, fs, n), lo, imb);
            const auto md = downconvert_matrix({ys, std::conj(yi), w}, imb);
            worst_td = std::max(worst_td, rel(oracle::dft_bin(z.samples, w, fs), md.signal));
            worst_td = std::max(worst_td, rel(std::conj(oracle::dft_bin(z.samples, -w, fs)), md.image_conj));
        }
    }
    o.require(worst_decomp <= 1e-12, "decomposition off");
    o.require(worst_td <= 1e-10, "time-domain mixers disagree with the matrices");
    o.note("decomposition " + num(worst_decomp) + ", time domain " + num(worst_td));
    return o;
}

Outcome estimator_round_trip()
{
    Outcome o;
    double worst = 0.0;
    for (int gi = 0; gi <= 20; ++gi) {
        for (int pi_ = 0; pi_ <= 20; ++pi_) {
            const double g = 0.9 + 0.01 * gi;
            const double phi = (-5.0 + 0.5 * pi_) * pi / 180.0;
            const ImbalanceParams imb{g, phi};
            // pairs (1, +c), (1, -c): exact forward statistics
            FrameObservation f;
            f.pairs.push_back(downconvert_matrix({1.0, cplx(0.3, -0.8), 1.0}, imb));
            f.pairs.push_back(downconvert_matrix({1.0, cplx(-0.3, 0.8), 1.0}, imb));
            const auto est = kp_to_kq(estimate_kp(f));
            worst = std::max({worst, std::abs(est.k_q - oracle::kq(g, phi)), std::abs(est.gain - g),
                              std::abs(est.phase - phi)});
        }
    }
    o.require(worst <= 1e-10, "inversion error above 1e-10");
    o.note("441 points, worst " + num(worst));
    return o;
}

Outcome down_convergence()
{
    Outcome o;
    const auto cfg = scenario("cal_down");
    const auto t = emitted("cal-down", cfg);
    o.require(t.rows.size() >= 100, "fewer than 100 frames");
    if (t.rows.size() < 100) {
        return o;
    }
    const auto& r = t.rows[99];
    const double ilr = real(r, 1);
    const double g = real(r, 5);
    const double ph = real(r, 6);
    const double floor_db = -65.0;
    const double g_err = std::abs(g - cfg.joint.down_imb.gain);
    const double ph_err = std::abs(ph - cfg.joint.down_imb.phase_deg());
    o.require(std::abs(ilr - floor_db) <= 3.0, "frame 100 ILR not within 3 dB of the floor");
    o.require(g_err <= 0.002, "gain error above 0.002");
    o.require(ph_err <= 0.1, "phase error above 0.1 deg");
    o.note("frame 100 " + num(ilr, 4) + " dB, gain err " + num(g_err) + ", phase err " + num(ph_err) + " deg");
    return o;
}

Outcome joint_convergence()
{
    Outcome o;
    const auto joint = emitted("cal-joint", scenario("joint_cfo"));
    o.require(!joint.rows.empty(), "empty joint trace");
    if (!joint.rows.empty()) {
        const double last = real(joint.rows.back(), col_down);
        o.require(last <= -60.0, "joint run ends above -60 dB");
        o.note("joint ends at " + num(last, 4) + " dB after " + std::to_string(joint.rows.size()));
    }

    const auto up_cfg = scenario("cal_up");
    o.require(up_cfg.joint.chan.noise_variance == 0.0, "cal-up scenario is not noise-free");
    const auto up = emitted("cal-up", up_cfg);
    std::size_t reached = 0;
    for (std::size_t i = 0; i < up.rows.size() && i < 10; ++i) {
        if (real(up.rows[i], col_down) <= -70.0) {
            reached = i + 1;
            break;
        }
    }
    o.require(reached != 0, "cal-up does not reach -70 dB within 10 measurements");
    o.note("cal-up below -70 dB at measurement " + std::to_string(reached));
    return o;
}

Outcome tracking_behaviours()
{
    Outcome o;

    const auto cfo = emitted("cal-joint", scenario("track_cfo"));
    int tracked = 0;
    double worst = 0.0;
    for (const auto& r : cfo.rows) {
        if (real(r, col_true) >= -60.0) {
            worst = std::max(worst, std::abs(real(r, col_down) - real(r, col_true)));
            ++tracked;
        }
    }
    o.require(tracked >= 3 && worst <= 3.0, "(a) CFO trace leaves the diagonal");
    o.note("(a) " + std::to_string(tracked) + " rows, worst " + num(worst) + " dB");

    const auto att = emitted("cal-joint", scenario("track_atten"));
    double lo_off = 1e9;
    double hi_off = -1e9;
    double sum = 0.0;
    int n_att = 0;
    for (const auto& r : att.rows) {
        if (real(r, col_true) >= -60.0) {
            const double off = real(r, col_down) - real(r, col_true);
            lo_off = std::min(lo_off, off);
            hi_off = std::max(hi_off, off);
            sum += off;
            ++n_att;
        }
    }
    const double mean_off = n_att > 0 ? sum / n_att : 0.0;
    o.require(n_att >= 3 && std::abs(mean_off - 3.0) <= 0.5 && lo_off >= 2.0 && hi_off <= 4.0,
              "(b) attenuation offset is not a steady 3 dB");
    o.note("(b) offset " + num(mean_off) + " dB in [" + num(lo_off) + ", " + num(hi_off) + "]");

    const auto noise = emitted("cal-joint", scenario("track_noise"));
    int good_high = 0;
    bool bad_high = false;
    double deep_err = 0.0;
    for (const auto& r : noise.rows) {
        const double tr = real(r, col_true);
        const double err = std::abs(real(r, col_down) - tr);
        if (tr >= -35.0) {
            ++good_high;
            bad_high = bad_high || err > 3.0;
        }
        if (tr < -40.0) {
            deep_err = std::max(deep_err, err);
        }
    }
    o.require(good_high >= 1 && !bad_high, "(c) noise-gated trace off the diagonal at high ILR");
    o.require(deep_err > 3.0, "(c) noise-gated trace does not diverge below -40 dB");
    o.note("(c) worst deviation below -40 dB " + num(deep_err) + " dB");

    const auto naive = emitted("cal-joint", scenario("track_naive"));
    double naive_err = 0.0;
    for (const auto& r : naive.rows) {
        if (real(r, col_true) >= -60.0) {
            naive_err = std::max(naive_err, std::abs(real(r, col_down) - real(r, col_true)));
        }
    }
    o.require(naive_err > 3.0, "(d) uncorrected run tracks the diagonal");
    o.note("(d) uncorrected worst deviation " + num(naive_err) + " dB");
    return o;
}

Outcome estimator_variance()
{
    Outcome o;
    const ImbalanceParams mixer = ImbalanceParams::from_degrees(0.961, 0.96);
    const cplx truth = leakage_ratio(mixer);
    const double var_img = 0.1; // circular Gaussian bands, power ratio 10
    std::mt19937_64 rng(23);
    const int trials = 2000;
    double mc16 = 0.0;
    double mc256 = 0.0;
    for (const std::size_t n : {std::size_t{16}, std::size_t{64}, std::size_t{256}}) {
        double err = 0.0;
        double predicted = 0.0;
        int used = 0;
        for (int t = 0; t < trials; ++t) {
            FrameObservation f;
            f.samples_per_pair = 1;
            for (std::size_t i = 0; i < n; ++i) {
                const cplx ys = oracle::circular_normal(rng, 1.0);
                const cplx yi = oracle::circular_normal(rng, var_img);
                f.pairs.push_back(downconvert_matrix({ys, yi, 1.0}, mixer));
            }
            const auto step = kalman_frame(init_kalman({}, 1.0, 0.0), f);
            if (!step.estimate) {
                continue;
            }
            err += std::norm(step.estimate->k_raw - truth);
            predicted += step.estimate->sigma_q2;
            ++used;
        }
        const double mc = err / used;
        const double pred = predicted / used;
        const double ratio = mc / pred;
        o.require(ratio >= 0.5 && ratio <= 2.0, "N = " + std::to_string(n) + " outside a factor of 2");
        o.note("N=" + std::to_string(n) + " ratio " + num(ratio));
        if (n == 16) {
            mc16 = mc;
        }
        if (n == 256) {
            mc256 = mc;
        }
    }
    const double scaling = mc16 / mc256;
    o.require(scaling >= 8.0 && scaling <= 32.0, "variance does not scale as 1/N");
    o.note("var(16)/var(256) " + num(scaling));
    return o;
}

Outcome properties()
{
    Outcome o;
    std::mt19937_64 rng(88);
    std::uniform_real_distribution<double> u(-1.0, 1.0);

    // the update is the vertex of a unit-curvature parabola through two
    // samples, the shape of the cost near convergence
    double secant_err = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double m = u(rng);
        const double b = std::abs(u(rng));
        const double x0 = m + u(rng);
        double x1 = m + u(rng);
        if (std::abs(x1 - x0) < 0.05) {
            x1 = x0 + 0.05;
        }
        auto c = [&](double x) { return (x - m) * (x - m) + b; };
        secant_err = std::max(secant_err, std::abs(secant_minimum(x0, c(x0), x1, c(x1)) - m));
    }
    o.require(secant_err <= 1e-12, "secant step misses a quadratic minimum");

    double prec_err = 0.0;
    for (int run = 0; run < 100; ++run) {
        const double v0 = 0.5 + std::abs(u(rng));
        auto st = init_kalman({u(rng), u(rng)}, v0, 0.0);
        double precision = 1.0 / v0;
        cplx weighted = st.k_filtered / v0;
        for (int k = 0; k < 50; ++k) {
            const double v = 1e-3 + std::abs(u(rng));
            const cplx z{u(rng), u(rng)};
            st = kalman_update(st, z, v);
            precision += 1.0 / v;
            weighted += z / v;
        }
        prec_err = std::max({prec_err, std::abs(1.0 / st.var_filtered - precision) / precision,
                             std::abs(st.k_filtered - weighted / precision)});
    }
    o.require(prec_err <= 1e-12, "precisions do not add");

    double resid = 0.0;
    for (int i = 0; i < 500; ++i) {
        const ImbalanceParams mixer{1.0 + 0.2 * u(rng), 0.2 * u(rng)};
        const cplx k = leakage_ratio(mixer);
        const cplx y{u(rng), u(rng)};
        const auto sig_only = reconstruct(downconvert_matrix({y, 0.0, 1.0}, mixer), k);
        const auto img_only = reconstruct(downconvert_matrix({0.0, y, 1.0}, mixer), k);
        resid = std::max({resid, std::abs(sig_only.image_conj) / std::abs(sig_only.signal),
                          std::abs(img_only.signal) / std::abs(img_only.image_conj)});
    }
    o.require(resid <= 1e-12, "reconstruction with the true leakage leaves a residual");

    bool same = true;
    for (const auto& [cmd, name] : {std::pair{"drift", "drift_walk"}, std::pair{"cal-down", "cal_down"},
                                    std::pair{"cal-up", "cal_up"}, std::pair{"cal-joint", "joint_cfo"}}) {
        auto cfg = scenario(name);
        cfg.joint.upcal.max_iters = std::min<std::size_t>(cfg.joint.upcal.max_iters, 4);
        cfg.kalman_frames = std::min<std::size_t>(cfg.kalman_frames, 20);
        for (const auto fmt : {OutputFormat::Csv, OutputFormat::JsonLines}) {
            same = same && trace_to_string(run_command(cmd, cfg), fmt) == trace_to_string(run_command(cmd, cfg), fmt);
        }
    }
    o.require(same, "repeated runs differ");

    o.note("secant " + num(secant_err) + ", precision " + num(prec_err) + ", residual " + num(resid) +
           ", traces " + (same ? "identical" : "differ"));
    return o;
}

} // namespace

int main(int argc, char** argv)
{
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"closed-form ILR grid", closed_form_grid},
        {"matrix identities", matrix_identities},
        {"blind-estimator round trip", estimator_round_trip},
        {"downconversion Kalman convergence", down_convergence},
        {"joint CFO calibration", joint_convergence},
        {"up/down ILR behaviours", tracking_behaviours},
        {"per-frame estimator variance", estimator_variance},
        {"property suite", properties},
    };

    std::set<int> pick;
    for (int i = 1; i < argc; ++i) {
        pick.insert(std::atoi(argv[i]));
    }

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!pick.empty() && pick.count(id) == 0) {
            continue;
        }
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = criteria[i].second();
        } catch (const std::exception& e) {
            out.pass = false;
            out.note(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("criterion %d %s: %s (%s; %.1f s)\n", id, criteria[i].first, out.pass ? "PASS" : "FAIL",
                    out.detail.c_str(), secs);
        std::fflush(stdout);
        failed += out.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
