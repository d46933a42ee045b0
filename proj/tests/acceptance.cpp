/*
 *   Copyright 2026 The beamlab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


// Acceptance report: one PASS/FAIL line per headline criterion.
//
//   acceptance [--quick]
//
// --quick divides every trial count by 10 for a fast smoke run; the verdicts
// are only meaningful at full size. Exit status is 0 when every criterion passes.

#include "beamlab/harness.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

using namespace beamlab;

namespace
{

int g_failures = 0;

void verdict(bool ok, const std::string& name, const std::string& detail)
{
    std::printf("%s  %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    g_failures += !ok;
}

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

bool within(double value, double target, double rel)
{
    return std::abs(value - target) <= rel * target;
}

const Table& find_table(const std::vector<Table>& tables, const std::string& name)
{
    for (const auto& t : tables)
        if (t.name == name)
            return t;
    throw std::runtime_error("missing table " + name);
}

/// Column lookup by header name, keyed on (snr_db, policy).
struct Summary
{
    std::map<std::pair<double, std::string>, std::map<std::string, double>> cells;

    explicit Summary(const Table& t)
    {
        for (const auto& row : t.rows)
        {
            std::map<std::string, double> values;
            for (std::size_t c = 0; c < t.header.size(); ++c)
                if (t.header[c] != "policy" && t.header[c] != "within")
                    values[t.header[c]] = std::stod(row[c]);
            cells[{std::stod(row[0]), row[1]}] = values;
        }
    }

    double at(double snr, const std::string& policy, const std::string& column) const
    {
        return cells.at({snr, policy}).at(column);
    }
};

void estimation_criteria(int trials)
{
    ExperimentConfig cfg;
    cfg.trials = trials;
    cfg.snr_db = {-15, -10, -5, 0, 5, 10, 15};
    std::fprintf(stderr, "estimation: %d trials x %zu SNRs\n", trials, cfg.snr_db.size());
    const auto tables = run_estimation_suite(cfg);
    const Summary pee(find_table(tables, "pee_summary"));
    const Summary bounds(find_table(tables, "bounds_summary"));
    const Summary feedback(find_table(tables, "feedback_summary"));
    const Summary time(find_table(tables, "time_summary"));

    {
        bool ok = true;
        std::string detail;
        for (double s : {0.0, 5.0, 10.0, 15.0})
        {
            const double raf = pee.at(s, "raf", "pee");
            const double opt = pee.at(s, "optimal", "pee");
            ok = ok && raf <= 0.02 && opt <= 0.02;
            detail += fmt("%g dB", s) + fmt(" raf=%.4f", raf) + fmt(" optimal=%.4f; ", opt);
        }
        const double fixed = pee.at(0.0, "fixed_rate", "pee");
        ok = ok && fixed > 0.01;
        verdict(ok, "PEE control", detail + fmt("fixed_rate at 0 dB=%.4f (limit 0.02, fixed > 0.01)", fixed));
    }

    {
        bool ok = true;
        std::string detail;
        for (double s : cfg.snr_db)
        {
            const double lb = bounds.at(s, "raf", "lower_bound");
            const double p = bounds.at(s, "raf", "pee");
            const double ub = bounds.at(s, "raf", "upper_bound");
            ok = ok && lb <= p && p <= ub;
            detail += fmt("%g dB ", s) + fmt("%.4g", lb) + fmt("<=%.4g", p) + fmt("<=%.4g; ", ub);
        }
        verdict(ok, "Bounds sandwich", detail);
    }

    {
        bool order = true, ratio = true;
        double reduction_sum = 0.0;
        std::string detail;
        for (double s : cfg.snr_db)
        {
            const double opt = feedback.at(s, "optimal", "mean_feedback_bits");
            const double raf = feedback.at(s, "raf", "mean_feedback_bits");
            const double race = feedback.at(s, "race_like", "mean_feedback_bits");
            order = order && opt <= raf && raf <= race;
            if (s >= 0.0)
                ratio = ratio && raf <= 2.0 * opt;
            reduction_sum += 1.0 - raf / race;
            detail += fmt("%g dB ", s) + fmt("%.1f/", opt) + fmt("%.1f/", raf) + fmt("%.1f; ", race);
        }
        const double mean_reduction = reduction_sum / cfg.snr_db.size();
        verdict(order && ratio && mean_reduction >= 0.5, "Feedback ordering",
                "optimal/raf/race_like bits " + detail + (order ? "ordering ok" : "ordering violated") +
                    (ratio ? ", raf<=2x optimal ok" : ", raf>2x optimal at some SNR>=0") +
                    fmt(", mean reduction %.1f%% (bar 50%%)", 100 * mean_reduction));
    }

    {
        bool ok = true;
        std::string detail;
        for (double s : cfg.snr_db)
        {
            if (s > 0.0)
                continue;
            const double raf = time.at(s, "raf", "mean_time_slots");
            const double race = time.at(s, "race_like", "mean_time_slots");
            ok = ok && raf < race;
            detail += fmt("%g dB ", s) + fmt("raf=%.1f ", raf) + fmt("race_like=%.1f; ", race);
        }
        const double cut = 1.0 - time.at(-15.0, "raf", "mean_time_slots") /
                                     time.at(-15.0, "race_like", "mean_time_slots");
        verdict(ok && cut >= 0.15, "Time-slot reduction", detail + fmt("-15 dB reduction %.1f%% (bar 15%%)", 100 * cut));
    }
}

void tracking_criteria(int trials)
{
    const ExperimentConfig cfg;
    constexpr std::string_view key = "tracking";
    std::fprintf(stderr, "tracking: %d trials per curve\n", trials);

    {
        const int ns[] = {16, 32, 64, 128};
        const double targets[] = {105, 62, 31, 8};
        bool near = true, above = true;
        std::string detail;
        for (int i = 0; i < 4; ++i)
        {
            const auto pos = run_tracking_curve(cfg, TrackModel::position, ns[i], 0.0, 0.0, trials, key);
            const auto ang = run_tracking_curve(cfg, TrackModel::angle, ns[i], 0.0, 0.0, trials, key);
            near = near && within(pos.valid_duration, targets[i], 0.3);
            above = above && pos.valid_duration > ang.valid_duration;
            detail += "N=" + std::to_string(ns[i]) + " " + std::to_string(pos.valid_duration) + " vs angle " +
                      std::to_string(ang.valid_duration) + fmt(" (target %g); ", targets[i]);
        }
        verdict(near && above, "Tracking durations",
                detail + (above ? "position > angle ok" : "position > angle violated") +
                    (near ? ", all within 30%" : ", some outside 30%"));
    }

    {
        const double snrs[] = {-5, 0, 5};
        const double targets[] = {24, 31, 38};
        bool ok = true;
        int prev = -1;
        std::string detail;
        for (int i = 0; i < 3; ++i)
        {
            const int d = run_tracking_curve(cfg, TrackModel::position, 64, snrs[i], 0.0, trials, key).valid_duration;
            ok = ok && d > prev && within(d, targets[i], 0.3);
            prev = d;
            detail += fmt("%g dB ", snrs[i]) + std::to_string(d) + fmt(" (target %g); ", targets[i]);
        }
        verdict(ok, "SNR monotonicity", detail);
    }

    {
        const double targets[] = {105, 93, 85, 72, 64};
        bool ok = true;
        int prev = 1 << 30;
        std::string detail;
        for (int i = 0; i < 5; ++i)
        {
            const double f = cfg.error_fractions[i];
            const int d =
                run_tracking_curve(cfg, TrackModel::position, cfg.error_antennas, 0.0, f, trials, key).valid_duration;
            ok = ok && d < prev && within(d, targets[i], 0.3);
            prev = d;
            detail += fmt("%g BW ", f) + std::to_string(d) + fmt(" (target %g); ", targets[i]);
        }
        verdict(ok, "Estimation-error impact", detail);
    }
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void oracle_criteria()
{
    std::vector<std::string> failed;
    std::string detail;
    auto check = [&](const std::string& name, double worst, double limit) {
        detail += name + fmt("=%.2e; ", worst);
        if (!(worst <= limit))
            failed.push_back(name);
    };

    {
        RandomStream s(11);
        double worst = 0.0, norm = 0.0;
        for (int trial = 0; trial < 300; ++trial)
        {
            const int k = 2 + static_cast<int>(s.uniform_index(2));
            const int q = 1 + static_cast<int>(s.uniform_index(40));
            const SparseSystem sys = oracle::random_system(s, k, q, 0.05 + s.uniform());
            const auto ll = log_likelihoods(sys);
            for (int d = 1; d <= k * k; ++d)
                worst = std::max(worst, std::abs(ll[d - 1] - oracle::dense_log_density(sys, d)) /
                                            std::max(1.0, std::abs(ll[d - 1])));
            const auto p = posterior(sys);
            norm = std::max(norm, std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0));
        }
        check("posterior_vs_dense", worst, 1e-9);
        check("posterior_normalization", norm, 1e-12);
    }

    {
        RandomStream s(5);
        MotionModel m;
        double fd = 0.0, vel = 0.0;
        for (int i = 0; i < 1000; ++i)
        {
            m.height = 2 + 15 * s.uniform();
            const TrackLink link = oracle::make_link(1 + static_cast<int>(s.uniform_index(64)));
            const Vector4 x = oracle::random_state(s);
            const AnglePair p = oracle::random_pointing(s);
            const Jacobian j = jacobian(x, m, p, link);
            for (int c = 0; c < 4; ++c)
            {
                const Complex num = oracle::observation_derivative(x, c, m, p, link);
                const double scale = std::max(std::hypot(j(0, c), j(1, c)), 1e-3 * j.norm() + 1e-12);
                fd = std::max(fd, std::abs(num - Complex(j(0, c), j(1, c))) / scale);
            }
            for (int r = 0; r < 2; ++r)
            {
                const double expect = j(r, 0) * m.block_duration;
                if (expect != 0.0)
                    vel = std::max(vel, std::abs(j(r, 1) - expect) / std::abs(expect));
            }
        }
        check("jacobian_vs_fd", fd, 1e-5);
        check("velocity_partial_identity", vel, 1e-14);
    }

    {
        RandomStream s(7);
        double worst = 0.0;
        for (int i = 0; i < 1000; ++i)
        {
            const double h = 0.5 + 20 * s.uniform();
            const double d = 0.01 + 50 * s.uniform();
            const double step = -0.5 * d + 2.0 * s.uniform();
            const double phi = angles_from_position(d, h).phi;
            worst = std::max(worst, std::abs(angle_evolution(phi, h, step, 1.0) -
                                             oracle::geometric_angle_change(d, h, step)));
        }
        check("angle_evolution_vs_geometry", worst, 1e-9);
    }

    {
        RandomStream s(3);
        double worst = 0.0;
        for (int trial = 0; trial < 200; ++trial)
        {
            const ArrayConfig rx{1 + static_cast<int>(s.uniform_index(64)), 0.5};
            const ArrayConfig tx{1 + static_cast<int>(s.uniform_index(64)), 0.5};
            ChannelRealization ch;
            ch.alpha = s.complex_normal(1.0);
            ch.theta = -kPi + 2 * kPi * s.uniform();
            ch.phi = -kPi + 2 * kPi * s.uniform();
            const double pt = -kPi + 2 * kPi * s.uniform();
            const double pp = -kPi + 2 * kPi * s.uniform();
            const Complex noise = s.complex_normal(0.1);
            const Complex ref =
                observe(array_response(rx, pt), channel_matrix(rx, tx, ch), array_response(tx, pp), 1.5, 1.0, noise);
            worst = std::max(worst, std::abs(observe_tracking(pt, pp, ch, rx, tx, 1.5, 1.0, noise) - ref));
        }
        check("observe_tracking_vs_observe", worst, 1e-10);
    }

    {
        MotionModel m;
        m.height = 4.0;
        const TrackLink link = oracle::make_link(64);
        TrackState actual{4.0, 16.667, Complex(0.8, 0.3)};
        TrackBelief b;
        b.mean = actual.to_vector();
        b.covariance = Vector4(0.1, 1.0, 0.5, 0.5).asDiagonal();
        RandomStream s(9);
        double neg = 0.0, asym = 0.0;
        for (int k = 0; k < 10000; ++k)
        {
            const AnglePair p = angles_from_position(b.mean(0) + b.mean(1) * m.block_duration, m.height);
            actual.position += actual.velocity * m.block_duration;
            const Complex y = response_at_position(actual.position, actual.alpha, m, p, link) + s.complex_normal(1.0);
            b = predict(update(b, y, m, p, link, 1.0), m);
            asym = std::max(asym, (b.covariance - b.covariance.transpose()).cwiseAbs().maxCoeff());
            neg = std::max(neg, -Eigen::SelfAdjointEigenSolver<Matrix4>(b.covariance).eigenvalues().minCoeff());
        }
        check("covariance_asymmetry", asym, 0.0);
        check("covariance_negative_eigenvalue", std::max(neg, 0.0), 1e-10);
    }

    {
        ExperimentConfig cfg;
        cfg.trials = 40;
        cfg.snr_db = {-5.0, 5.0};
        cfg.horizon = 40;
        cfg.track_antennas = {16, 64};
        cfg.error_fractions = {0.0, 0.5};
        const auto base = std::filesystem::temp_directory_path() / "beamlab_acceptance";
        int mismatched = 0, files = 0;
        for (const char* run : {"a", "b"})
        {
            const auto dir = base / run;
            std::filesystem::remove_all(dir);
            for (const auto& sweep : {run_estimation_suite(cfg), run_tracking_sweep(cfg), run_estimation_error_impact(cfg)})
                for (const auto& t : sweep)
                    write_table(t, dir);
        }
        for (const auto& entry : std::filesystem::directory_iterator(base / "a"))
        {
            ++files;
            mismatched += slurp(entry.path()) != slurp(base / "b" / entry.path().filename());
        }
        std::filesystem::remove_all(base);
        detail += "rerun_files=" + std::to_string(files) + " mismatched=" + std::to_string(mismatched) + "; ";
        if (mismatched != 0 || files == 0)
            failed.push_back("byte_identical_reruns");
    }

    std::string tail = failed.empty() ? "all checks within limits" : "failed:";
    for (const auto& f : failed)
        tail += " " + f;
    verdict(failed.empty(), "Oracle/property suite", detail + tail);
}

} // namespace

int main(int argc, char** argv)
{
    const bool quick = argc > 1 && std::string(argv[1]) == "--quick";
    const int scale = quick ? 10 : 1;
    try
    {
        estimation_criteria(10000 / scale);
        tracking_criteria(3000 / scale);
        oracle_criteria();
    }
    catch (const std::exception& e)
    {
        std::fprintf(stderr, "acceptance: %s\n", e.what());
        return 2;
    }
    std::printf("%d criteria failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
