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

#include "beamlab/tracker.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace beamlab;

namespace
{

using oracle::make_link;
using oracle::random_pointing;
using oracle::random_state;

Complex g_of(const Vector4& x, const MotionModel& m, const AnglePair& p, const TrackLink& l)
{
    return observation_fn(x, m, p, l);
}

} // namespace

TEST_CASE("angles from position")
{
    const AnglePair a = angles_from_position(10.0, 10.0);
    CHECK(rad_to_deg(a.phi) == doctest::Approx(45.0));
    CHECK(rad_to_deg(a.theta) == doctest::Approx(-135.0));
    const AnglePair b = angles_from_position(0.0, 10.0);
    CHECK(rad_to_deg(b.phi) == doctest::Approx(90.0));
    CHECK(rad_to_deg(b.theta) == doctest::Approx(-90.0));
    CHECK(angles_from_position(1e9, 10.0).phi < 1e-7);

    RandomStream s(1);
    for (int i = 0; i < 200; ++i)
    {
        const double d = -50 + 100 * s.uniform();
        const double h = 0.5 + 20 * s.uniform();
        const AnglePair p = angles_from_position(d, h);
        CHECK(std::cos(p.phi) == doctest::Approx(d / std::hypot(h, d)).epsilon(1e-12));
        CHECK(std::cos(p.theta) == doctest::Approx(-std::cos(p.phi)).epsilon(1e-12));
    }
}

TEST_CASE("motion model matrices and prediction")
{
    MotionModel m;
    m.block_duration = 0.001;
    m.velocity_noise_std = 1.4;
    m.alpha_correlation = 0.995;
    const Matrix4 a = m.transition();
    CHECK(a(0, 1) == 0.001);
    CHECK((a - Matrix4::Identity()).cwiseAbs().sum() == doctest::Approx(0.001));
    const Matrix4 q = m.process_covariance();
    CHECK(q(0, 0) == doctest::Approx(std::pow(0.0014, 2)));
    CHECK(q(1, 1) == doctest::Approx(1.96));
    CHECK(q(2, 2) == doctest::Approx(1 - 0.995 * 0.995));
    CHECK(q(3, 3) == doctest::Approx(1 - 0.995 * 0.995));

    TrackBelief b;
    b.mean = Vector4(100.0, 16.667, 0.3, -0.2);
    b.covariance = Matrix4::Zero();
    const TrackBelief p = predict(b, m);
    CHECK(p.mean(0) == doctest::Approx(100.016667));
    CHECK((p.covariance - q).norm() < 1e-15);

    RandomStream s(2);
    Eigen::Matrix4d r;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            r(i, j) = s.normal();
    b.covariance = r * r.transpose();
    const TrackBelief p2 = predict(b, m);
    Matrix4 oracle = Matrix4::Zero();
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k)
                for (int l = 0; l < 4; ++l)
                    oracle(i, j) += a(i, k) * b.covariance(k, l) * a(j, l);
    CHECK((p2.covariance - (oracle + q)).norm() < 1e-12);

    m.height = 0.0;
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
}

TEST_CASE("observation function special cases")
{
    MotionModel m;
    m.height = 10.0;
    const TrackLink link = make_link(16);
    const Vector4 x(7.0, 12.0, 0.4, -0.9);
    const AnglePair aligned = angles_from_position(x(0) + x(1) * m.block_duration, m.height);
    CHECK(std::abs(observation_fn(x, m, aligned, link) - Complex(0.4, -0.9)) < 1e-12);

    const TrackLink single = make_link(1);
    CHECK(std::abs(observation_fn(x, m, AnglePair{0.3, 2.0}, single) - Complex(0.4, -0.9)) < 1e-15);

    TrackLink powered = link;
    powered.power = 4.0;
    powered.pilot = std::polar(1.0, 0.5);
    CHECK(std::abs(observation_fn(x, m, aligned, powered) - 2.0 * Complex(0.4, -0.9) * powered.pilot) < 1e-12);
}

TEST_CASE("observation function agrees with the generic tracking observation")
{
    RandomStream s(3);
    MotionModel m;
    for (int i = 0; i < 300; ++i)
    {
        m.height = 1 + 20 * s.uniform();
        const TrackLink link = make_link(1 + static_cast<int>(s.uniform_index(64)));
        const Vector4 x = random_state(s);
        const AnglePair p = random_pointing(s);
        const double pos = x(0) + x(1) * m.block_duration;
        const AnglePair truth = angles_from_position(pos, m.height);
        ChannelRealization ch;
        ch.alpha = Complex(x(2), x(3));
        ch.theta = truth.theta;
        ch.phi = truth.phi;
        const Complex ref = observe_tracking(p.theta, p.phi, ch, link.rx, link.tx, link.power, link.pilot, 0.0);
        CHECK(std::abs(observation_fn(x, m, p, link) - ref) < 1e-10);
        CHECK(std::abs(observation_fn_double_sum(x, m, p, link) - ref) < 1e-10);
    }
}

TEST_CASE("Jacobian identities")
{
    RandomStream s(4);
    MotionModel m;
    for (int i = 0; i < 200; ++i)
    {
        const TrackLink link = make_link(2 + static_cast<int>(s.uniform_index(63)));
        const Vector4 x = random_state(s);
        const AnglePair p = random_pointing(s);
        const Jacobian j = jacobian(x, m, p, link);
        for (int r = 0; r < 2; ++r)
        {
            const double expect = j(r, 0) * m.block_duration;
            CHECK(std::abs(j(r, 1) - expect) <= 1e-14 * std::abs(expect));
        }
        CHECK((jacobian_double_sum(x, m, p, link) - j).norm() < 1e-9 * std::max(1.0, j.norm()));
    }

    const TrackLink link = make_link(16);
    const Vector4 x(4.0, 16.0, 0.0, 0.0); // alpha = 0: partials come from the alpha-free sum
    const AnglePair aligned = angles_from_position(x(0) + x(1) * m.block_duration, m.height);
    const Jacobian j = jacobian(x, m, aligned, link);
    CHECK(j(0, 2) == doctest::Approx(1.0));
    CHECK(j(1, 2) == doctest::Approx(0.0));
    CHECK(j(0, 3) == doctest::Approx(0.0));
    CHECK(j(1, 3) == doctest::Approx(1.0));
    CHECK(j.col(0).norm() == 0.0);
}

TEST_CASE("Jacobian matches central finite differences")
{
    RandomStream s(5);
    MotionModel m;
    int checked = 0;
    for (int i = 0; i < 1000; ++i)
    {
        m.height = 2 + 15 * s.uniform();
        const TrackLink link = make_link(1 + static_cast<int>(s.uniform_index(64)));
        const Vector4 x = random_state(s);
        const AnglePair p = random_pointing(s);
        const Jacobian j = jacobian(x, m, p, link);
        for (int c = 0; c < 4; ++c)
        {
            const Complex fd = oracle::observation_derivative(x, c, m, p, link);
            const double scale = std::max(std::hypot(j(0, c), j(1, c)), 1e-3 * j.norm() + 1e-12);
            CHECK(std::abs(fd - Complex(j(0, c), j(1, c))) / scale < 1e-5);
            ++checked;
        }
    }
    CHECK(checked == 4000);
}

TEST_CASE("update basics")
{
    MotionModel m;
    const TrackLink link = make_link(16);
    TrackBelief prior;
    prior.mean = Vector4(4.0, 16.0, 0.7, 0.1);
    prior.covariance = Vector4(0.1, 1.0, 0.5, 0.5).asDiagonal();
    const AnglePair p = angles_from_position(prior.mean(0) + prior.mean(1) * m.block_duration + 0.05, m.height);
    const Complex exact = observation_fn(prior.mean, m, p, link);

    const TrackBelief same = update(prior, exact, m, p, link, 0.5);
    CHECK((same.mean - prior.mean).norm() < 1e-14);
    CHECK(same.covariance.trace() < prior.covariance.trace());

    const TrackBelief loose = update(prior, exact + Complex(1.0, -2.0), m, p, link, 1e14);
    CHECK((loose.mean - prior.mean).norm() < 1e-10);
    CHECK((loose.covariance - prior.covariance).norm() < 1e-10);
    CHECK_THROWS_AS(update(prior, exact, m, p, link, 0.0), std::invalid_argument);
}

TEST_CASE("single-antenna update is the linear Kalman filter")
{
    // N = 1: y = alpha + n, so only the alpha block is observed and the gain is closed form.
    MotionModel m;
    const TrackLink link = make_link(1);
    RandomStream s(6);
    for (int i = 0; i < 50; ++i)
    {
        TrackBelief prior;
        prior.mean = random_state(s);
        Eigen::Matrix4d r;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                r(a, b) = s.normal();
        prior.covariance = r * r.transpose() + Matrix4::Identity() * 0.1;
        const double n0 = 0.2 + s.uniform();
        const Complex y = s.complex_normal(2.0);
        const TrackBelief post = update(prior, y, m, AnglePair{0.1, 0.2}, link, n0);

        Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
        h(0, 2) = 1;
        h(1, 3) = 1;
        const Eigen::Matrix2d sm = prior.covariance.block<2, 2>(2, 2) + Eigen::Matrix2d::Identity() * n0 / 2;
        const Eigen::Matrix<double, 4, 2> k = prior.covariance.block<4, 2>(0, 2) * sm.inverse();
        const Eigen::Vector2d innov(y.real() - prior.mean(2), y.imag() - prior.mean(3));
        CHECK((post.mean - (prior.mean + k * innov)).norm() < 1e-10);
        const Matrix4 p_ref = (Matrix4::Identity() - k * h) * prior.covariance;
        CHECK((post.covariance - p_ref).norm() < 1e-10 * p_ref.norm());
    }
}

TEST_CASE("angle evolution agrees with geometry")
{
    CHECK(angle_evolution(deg_to_rad(45.0), 10.0, 0.0, 0.001) == 0.0);
    const double dphi = angle_evolution(deg_to_rad(45.0), 10.0, 1.0, 1.0);
    CHECK(std::abs(dphi - (std::atan(10.0 / 11.0) - deg_to_rad(45.0))) < 1e-9);
    CHECK(rad_to_deg(dphi) == doctest::Approx(-2.7263).epsilon(1e-4));

    RandomStream s(7);
    for (int i = 0; i < 1000; ++i)
    {
        const double h = 0.5 + 20 * s.uniform();
        const double d = 0.01 + 50 * s.uniform();
        const double step = -0.5 * d + 2.0 * s.uniform();
        const double phi = angles_from_position(d, h).phi;
        const double geometric = oracle::geometric_angle_change(d, h, step);
        CHECK(std::abs(angle_evolution(phi, h, step, 1.0) - geometric) < 1e-9);
    }
}

TEST_CASE("tracker runs")
{
    MotionModel m;
    m.height = 4.0;
    const TrackLink link = make_link(64);
    TrackState truth{4.0, 16.667, Complex(0.8, 0.3)};
    TrackBelief exact;
    exact.mean = truth.to_vector();
    exact.covariance = Matrix4::Zero();

    SUBCASE("perfect model and no noise keep the beam on target")
    {
        MotionModel still = m;
        still.velocity_noise_std = 0.0;
        still.alpha_correlation = 1.0;
        TrackOptions opt;
        opt.horizon = 500;
        opt.noise_var = 1e-300;
        const auto trace = run_track(exact, truth, still, link, opt, RandomStream(1));
        REQUIRE(trace.size() == 500u);
        for (const auto& step : trace)
            CHECK(std::sqrt(step.sq_err) < 1e-9);
        const auto angle_trace = run_track_angle_model(angle_belief_from(exact, still, 0.0), truth, still, link,
                                                       TrackOptions{50, 1e-300, true, 0.0}, RandomStream(1));
        CHECK(angle_trace.size() == 50u);
    }

    SUBCASE("open loop drifts away")
    {
        TrackOptions opt;
        opt.horizon = 2000;
        opt.use_measurements = false;
        double early = 0, late = 0;
        for (int t = 0; t < 50; ++t)
        {
            const auto trace = run_track(exact, truth, m, link, opt, RandomStream(100 + t));
            early += trace[10].sq_err;
            late += trace[1999].sq_err;
        }
        CHECK(late > 100 * early);
    }

    SUBCASE("covariance stays symmetric PSD")
    {
        // Observation-driven covariance sequence over 10^4 updates.
        TrackBelief b = exact;
        b.covariance = Vector4(0.1, 1.0, 0.5, 0.5).asDiagonal();
        RandomStream s(9);
        TrackState actual = truth;
        double min_eig = 1.0;
        double max_asym = 0.0;
        for (int k = 0; k < 10000; ++k)
        {
            const AnglePair p = angles_from_position(b.mean(0) + b.mean(1) * m.block_duration, m.height);
            actual.position += actual.velocity * m.block_duration;
            const Complex y = response_at_position(actual.position, actual.alpha, m, p, link) + s.complex_normal(1.0);
            b = predict(update(b, y, m, p, link, 1.0), m);
            max_asym = std::max(max_asym, (b.covariance - b.covariance.transpose()).cwiseAbs().maxCoeff());
            min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Matrix4>(b.covariance).eigenvalues().minCoeff());
        }
        CHECK(max_asym == 0.0);
        CHECK(min_eig > -1e-10);
    }
}

TEST_CASE("beamwidth")
{
    CHECK(beamwidth(ArrayConfig{16, 0.5}) == doctest::Approx(0.125));
    CHECK(beamwidth(ArrayConfig{64, 0.5}) / 2 == doctest::Approx(1.0 / 64));
}
