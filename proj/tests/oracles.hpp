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


// Independent reference computations shared by the unit tests and the
// acceptance report.

#ifndef BEAMLAB_TESTS_ORACLES_HPP
#define BEAMLAB_TESTS_ORACLES_HPP

#include "beamlab/estimator.hpp"
#include "beamlab/rng.hpp"
#include "beamlab/tracker.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace beamlab::oracle
{

/// log CN(c; 0, Sigma) with Sigma = gamma (G e_d)(G e_d)^T + N0 I, dense algebra.
inline double dense_log_density(const SparseSystem& sys, int d)
{
    const RealMatrix g = sys.generator();
    const ComplexVector c = sys.observation_vector();
    const auto q = g.rows();
    const RealVector gv = g.col(d - 1);
    const ComplexMatrix sigma =
        (sys.signal_var() * gv * gv.transpose() + sys.noise_var() * RealMatrix::Identity(q, q)).cast<Complex>();
    const Eigen::PartialPivLU<ComplexMatrix> lu(sigma);
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < q; ++i)
        log_det += std::log(std::abs(lu.matrixLU()(i, i)));
    const Complex quad = c.dot(lu.solve(c));
    return -static_cast<double>(q) * std::log(kPi) - log_det - quad.real();
}

inline SparseSystem random_system(RandomStream& s, int k, int q, double n0)
{
    SparseSystem sys(k, 1 + static_cast<int>(s.uniform_index(4)), 0.1 + s.uniform(), 0.5 + s.uniform(), n0,
                     0.5 + s.uniform());
    for (int i = 0; i < q; ++i)
        sys.append(1 + static_cast<int>(s.uniform_index(k * k)), s.complex_normal(1.0));
    return sys;
}

inline TrackLink make_link(int n)
{
    return TrackLink{{n, 0.5}, {n, 0.5}, 1.0, {1.0, 0.0}};
}

inline Vector4 random_state(RandomStream& s)
{
    return Vector4(-30 + 60 * s.uniform(), -30 + 60 * s.uniform(), s.normal(), s.normal());
}

inline AnglePair random_pointing(RandomStream& s)
{
    return AnglePair{-kPi * s.uniform(), kPi * s.uniform()};
}

/// Five-point central difference of the observation along state coordinate c.
inline Complex observation_derivative(const Vector4& x, int c, const MotionModel& m, const AnglePair& p,
                                      const TrackLink& link)
{
    const double h = 1e-4 * std::max(1.0, std::abs(x(c)));
    auto at = [&](double off) {
        Vector4 y = x;
        y(c) += off;
        return observation_fn(y, m, p, link);
    };
    return (-at(2 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2 * h)) / (12 * h);
}

/// Change of the transmit angle computed from positions directly.
inline double geometric_angle_change(double d, double height, double step)
{
    return angles_from_position(d + step, height).phi - angles_from_position(d, height).phi;
}

} // namespace beamlab::oracle

#endif // BEAMLAB_TESTS_ORACLES_HPP
