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

#ifndef BEAMLAB_TRACKER_HPP
#define BEAMLAB_TRACKER_HPP

#include "beamlab/rng.hpp"
#include "beamlab/signal_core.hpp"
#include "beamlab/types.hpp"

#include <vector>

namespace beamlab
{

using Vector4 = Eigen::Vector4d;
using Matrix4 = Eigen::Matrix4d;
using Jacobian = Eigen::Matrix<double, 2, 4>;

/// Vehicle state [d, v, alpha_re, alpha_im]: road position (m) measured from the
/// foot of the roadside array, speed (m/s) and the path coefficient.
struct TrackState
{
    double position = 0.0;
    double velocity = 0.0;
    Complex alpha{1.0, 0.0};

    Vector4 to_vector() const;
    static TrackState from_vector(const Vector4& x);
};

struct TrackBelief
{
    Vector4 mean = Vector4::Zero();
    Matrix4 covariance = Matrix4::Identity();
};

/// Constant-velocity kinematics with a random-walk path coefficient.
struct MotionModel
{
    double height = 10.0;             // array height above the road, m
    double block_duration = 1e-3;     // dt, s
    double velocity_noise_std = 1.4;  // sigma_w, m/s
    double alpha_correlation = 0.995; // rho

    void validate() const;

    /// [[1, dt, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]].
    Matrix4 transition() const;

    /// diag((dt sigma_w)^2, sigma_w^2, 1 - rho^2, 1 - rho^2).
    Matrix4 process_covariance() const;
};

/// Beam pair used for one tracking pilot.
struct AnglePair
{
    double theta = 0.0; // receive side
    double phi = 0.0;   // transmit side
};

struct TrackLink
{
    ArrayConfig rx{16, 0.5};
    ArrayConfig tx{16, 0.5};
    double power = 1.0;
    Complex pilot{1.0, 0.0};
};

/// theta = atan2(-h, -d), phi = atan2(h, d).
AnglePair angles_from_position(double position, double height);

/// Mean A x, covariance A P A^T + Sigma_u.
TrackBelief predict(const TrackBelief& belief, const MotionModel& model);

/// Noise-free pilot response when the vehicle sits at `position` and the beams
/// point at `pointing`. Separable O(N_r + N_t) evaluation.
Complex response_at_position(double position, Complex alpha, const MotionModel& model,
                             const AnglePair& pointing, const TrackLink& link);

/// g(x): the response at the propagated position d + v dt.
Complex observation_fn(const Vector4& state, const MotionModel& model, const AnglePair& pointing,
                       const TrackLink& link);

/// g(x) as the literal double sum over (p, q). Serial reference for observation_fn.
Complex observation_fn_double_sum(const Vector4& state, const MotionModel& model, const AnglePair& pointing,
                                  const TrackLink& link);

/// Rows (Re g, Im g), columns d/d(d, v, alpha_re, alpha_im).
Jacobian jacobian(const Vector4& state, const MotionModel& model, const AnglePair& pointing,
                  const TrackLink& link);

/// jacobian() built from the literal double sums. Serial reference.
Jacobian jacobian_double_sum(const Vector4& state, const MotionModel& model, const AnglePair& pointing,
                             const TrackLink& link);

/// EKF measurement update on the stacked [Re y, Im y] with R = (N0 / 2) I.
TrackBelief update(const TrackBelief& prior, Complex measurement, const MotionModel& model,
                   const AnglePair& pointing, const TrackLink& link, double noise_var);

/// Change of the transmit angle after the vehicle advances by (v + w) dt:
/// -acot(h / (sin^2 phi (v + w) dt) + cot phi) with tan phi = h / d.
double angle_evolution(double phi, double height, double v_plus_w, double dt);

struct TrackOptions
{
    int horizon = 200;
    double noise_var = 1.0;        // N0 of the tracking pilot
    bool use_measurements = true;  // false forces the Kalman gain to zero
    double angle_noise_std = deg_to_rad(0.5); // angle-state model only
};

struct TrackStep
{
    int block = 0;
    double true_theta = 0.0;
    double true_phi = 0.0;
    double pointed_theta = 0.0;
    double pointed_phi = 0.0;
    double sq_err = 0.0;    // squared transmit pointing error, rad^2
    double alpha_err = 0.0; // |alpha - alpha_hat|^2
};

/// Per block: point the beams at the predicted position, advance the truth by
/// x <- A x + u, take one noisy pilot, then update and predict.
std::vector<TrackStep> run_track(const TrackBelief& initial, const TrackState& truth, const MotionModel& model,
                                 const TrackLink& link, const TrackOptions& options, RandomStream stream);

/// Angle-state comparator: state [theta, phi, alpha_re, alpha_im] with identity
/// evolution and white angle noise. The truth evolves by the vehicle kinematics.
std::vector<TrackStep> run_track_angle_model(const TrackBelief& initial, const TrackState& truth,
                                             const MotionModel& model, const TrackLink& link,
                                             const TrackOptions& options, RandomStream stream);

/// Angle-model belief that matches a position belief: the angles at the mean
/// position with the given angle spread, same coefficient block.
TrackBelief angle_belief_from(const TrackBelief& position_belief, const MotionModel& model, double angle_std);

/// Half-power beamwidth lambda / (d N) in radians, the pointing-error threshold is half of it.
double beamwidth(const ArrayConfig& cfg);

} // namespace beamlab

#endif // BEAMLAB_TRACKER_HPP
