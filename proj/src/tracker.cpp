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

#include <cmath>
#include <stdexcept>
#include <string>

namespace beamlab
{

Vector4 TrackState::to_vector() const
{
    return Vector4(position, velocity, alpha.real(), alpha.imag());
}

TrackState TrackState::from_vector(const Vector4& x)
{
    return TrackState{x(0), x(1), Complex(x(2), x(3))};
}

void MotionModel::validate() const
{
    if (!(height > 0.0))
        throw std::invalid_argument("array height must be positive, got " + std::to_string(height));
    if (!(block_duration > 0.0))
        throw std::invalid_argument("block duration must be positive, got " + std::to_string(block_duration));
    if (!(velocity_noise_std >= 0.0))
        throw std::invalid_argument("velocity noise std must be non-negative");
    if (!(alpha_correlation > 0.0 && alpha_correlation <= 1.0))
        throw std::invalid_argument("alpha correlation must lie in (0, 1], got " +
                                    std::to_string(alpha_correlation));
}

Matrix4 MotionModel::transition() const
{
    Matrix4 a = Matrix4::Identity();
    a(0, 1) = block_duration;
    return a;
}

Matrix4 MotionModel::process_covariance() const
{
    const double alpha_var = 1.0 - alpha_correlation * alpha_correlation;
    Vector4 diag(std::pow(block_duration * velocity_noise_std, 2), velocity_noise_std * velocity_noise_std,
                 alpha_var, alpha_var);
    return diag.asDiagonal();
}

AnglePair angles_from_position(double position, double height)
{
    return AnglePair{std::atan2(-height, -position), std::atan2(height, position)};
}

TrackBelief predict(const TrackBelief& belief, const MotionModel& model)
{
    const Matrix4 a = model.transition();
    TrackBelief out;
    out.mean = a * belief.mean;
    out.covariance = a * belief.covariance * a.transpose() + model.process_covariance();
    return out;
}

namespace
{

double wave_number(const ArrayConfig& cfg)
{
    return 2.0 * kPi * cfg.spacing_over_wavelength;
}

// cos(phi) of the vehicle at `position`; cos(theta) is its negative.
double position_cosine(double position, double height)
{
    return position / std::hypot(height, position);
}

// d cos(phi) / d position
double position_cosine_slope(double position, double height)
{
    const double r = std::hypot(height, position);
    return height * height / (r * r * r);
}

Complex propagated_alpha_free(double position, const MotionModel& model, const AnglePair& pointing,
                              const TrackLink& link)
{
    const double u = position_cosine(position, model.height);
    const Complex rx = array_factor(link.rx, std::cos(pointing.theta) + u);
    const Complex tx = array_factor(link.tx, u - std::cos(pointing.phi));
    return std::sqrt(link.power) * link.pilot * rx * tx;
}

// d/du of the alpha-free response, u = cos(phi) of the vehicle.
Complex propagated_alpha_free_slope(double position, const MotionModel& model, const AnglePair& pointing,
                                    const TrackLink& link)
{
    const double u = position_cosine(position, model.height);
    const double drx = std::cos(pointing.theta) + u;
    const double dtx = u - std::cos(pointing.phi);
    const Complex rx = array_factor(link.rx, drx);
    const Complex tx = array_factor(link.tx, dtx);
    const Complex rx_slope = kJ * wave_number(link.rx) * array_factor_weighted(link.rx, drx);
    const Complex tx_slope = kJ * wave_number(link.tx) * array_factor_weighted(link.tx, dtx);
    return std::sqrt(link.power) * link.pilot * (rx_slope * tx + rx * tx_slope);
}

// Double sums over (p, q). Returns (alpha-free response, d/d position of it).
std::pair<Complex, Complex> double_sums(double position, const MotionModel& model, const AnglePair& pointing,
                                        const TrackLink& link)
{
    const double kr = wave_number(link.rx);
    const double kt = wave_number(link.tx);
    const double u = position_cosine(position, model.height);
    const double slope = position_cosine_slope(position, model.height);
    const double cos_tp = std::cos(pointing.theta);
    const double cos_pp = std::cos(pointing.phi);
    Complex value{0.0, 0.0};
    Complex deriv{0.0, 0.0};
    for (int q = 0; q < link.tx.n_antennas; ++q)
    {
        for (int p = 0; p < link.rx.n_antennas; ++p)
        {
            const double b_pq = kr * p * cos_tp - kt * q * cos_pp;
            const Complex e = std::polar(1.0, (kr * p + kt * q) * u + b_pq);
            value += e;
            deriv += kJ * (kr * p + kt * q) * slope * e;
        }
    }
    const double scale = std::sqrt(link.power) / (link.rx.n_antennas * link.tx.n_antennas);
    return {scale * link.pilot * value, scale * link.pilot * deriv};
}

double propagated_position(const Vector4& state, const MotionModel& model)
{
    return state(0) + state(1) * model.block_duration;
}

Jacobian stack_jacobian(Complex alpha_free, Complex d_position, Complex alpha, double dt)
{
    const Complex gd = alpha * d_position;
    const Complex gv = gd * dt;
    const Complex ga_re = alpha_free;
    const Complex ga_im = kJ * alpha_free;
    Jacobian jac;
    jac << gd.real(), gv.real(), ga_re.real(), ga_im.real(),
           gd.imag(), gv.imag(), ga_re.imag(), ga_im.imag();
    return jac;
}

TrackBelief ekf_update(const TrackBelief& prior, Complex measurement, Complex predicted, const Jacobian& jac,
                       double noise_var)
{
    if (!(noise_var > 0.0))
        throw std::invalid_argument("measurement noise variance must be positive");
    const Eigen::Matrix2d r = Eigen::Matrix2d::Identity() * (noise_var / 2.0);
    const Eigen::Matrix2d s = jac * prior.covariance * jac.transpose() + r;
    const Eigen::LDLT<Eigen::Matrix2d> ldlt(s);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0))
        throw std::runtime_error("innovation covariance is singular");
    const Eigen::Matrix<double, 4, 2> gain = ldlt.solve(jac * prior.covariance).transpose();
    const Eigen::Vector2d innovation(measurement.real() - predicted.real(), measurement.imag() - predicted.imag());

    TrackBelief out;
    out.mean = prior.mean + gain * innovation;
    const Matrix4 ikc = Matrix4::Identity() - gain * jac;
    // Joseph form keeps the covariance PSD under roundoff
    out.covariance = ikc * prior.covariance * ikc.transpose() + gain * r * gain.transpose();
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
    return out;
}

double wrap_angle(double a)
{
    return std::remainder(a, 2.0 * kPi);
}

} // namespace

Complex response_at_position(double position, Complex alpha, const MotionModel& model, const AnglePair& pointing,
                             const TrackLink& link)
{
    return alpha * propagated_alpha_free(position, model, pointing, link);
}

Complex observation_fn(const Vector4& state, const MotionModel& model, const AnglePair& pointing,
                       const TrackLink& link)
{
    const Complex alpha(state(2), state(3));
    return response_at_position(propagated_position(state, model), alpha, model, pointing, link);
}

Complex observation_fn_double_sum(const Vector4& state, const MotionModel& model, const AnglePair& pointing,
                                  const TrackLink& link)
{
    const Complex alpha(state(2), state(3));
    return alpha * double_sums(propagated_position(state, model), model, pointing, link).first;
}

Jacobian jacobian(const Vector4& state, const MotionModel& model, const AnglePair& pointing, const TrackLink& link)
{
    const double pos = propagated_position(state, model);
    const Complex alpha_free = propagated_alpha_free(pos, model, pointing, link);
    const Complex d_position = propagated_alpha_free_slope(pos, model, pointing, link) *
                               position_cosine_slope(pos, model.height);
    return stack_jacobian(alpha_free, d_position, Complex(state(2), state(3)), model.block_duration);
}

Jacobian jacobian_double_sum(const Vector4& state, const MotionModel& model, const AnglePair& pointing,
                             const TrackLink& link)
{
    const auto [alpha_free, d_position] = double_sums(propagated_position(state, model), model, pointing, link);
    return stack_jacobian(alpha_free, d_position, Complex(state(2), state(3)), model.block_duration);
}

TrackBelief update(const TrackBelief& prior, Complex measurement, const MotionModel& model,
                   const AnglePair& pointing, const TrackLink& link, double noise_var)
{
    return ekf_update(prior, measurement, observation_fn(prior.mean, model, pointing, link),
                      jacobian(prior.mean, model, pointing, link), noise_var);
}

double angle_evolution(double phi, double height, double v_plus_w, double dt)
{
    const double step = v_plus_w * dt;
    if (step == 0.0)
        return 0.0;
    // -acot(h / (sin^2 phi step) + cot phi), written as atan2 to stay on the geometric branch
    const double sn = std::sin(phi);
    return -std::atan2(step * sn * sn, height + step * sn * std::cos(phi));
}

double beamwidth(const ArrayConfig& cfg)
{
    cfg.validate();
    return 1.0 / (cfg.spacing_over_wavelength * cfg.n_antennas);
}

namespace
{

TrackState evolve_truth(const TrackState& truth, const MotionModel& model, RandomStream& stream)
{
    const Matrix4 sigma = model.process_covariance();
    Vector4 noise;
    for (int i = 0; i < 4; ++i)
        noise(i) = std::sqrt(sigma(i, i)) * stream.normal();
    return TrackState::from_vector(model.transition() * truth.to_vector() + noise);
}

TrackStep record(int block, const TrackState& truth, const MotionModel& model, const AnglePair& pointed,
                 Complex alpha_hat)
{
    const AnglePair actual = angles_from_position(truth.position, model.height);
    TrackStep step;
    step.block = block;
    step.true_theta = actual.theta;
    step.true_phi = actual.phi;
    step.pointed_theta = pointed.theta;
    step.pointed_phi = pointed.phi;
    const double err = wrap_angle(actual.phi - pointed.phi);
    step.sq_err = err * err;
    step.alpha_err = std::norm(truth.alpha - alpha_hat);
    return step;
}

void check_options(const TrackOptions& options)
{
    if (options.horizon < 0)
        throw std::invalid_argument("tracking horizon must be non-negative");
    if (!(options.noise_var > 0.0))
        throw std::invalid_argument("tracking noise variance must be positive");
}

} // namespace

std::vector<TrackStep> run_track(const TrackBelief& initial, const TrackState& truth, const MotionModel& model,
                                 const TrackLink& link, const TrackOptions& options, RandomStream stream)
{
    model.validate();
    link.rx.validate();
    link.tx.validate();
    check_options(options);

    std::vector<TrackStep> trace;
    trace.reserve(options.horizon);
    TrackBelief belief = initial; // filtered belief of the previous block
    TrackState actual = truth;
    for (int m = 1; m <= options.horizon; ++m)
    {
        const AnglePair pointing = angles_from_position(propagated_position(belief.mean, model), model.height);
        actual = evolve_truth(actual, model, stream);
        const Complex noise = stream.complex_normal(options.noise_var);
        const Complex y = response_at_position(actual.position, actual.alpha, model, pointing, link) + noise;
        if (options.use_measurements)
            belief = update(belief, y, model, pointing, link, options.noise_var);
        belief = predict(belief, model);
        trace.push_back(record(m, actual, model, pointing, Complex(belief.mean(2), belief.mean(3))));
    }
    return trace;
}

TrackBelief angle_belief_from(const TrackBelief& position_belief, const MotionModel& model, double angle_std)
{
    const AnglePair angles = angles_from_position(position_belief.mean(0), model.height);
    TrackBelief out;
    out.mean = Vector4(angles.theta, angles.phi, position_belief.mean(2), position_belief.mean(3));
    out.covariance = Matrix4::Zero();
    out.covariance(0, 0) = angle_std * angle_std;
    out.covariance(1, 1) = angle_std * angle_std;
    out.covariance.block<2, 2>(2, 2) = position_belief.covariance.block<2, 2>(2, 2);
    return out;
}

std::vector<TrackStep> run_track_angle_model(const TrackBelief& initial, const TrackState& truth,
                                             const MotionModel& model, const TrackLink& link,
                                             const TrackOptions& options, RandomStream stream)
{
    model.validate();
    link.rx.validate();
    link.tx.validate();
    check_options(options);

    const double kr = wave_number(link.rx);
    const double kt = wave_number(link.tx);
    const double alpha_var = 1.0 - model.alpha_correlation * model.alpha_correlation;
    const double angle_var = options.angle_noise_std * options.angle_noise_std;
    const Matrix4 process = Vector4(angle_var, angle_var, alpha_var, alpha_var).asDiagonal();

    std::vector<TrackStep> trace;
    trace.reserve(options.horizon);
    TrackBelief belief = initial;
    TrackState actual = truth;
    for (int m = 1; m <= options.horizon; ++m)
    {
        const AnglePair pointing{belief.mean(0), belief.mean(1)};
        actual = evolve_truth(actual, model, stream);
        const Complex noise = stream.complex_normal(options.noise_var);
        const Complex y = response_at_position(actual.position, actual.alpha, model, pointing, link) + noise;

        if (options.use_measurements)
        {
            // g = sqrt(P) x alpha AF_r(cos theta_bar - cos theta) AF_t(cos phi - cos phi_bar), at the mean
            const double theta = belief.mean(0);
            const double phi = belief.mean(1);
            const Complex alpha(belief.mean(2), belief.mean(3));
            const double drx = std::cos(pointing.theta) - std::cos(theta);
            const double dtx = std::cos(phi) - std::cos(pointing.phi);
            const Complex scale = std::sqrt(link.power) * link.pilot;
            const Complex rx = array_factor(link.rx, drx);
            const Complex tx = array_factor(link.tx, dtx);
            const Complex rx_slope = kJ * kr * array_factor_weighted(link.rx, drx);
            const Complex tx_slope = kJ * kt * array_factor_weighted(link.tx, dtx);
            const Complex alpha_free = scale * rx * tx;
            const Complex g_theta = alpha * scale * rx_slope * tx * std::sin(theta);
            const Complex g_phi = -alpha * scale * rx * tx_slope * std::sin(phi);
            const Complex g_im = kJ * alpha_free;
            Jacobian jac;
            jac << g_theta.real(), g_phi.real(), alpha_free.real(), g_im.real(),
                   g_theta.imag(), g_phi.imag(), alpha_free.imag(), g_im.imag();
            belief = ekf_update(belief, y, alpha * alpha_free, jac, options.noise_var);
        }
        belief.covariance += process;
        trace.push_back(record(m, actual, model, pointing, Complex(belief.mean(2), belief.mean(3))));
    }
    return trace;
}

} // namespace beamlab
