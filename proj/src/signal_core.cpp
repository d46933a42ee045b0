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

#include "beamlab/signal_core.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace beamlab
{

void ArrayConfig::validate() const
{
    if (n_antennas < 1)
        throw std::invalid_argument("array needs at least one antenna, got " + std::to_string(n_antennas));
    if (!(spacing_over_wavelength > 0.0))
        throw std::invalid_argument("antenna spacing must be positive");
}

std::vector<PathComponent> ChannelRealization::components() const
{
    if (!paths.empty())
        return paths;
    return {PathComponent{alpha, theta, phi}};
}

ComplexVector array_response_cos(const ArrayConfig& cfg, double cosine)
{
    cfg.validate();
    const int n = cfg.n_antennas;
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    const double step = -2.0 * kPi * cfg.spacing_over_wavelength * cosine;
    ComplexVector a(n);
    for (int p = 0; p < n; ++p)
        a(p) = std::polar(scale, step * p);
    return a;
}

ComplexVector array_response(const ArrayConfig& cfg, double angle)
{
    return array_response_cos(cfg, std::cos(angle));
}

Complex array_factor(const ArrayConfig& cfg, double delta_cos)
{
    const double step = 2.0 * kPi * cfg.spacing_over_wavelength * delta_cos;
    Complex acc{0.0, 0.0};
    for (int p = 0; p < cfg.n_antennas; ++p)
        acc += std::polar(1.0, step * p);
    return acc / static_cast<double>(cfg.n_antennas);
}

Complex array_factor_weighted(const ArrayConfig& cfg, double delta_cos)
{
    const double step = 2.0 * kPi * cfg.spacing_over_wavelength * delta_cos;
    Complex acc{0.0, 0.0};
    for (int p = 1; p < cfg.n_antennas; ++p)
        acc += static_cast<double>(p) * std::polar(1.0, step * p);
    return acc / static_cast<double>(cfg.n_antennas);
}

ComplexMatrix channel_matrix(const ArrayConfig& rx, const ArrayConfig& tx, const ChannelRealization& ch)
{
    rx.validate();
    tx.validate();
    ComplexMatrix h = ComplexMatrix::Zero(rx.n_antennas, tx.n_antennas);
    for (const auto& path : ch.components())
        h += path.alpha * array_response(rx, path.theta) * array_response(tx, path.phi).adjoint();
    return h;
}

Complex observe(const ComplexVector& w, const ComplexMatrix& H, const ComplexVector& f,
                double power, Complex pilot, Complex noise)
{
    if (w.size() != H.rows() || f.size() != H.cols())
        throw std::invalid_argument("observe: beamformer sizes (" + std::to_string(w.size()) + ", " +
                                    std::to_string(f.size()) + ") do not match channel " +
                                    std::to_string(H.rows()) + "x" + std::to_string(H.cols()));
    if (std::abs(w.norm() - 1.0) > 1e-9 || std::abs(f.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("observe: beamformers must have unit norm");
    if (std::abs(std::abs(pilot) - 1.0) > 1e-9)
        throw std::invalid_argument("observe: pilot must have unit modulus");
    const Complex gain = w.dot(H * f); // dot() conjugates the left operand
    return std::sqrt(power) * gain * pilot + noise;
}

Complex observe_tracking(double pointing_theta, double pointing_phi, const ChannelRealization& ch,
                         const ArrayConfig& rx, const ArrayConfig& tx, double power, Complex pilot,
                         Complex noise)
{
    rx.validate();
    tx.validate();
    const double cos_tp = std::cos(pointing_theta);
    const double cos_pp = std::cos(pointing_phi);
    Complex acc{0.0, 0.0};
    for (const auto& path : ch.components())
    {
        const Complex rx_gain = array_factor(rx, cos_tp - std::cos(path.theta));
        const Complex tx_gain = array_factor(tx, std::cos(path.phi) - cos_pp);
        acc += path.alpha * rx_gain * tx_gain;
    }
    return std::sqrt(power) * acc * pilot + noise;
}

Complex observe_tracking_double_sum(double pointing_theta, double pointing_phi, const ChannelRealization& ch,
                                    const ArrayConfig& rx, const ArrayConfig& tx, double power,
                                    Complex pilot, Complex noise)
{
    rx.validate();
    tx.validate();
    const double kr = 2.0 * kPi * rx.spacing_over_wavelength;
    const double kt = 2.0 * kPi * tx.spacing_over_wavelength;
    const double cos_tp = std::cos(pointing_theta);
    const double cos_pp = std::cos(pointing_phi);
    Complex acc{0.0, 0.0};
    for (const auto& path : ch.components())
    {
        const double cos_t = std::cos(path.theta);
        const double cos_p = std::cos(path.phi);
        Complex sum{0.0, 0.0};
        for (int q = 0; q < tx.n_antennas; ++q)
        {
            for (int p = 0; p < rx.n_antennas; ++p)
            {
                // -p cos(theta) + q cos(phi) + b_pq
                const double phase = kr * p * (cos_tp - cos_t) + kt * q * (cos_p - cos_pp);
                sum += std::polar(1.0, phase);
            }
        }
        acc += path.alpha * sum / static_cast<double>(rx.n_antennas * tx.n_antennas);
    }
    return std::sqrt(power) * acc * pilot + noise;
}

double grid_cosine(int index, int n, double spacing_over_wavelength)
{
    if (n < 1 || index < 0 || index >= n)
        throw std::invalid_argument("grid index " + std::to_string(index) + " outside [0, " + std::to_string(n) + ")");
    if (spacing_over_wavelength < 0.5)
        throw std::invalid_argument("spatial-frequency grid needs spacing >= lambda/2 to be realizable");
    // (d/lambda) cos = index/N - m for the integer m that lands cos in [-1, 1)
    const double u = static_cast<double>(index) / n;
    double c = u / spacing_over_wavelength;
    while (c >= 1.0)
        c -= 1.0 / spacing_over_wavelength;
    return c;
}

double grid_angle(int index, int n, double spacing_over_wavelength)
{
    return std::acos(grid_cosine(index, n, spacing_over_wavelength));
}

} // namespace beamlab
