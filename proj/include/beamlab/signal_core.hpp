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

#ifndef BEAMLAB_SIGNAL_CORE_HPP
#define BEAMLAB_SIGNAL_CORE_HPP

#include "beamlab/types.hpp"

#include <vector>

namespace beamlab
{

/// Uniform linear array. Only the spacing-to-wavelength ratio enters the response.
struct ArrayConfig
{
    int n_antennas = 1;
    double spacing_over_wavelength = 0.5;

    void validate() const;
};

struct PathComponent
{
    Complex alpha;
    double theta = 0.0; // arrival, radians
    double phi = 0.0;   // departure, radians
};

/// Ground truth for one trial. With `paths` empty the channel is the single
/// path (alpha, theta, phi); otherwise `paths` lists every component.
struct ChannelRealization
{
    Complex alpha;
    double theta = 0.0;
    double phi = 0.0;
    std::vector<PathComponent> paths;

    std::vector<PathComponent> components() const;
};

struct Observation
{
    Complex value;
    int tx_index = 0;
    int rx_index = 0;
    int stage = 0;
};

/// (1/sqrt(N)) exp(-j 2 pi (d/lambda) p cos(angle)), p = 0..N-1.
ComplexVector array_response(const ArrayConfig& cfg, double angle);

/// Response at a given cosine; array_response(cfg, a) == array_response_cos(cfg, cos a).
ComplexVector array_response_cos(const ArrayConfig& cfg, double cosine);

/// Normalized array factor (1/N) sum_p exp(j 2 pi (d/lambda) p delta_cos).
/// w(pointing)^H a(true) == array_factor(cfg, cos(pointing) - cos(true)).
Complex array_factor(const ArrayConfig& cfg, double delta_cos);

/// Sum of p * exp(j 2 pi (d/lambda) p delta_cos) / N, used by the tracking Jacobians.
Complex array_factor_weighted(const ArrayConfig& cfg, double delta_cos);

/// sum_l alpha_l a_r(theta_l) a_t(phi_l)^H, an N_r x N_t matrix.
ComplexMatrix channel_matrix(const ArrayConfig& rx, const ArrayConfig& tx, const ChannelRealization& ch);

/// sqrt(P) w^H H f x + n. Beamformers must be unit norm and the pilot unit modulus.
Complex observe(const ComplexVector& w, const ComplexMatrix& H, const ComplexVector& f,
                double power, Complex pilot, Complex noise);

/// observe() with steering-vector beamformers at the pointing angles, evaluated in
/// separable closed form: O(N_r + N_t) per path instead of forming H.
Complex observe_tracking(double pointing_theta, double pointing_phi, const ChannelRealization& ch,
                         const ArrayConfig& rx, const ArrayConfig& tx, double power, Complex pilot,
                         Complex noise);

/// Literal double sum over (p, q) with b_pq = p cos(pointing_theta) - q cos(pointing_phi).
/// O(N_r N_t); serial reference for observe_tracking.
Complex observe_tracking_double_sum(double pointing_theta, double pointing_phi, const ChannelRealization& ch,
                                    const ArrayConfig& rx, const ArrayConfig& tx, double power,
                                    Complex pilot, Complex noise);

/// Cosine of grid point `index` on an N-point spatial-frequency grid:
/// (d/lambda) cos == index / N (mod 1), folded into [-1, 1).
double grid_cosine(int index, int n, double spacing_over_wavelength = 0.5);

/// Physical angle in (0, pi] whose cosine is grid_cosine().
double grid_angle(int index, int n, double spacing_over_wavelength = 0.5);

} // namespace beamlab

#endif // BEAMLAB_SIGNAL_CORE_HPP
