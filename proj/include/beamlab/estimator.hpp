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

#ifndef BEAMLAB_ESTIMATOR_HPP
#define BEAMLAB_ESTIMATOR_HPP

#include "beamlab/codebook.hpp"
#include "beamlab/rng.hpp"
#include "beamlab/signal_core.hpp"
#include "beamlab/types.hpp"

#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace beamlab
{

/// Hypothesis d (1-based, d = (k_t - 1) K + k_r) to the (TX, RX) subspace pair.
std::pair<int, int> index_to_subspaces(int d, int branching);
int subspaces_to_index(int k_t, int k_r, int branching);

/// Stage measurement system c = sqrt(P) C_s^2 alpha G v + n.
///
/// Every row of G is one-hot, so G is stored as the hypothesis index of each row.
/// Per-hypothesis row counts and observation sums are kept alongside; they are
/// all the posterior needs.
class SparseSystem
{
public:
    SparseSystem(int branching, int stage, double gain, double power, double noise_var, double prior_var = 1.0);

    /// Appends one observation measured on hypothesis d (1-based).
    void append(int d, Complex value);

    int branching() const { return branching_; }
    int hypotheses() const { return branching_ * branching_; }
    int stage() const { return stage_; }
    double gain() const { return gain_; }
    double power() const { return power_; }
    double noise_var() const { return noise_var_; }
    double prior_var() const { return prior_var_; }
    int size() const { return static_cast<int>(rows_.size()); }

    /// P C_s^4 Q, the signal variance on a matched row.
    double signal_var() const;

    std::span<const int> rows() const { return rows_; }
    std::span<const Complex> observations() const { return observations_; }
    int count(int d) const { return counts_[static_cast<std::size_t>(d - 1)]; }
    Complex sum(int d) const { return sums_[static_cast<std::size_t>(d - 1)]; }
    double energy() const { return energy_; }

    /// Dense q x K^2 generator matrix.
    RealMatrix generator() const;
    ComplexVector observation_vector() const;

private:
    int branching_;
    int stage_;
    double gain_;
    double power_;
    double noise_var_;
    double prior_var_;
    std::vector<int> rows_;
    std::vector<Complex> observations_;
    std::vector<int> counts_;
    std::vector<Complex> sums_;
    double energy_ = 0.0;
};

/// log f(c | v = e_d) for every hypothesis, using the rank-one inverse and
/// determinant of Sigma_v = gamma (G v)(G v)^T + N0 I.
std::vector<double> log_likelihoods(const SparseSystem& sys);

/// p(v | c) over the K^2 hypotheses with a uniform prior; entry d-1 is hypothesis d.
std::vector<double> posterior(const SparseSystem& sys);

struct MldDecision
{
    int hypothesis = 1; // 1-based
    double confidence = 0.0;
};

/// Maximum a-posteriori hypothesis; ties go to the smallest index.
MldDecision mld_detect(const SparseSystem& sys);
MldDecision mld_detect(std::span<const double> post);

/// Mean of the observations measured on hypothesis d, divided by sqrt(P) C_s^2.
Complex estimate_alpha(const SparseSystem& sys, int d);

/// ceil(K^2 / log2(1 + |alpha|^2 P K^(2s-2) / N0)), capped at q_max.
int shannon_lower_bound(Complex alpha_hat, double power, double noise_var, int branching, int stage, int q_max);

/// ceil(log2 K), the bits needed to name one TX subspace.
int feedback_bits_per_message(int branching);

struct PolicyConfig
{
    int branching = 2;
    int q_max = 264; // pilot cap per stage
    double target_pee = 1e-2;
    double power = 1.0;
    double noise_var = 1.0;
    double prior_var = 1.0;
    /// Power used in the pilot-count lower bound; stage-1 beam gain C_1^4 is folded in
    /// so that |alpha|^2 P_ref K^(2s-2) / N0 is the matched-row SNR at stage s.
    double reference_power = 1.0;

    void validate(int stages) const;
};

struct EstimationOutcome
{
    std::vector<int> k_t_hat;
    std::vector<int> k_r_hat;
    std::vector<int> stage_pilots;
    std::vector<std::vector<int>> stage_row_counts; // rows of G per hypothesis, per stage
    Complex alpha_hat;
    int pilots_used = 0;
    int feedback_bits = 0;
    int feedback_events = 0;
    int time_slots = 0; // pilots + feedback bits, one slot per bit
    bool correct = false;
    bool outage = false;

    int time_slots_per_event() const { return pilots_used + feedback_events; }
    bool operator==(const EstimationOutcome&) const = default;
};

enum class Policy
{
    fixed_rate,
    optimal_feedback,
    raf,
    race_like,
};

std::string_view policy_name(Policy p);
Policy parse_policy(std::string_view name);

/// Arrays, codebooks and truth shared by all policies for one trial.
struct EstimationLink
{
    ArrayConfig tx_array;
    ArrayConfig rx_array;
    const Codebook* tx_book = nullptr;
    const Codebook* rx_book = nullptr;
};

/// Grid index whose spatial frequency is nearest to cos(angle).
int nearest_grid_index(double angle, int n, double spacing_over_wavelength);

/// K^2 pilots per stage, no confidence control.
EstimationOutcome run_fixed_rate(const ChannelRealization& ch, const EstimationLink& link, const PolicyConfig& cfg,
                                 const RandomStream& stream);

/// Cyclic pilots until the posterior clears 1 - Gamma, then one AoD feedback per stage.
EstimationOutcome run_optimal_feedback(const ChannelRealization& ch, const EstimationLink& link,
                                       const PolicyConfig& cfg, const RandomStream& stream);

/// Same measurements as run_optimal_feedback with a feedback message after the
/// initial round and after every later pilot.
EstimationOutcome run_race_like(const ChannelRealization& ch, const EstimationLink& link, const PolicyConfig& cfg,
                                const RandomStream& stream);

/// Robust adaptive multi-feedback: cyclic pilots up to the Shannon pilot bound,
/// then confirmation pilots on the detected pair with one feedback per pilot.
EstimationOutcome run_raf(const ChannelRealization& ch, const EstimationLink& link, const PolicyConfig& cfg,
                          const RandomStream& stream);

EstimationOutcome run_policy(Policy p, const ChannelRealization& ch, const EstimationLink& link,
                             const PolicyConfig& cfg, const RandomStream& stream);

/// 0.5 - sqrt(omega^2 / (8 + 4 omega^2)).
double pairwise_error_prob(double omega);

/// Union bound for one stage: sum over ordered pairs (v, v_hat), uniform prior.
double stage_pee_upper_bound(const RealMatrix& generator, double power, double prior_var, double gain,
                             double noise_var);

/// Sum of the per-stage union bounds. Not clipped.
double pee_upper_bound(std::span<const RealMatrix> generators, double power, double prior_var,
                       std::span<const double> gains, double noise_var);

/// max(0, 0.5 - sqrt(x / (16 N0 + x))), x = P Q C_s^4 ||v - v_hat||^2.
double pee_lower_bound(double power, double prior_var, double gain, double noise_var, double dv_norm_sq = 2.0);

} // namespace beamlab

#endif // BEAMLAB_ESTIMATOR_HPP
