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

#ifndef BEAMLAB_HARNESS_HPP
#define BEAMLAB_HARNESS_HPP

#include "beamlab/estimator.hpp"
#include "beamlab/tracker.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace beamlab
{

class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Every knob of every experiment. Empty lists and zero counts select the
/// per-experiment defaults (see snr_or / trials_or).
struct ExperimentConfig
{
    // channel estimation
    int n_antennas = 64;
    int branching = 2;
    int stages = 0; // 0: deepest level with K^S <= N
    double spacing = 0.5;
    double target_pee = 1e-2;
    int q_max = 264;
    double prior_var = 1.0;

    std::vector<double> snr_db;
    int trials = 0;

    // tracking
    std::vector<int> track_antennas{16, 32, 64, 128};
    double rho = 0.995;
    double dt = 1e-3;
    double sigma_w = 1.4;
    double height = 4.0;
    double initial_speed = 16.667;
    double initial_position = 4.0;
    double initial_position_var = 0.1;
    double initial_velocity_var = 1.0;
    double angle_noise_deg = 0.5;
    int horizon = 300;
    int error_antennas = 16;
    std::vector<double> error_fractions{0.0, 0.125, 0.25, 0.375, 0.5};
    bool write_traces = false;

    std::uint64_t seed = 1;
    bool parallel = true;

    void validate() const;

    std::vector<double> snr_or(std::vector<double> fallback) const;
    int trials_or(int fallback) const;
};

/// Applies one key=value setting. Unknown keys and malformed values throw ConfigError.
void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value);

/// Flat key=value text; '#' starts a comment, blank lines are ignored.
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {});

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

/// One CSV file: name.csv with a fixed header.
struct Table
{
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

void write_table(const Table& table, const std::filesystem::path& dir);

inline constexpr Policy kAllPolicies[] = {Policy::fixed_rate, Policy::optimal_feedback, Policy::raf,
                                          Policy::race_like};

/// One Monte Carlo trial of one policy at one SNR.
struct EstimationRecord
{
    int snr_index = 0;
    double snr_db = 0.0;
    Policy policy = Policy::raf;
    int trial = 0;
    EstimationOutcome outcome;
};

/// N0 such that a stage-1 matched observation with |alpha| = 1 has the given SNR.
double estimation_noise_var(const Codebook& book, double snr_db);

/// Runs every (snr, trial, policy). All policies of one trial share the truth and
/// the noise substreams. Records are ordered by (snr, trial, policy).
std::vector<EstimationRecord> run_estimation_trials(const ExperimentConfig& cfg, std::span<const double> snr_db,
                                                    int trials, std::span<const Policy> policies,
                                                    std::string_view experiment);

std::vector<Table> run_pee_sweep(const ExperimentConfig& cfg);
std::vector<Table> run_bounds_sweep(const ExperimentConfig& cfg);
std::vector<Table> run_feedback_sweep(const ExperimentConfig& cfg);
std::vector<Table> run_time_sweep(const ExperimentConfig& cfg);
/// pee, bounds, feedback and time tables from one shared set of trials.
std::vector<Table> run_estimation_suite(const ExperimentConfig& cfg);
std::vector<Table> run_tracking_sweep(const ExperimentConfig& cfg);
std::vector<Table> run_estimation_error_impact(const ExperimentConfig& cfg);

enum class TrackModel
{
    position,
    angle,
};

std::string_view track_model_name(TrackModel m);

/// Per-block RMSE of the transmit pointing error over all trials.
struct TrackingCurve
{
    std::vector<double> rmse;
    double threshold = 0.0; // BW / 2
    int valid_duration = 0;
    bool censored = false;  // threshold never crossed within the horizon
    std::vector<std::vector<TrackStep>> traces; // filled only when requested
};

/// Last block before the curve first exceeds the threshold; the full length if it never does.
int valid_duration(std::span<const double> rmse, double threshold, bool* censored = nullptr);

TrackingCurve run_tracking_curve(const ExperimentConfig& cfg, TrackModel model, int n_antennas, double snr_db,
                                 double offset_fraction, int trials, std::string_view experiment,
                                 bool keep_traces = false);

} // namespace beamlab

#endif // BEAMLAB_HARNESS_HPP
