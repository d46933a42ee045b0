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

#include "beamlab/harness.hpp"

#include "beamlab/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace beamlab
{

namespace
{

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view text)
{
    const std::string s(trim(text));
    std::size_t used = 0;
    double v = 0.0;
    try
    {
        v = std::stod(s, &used);
    }
    catch (const std::exception&)
    {
        used = 0;
    }
    if (s.empty() || used != s.size() || !std::isfinite(v))
        throw ConfigError("config key '" + std::string(key) + "': expected a number, got '" + s + "'");
    return v;
}

long long parse_integer(std::string_view key, std::string_view text)
{
    const std::string_view s = trim(text);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
        throw ConfigError("config key '" + std::string(key) + "': expected an integer, got '" + std::string(s) + "'");
    return v;
}

int parse_int(std::string_view key, std::string_view text)
{
    const long long v = parse_integer(key, text);
    if (v < INT32_MIN || v > INT32_MAX)
        throw ConfigError("config key '" + std::string(key) + "': value out of range");
    return static_cast<int>(v);
}

std::uint64_t parse_u64(std::string_view key, std::string_view text)
{
    const std::string_view s = trim(text);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
        throw ConfigError("config key '" + std::string(key) + "': expected a non-negative integer, got '" +
                          std::string(s) + "'");
    return v;
}

bool parse_bool(std::string_view key, std::string_view text)
{
    const std::string_view s = trim(text);
    if (s == "true" || s == "1" || s == "yes")
        return true;
    if (s == "false" || s == "0" || s == "no")
        return false;
    throw ConfigError("config key '" + std::string(key) + "': expected true/false, got '" + std::string(s) + "'");
}

template <class T, class F>
std::vector<T> parse_list(std::string_view key, std::string_view text, F item)
{
    std::vector<T> out;
    std::string_view rest = trim(text);
    if (rest.empty())
        return out;
    while (true)
    {
        const auto comma = rest.find(',');
        out.push_back(item(key, rest.substr(0, comma)));
        if (comma == std::string_view::npos)
            break;
        rest = rest.substr(comma + 1);
    }
    return out;
}

using Setter = std::function<void(ExperimentConfig&, std::string_view, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters()
{
    static const std::map<std::string, Setter, std::less<>> table = {
        {"n_antennas", [](auto& c, auto k, auto v) { c.n_antennas = parse_int(k, v); }},
        {"branching", [](auto& c, auto k, auto v) { c.branching = parse_int(k, v); }},
        {"stages", [](auto& c, auto k, auto v) { c.stages = parse_int(k, v); }},
        {"spacing", [](auto& c, auto k, auto v) { c.spacing = parse_double(k, v); }},
        {"target_pee", [](auto& c, auto k, auto v) { c.target_pee = parse_double(k, v); }},
        {"q_max", [](auto& c, auto k, auto v) { c.q_max = parse_int(k, v); }},
        {"prior_var", [](auto& c, auto k, auto v) { c.prior_var = parse_double(k, v); }},
        {"snr_db", [](auto& c, auto k, auto v) { c.snr_db = parse_list<double>(k, v, parse_double); }},
        {"trials", [](auto& c, auto k, auto v) { c.trials = parse_int(k, v); }},
        {"track_antennas", [](auto& c, auto k, auto v) { c.track_antennas = parse_list<int>(k, v, parse_int); }},
        {"rho", [](auto& c, auto k, auto v) { c.rho = parse_double(k, v); }},
        {"dt", [](auto& c, auto k, auto v) { c.dt = parse_double(k, v); }},
        {"sigma_w", [](auto& c, auto k, auto v) { c.sigma_w = parse_double(k, v); }},
        {"height", [](auto& c, auto k, auto v) { c.height = parse_double(k, v); }},
        {"initial_speed", [](auto& c, auto k, auto v) { c.initial_speed = parse_double(k, v); }},
        {"initial_position", [](auto& c, auto k, auto v) { c.initial_position = parse_double(k, v); }},
        {"initial_position_var", [](auto& c, auto k, auto v) { c.initial_position_var = parse_double(k, v); }},
        {"initial_velocity_var", [](auto& c, auto k, auto v) { c.initial_velocity_var = parse_double(k, v); }},
        {"angle_noise_deg", [](auto& c, auto k, auto v) { c.angle_noise_deg = parse_double(k, v); }},
        {"horizon", [](auto& c, auto k, auto v) { c.horizon = parse_int(k, v); }},
        {"error_antennas", [](auto& c, auto k, auto v) { c.error_antennas = parse_int(k, v); }},
        {"error_fractions",
         [](auto& c, auto k, auto v) { c.error_fractions = parse_list<double>(k, v, parse_double); }},
        {"write_traces", [](auto& c, auto k, auto v) { c.write_traces = parse_bool(k, v); }},
        {"seed", [](auto& c, auto k, auto v) { c.seed = parse_u64(k, v); }},
        {"parallel", [](auto& c, auto k, auto v) { c.parallel = parse_bool(k, v); }},
    };
    return table;
}

void require(bool ok, const std::string& message)
{
    if (!ok)
        throw ConfigError(message);
}

// Runs f(i) for i in [0, n), on all OpenMP threads or serially. The first
// exception thrown by any iteration is rethrown after the loop.
template <class F>
void for_each_index(bool parallel, long n, F&& f)
{
    if (!parallel)
    {
        for (long i = 0; i < n; ++i)
            f(i);
        return;
    }
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 8)
    for (long i = 0; i < n; ++i)
    {
        try
        {
            f(i);
        }
        catch (...)
        {
#pragma omp critical(beamlab_harness_error)
            if (!error)
                error = std::current_exception();
        }
    }
    if (error)
        std::rethrow_exception(error);
}

std::string str(double x) { return format_real(x); }
std::string str(int x) { return std::to_string(x); }
std::string str(bool x) { return x ? "1" : "0"; }

const std::vector<double> kEstimationSnr{-15, -10, -5, 0, 5, 10, 15};
const std::vector<double> kTrackingSnr{-5, 0, 5};
constexpr int kEstimationTrials = 10000;
constexpr int kTrackingTrials = 3000;
constexpr std::string_view kEstimationKey = "estimation";

CodebookConfig codebook_config(const ExperimentConfig& cfg)
{
    return CodebookConfig{cfg.n_antennas, cfg.branching, cfg.stages, cfg.spacing};
}

struct PolicyStats
{
    int trials = 0;
    double errors = 0;
    double outages = 0;
    double pilots = 0;
    double feedback_bits = 0;
    double feedback_events = 0;
    double time_slots = 0;
    double time_slots_per_event = 0;

    void add(const EstimationOutcome& o)
    {
        ++trials;
        errors += o.correct ? 0 : 1;
        outages += o.outage ? 1 : 0;
        pilots += o.pilots_used;
        feedback_bits += o.feedback_bits;
        feedback_events += o.feedback_events;
        time_slots += o.time_slots;
        time_slots_per_event += o.time_slots_per_event();
    }
    double mean(double total) const { return trials > 0 ? total / trials : 0.0; }
    double pee() const { return mean(errors); }
};

// stats[snr_index][policy]
std::vector<std::map<Policy, PolicyStats>> summarize(const std::vector<EstimationRecord>& records, std::size_t n_snr)
{
    std::vector<std::map<Policy, PolicyStats>> stats(n_snr);
    for (const auto& r : records)
        stats[static_cast<std::size_t>(r.snr_index)][r.policy].add(r.outcome);
    return stats;
}

double reduction(double value, double reference)
{
    return reference > 0.0 ? 1.0 - value / reference : 0.0;
}

RealMatrix generator_from_counts(std::span<const int> counts)
{
    int rows = 0;
    for (int c : counts)
        rows += c;
    RealMatrix g = RealMatrix::Zero(rows, static_cast<Eigen::Index>(counts.size()));
    int r = 0;
    for (std::size_t d = 0; d < counts.size(); ++d)
        for (int i = 0; i < counts[d]; ++i)
            g(r++, static_cast<Eigen::Index>(d)) = 1.0;
    return g;
}

} // namespace

void ExperimentConfig::validate() const
{
    require(n_antennas >= 1, "n_antennas must be >= 1");
    require(branching >= 2, "branching must be >= 2");
    require(stages >= 0, "stages must be >= 0");
    require(spacing >= 0.5, "spacing must be >= 0.5 wavelengths");
    require(target_pee > 0.0 && target_pee < 1.0, "target_pee must lie in (0, 1)");
    require(prior_var > 0.0, "prior_var must be positive");
    require(trials >= 0, "trials must be >= 1 (0 selects the experiment default)");
    for (double s : snr_db)
        require(std::isfinite(s), "snr_db entries must be finite");
    require(!track_antennas.empty(), "track_antennas must be non-empty");
    for (int n : track_antennas)
        require(n >= 1, "track_antennas entries must be >= 1");
    require(rho > 0.0 && rho <= 1.0, "rho must lie in (0, 1]");
    require(dt > 0.0, "dt must be positive");
    require(sigma_w >= 0.0, "sigma_w must be non-negative");
    require(height > 0.0, "height must be positive");
    require(initial_position_var >= 0.0 && initial_velocity_var >= 0.0, "initial variances must be non-negative");
    require(angle_noise_deg >= 0.0, "angle_noise_deg must be non-negative");
    require(horizon >= 1, "horizon must be >= 1");
    require(error_antennas >= 1, "error_antennas must be >= 1");
    require(!error_fractions.empty(), "error_fractions must be non-empty");
    try
    {
        const CodebookConfig cb = codebook_config(*this);
        cb.validate();
        require(q_max >= branching * branching * cb.stages(), "q_max must be >= branching^2 * stages");
    }
    catch (const std::invalid_argument& e)
    {
        throw ConfigError(e.what());
    }
}

std::vector<double> ExperimentConfig::snr_or(std::vector<double> fallback) const
{
    return snr_db.empty() ? fallback : snr_db;
}

int ExperimentConfig::trials_or(int fallback) const
{
    return trials > 0 ? trials : fallback;
}

void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value)
{
    const auto it = setters().find(trim(key));
    if (it == setters().end())
        throw ConfigError("unknown config key '" + std::string(trim(key)) + "'");
    it->second(cfg, it->first, value);
}

ExperimentConfig parse_config(std::string_view text, ExperimentConfig base)
{
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        std::string_view s = line;
        if (const auto hash = s.find('#'); hash != std::string_view::npos)
            s = s.substr(0, hash);
        s = trim(s);
        if (s.empty())
            continue;
        const auto eq = s.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
        apply_setting(base, s.substr(0, eq), s.substr(eq + 1));
    }
    return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot read config file '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), std::move(base));
}

void write_table(const Table& table, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    const auto path = dir / (table.name + ".csv");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write '" + path.string() + "'");
    CsvWriter csv(out);
    csv.row(table.header);
    for (const auto& row : table.rows)
        csv.row(row);
    if (!out)
        throw std::runtime_error("write failed for '" + path.string() + "'");
}

double estimation_noise_var(const Codebook& book, double snr_db)
{
    return std::pow(book.gain(1), 4) / db_to_linear(snr_db);
}

std::vector<EstimationRecord> run_estimation_trials(const ExperimentConfig& cfg, std::span<const double> snr_db,
                                                    int trials, std::span<const Policy> policies,
                                                    std::string_view experiment)
{
    cfg.validate();
    require(trials >= 1, "trial count must be >= 1");
    require(!snr_db.empty(), "SNR grid must be non-empty");
    const Codebook book(codebook_config(cfg));
    const ArrayConfig array{cfg.n_antennas, cfg.spacing};
    const EstimationLink link{array, array, &book, &book};
    const int np = static_cast<int>(policies.size());

    std::vector<EstimationRecord> records(snr_db.size() * static_cast<std::size_t>(trials) * np);
    const long cells = static_cast<long>(snr_db.size()) * trials;
    for_each_index(cfg.parallel, cells, [&](long cell) {
        const int si = static_cast<int>(cell / trials);
        const int t = static_cast<int>(cell % trials);
        PolicyConfig pc;
        pc.branching = cfg.branching;
        pc.q_max = cfg.q_max;
        pc.target_pee = cfg.target_pee;
        pc.prior_var = cfg.prior_var;
        pc.noise_var = estimation_noise_var(book, snr_db[si]);
        pc.reference_power = std::pow(book.gain(1), 4);

        const RandomStream stream = seed_trial(cfg.seed, experiment, static_cast<std::uint64_t>(si),
                                               static_cast<std::uint64_t>(t));
        RandomStream truth = stream.split(1);
        ChannelRealization ch;
        ch.alpha = truth.complex_normal(1.0);
        ch.phi = grid_angle(static_cast<int>(truth.uniform_index(cfg.n_antennas)), cfg.n_antennas, cfg.spacing);
        ch.theta = grid_angle(static_cast<int>(truth.uniform_index(cfg.n_antennas)), cfg.n_antennas, cfg.spacing);
        const RandomStream noise = stream.split(2);
        for (int p = 0; p < np; ++p)
        {
            auto& rec = records[static_cast<std::size_t>(cell) * np + p];
            rec.snr_index = si;
            rec.snr_db = snr_db[si];
            rec.policy = policies[p];
            rec.trial = t;
            rec.outcome = run_policy(policies[p], ch, link, pc, noise);
        }
    });
    return records;
}

namespace
{

std::vector<Table> pee_tables(const ExperimentConfig& cfg, const std::vector<double>& snr,
                              const std::vector<EstimationRecord>& records)
{
    Table trials{"pee_trials",
                 {"snr_db", "policy", "trial", "correct", "outage", "pilots", "feedback_bits", "feedback_events",
                  "time_slots", "time_slots_per_event"},
                 {}};
    trials.rows.reserve(records.size());
    for (const auto& r : records)
    {
        const auto& o = r.outcome;
        trials.rows.push_back({str(r.snr_db), std::string(policy_name(r.policy)), str(r.trial), str(o.correct),
                               str(o.outage), str(o.pilots_used), str(o.feedback_bits), str(o.feedback_events),
                               str(o.time_slots), str(o.time_slots_per_event())});
    }

    Table summary{"pee_summary",
                  {"snr_db", "policy", "trials", "pee", "pee_stderr", "outage_rate", "target_pee"},
                  {}};
    const auto stats = summarize(records, snr.size());
    for (std::size_t si = 0; si < snr.size(); ++si)
    {
        for (Policy p : kAllPolicies)
        {
            const auto& s = stats[si].at(p);
            const double pee = s.pee();
            summary.rows.push_back({str(snr[si]), std::string(policy_name(p)), str(s.trials), str(pee),
                                    str(std::sqrt(pee * (1.0 - pee) / s.trials)), str(s.mean(s.outages)),
                                    str(cfg.target_pee)});
        }
    }
    return {trials, summary};
}

std::vector<Table> bounds_tables(const ExperimentConfig& cfg, const std::vector<double>& snr,
                                 const std::vector<EstimationRecord>& records)
{
    const Codebook book(codebook_config(cfg));
    const int stages = book.config().stages();
    const int k2 = cfg.branching * cfg.branching;
    std::vector<double> gains;
    for (int s = 1; s <= stages; ++s)
        gains.push_back(book.gain(s));
    const std::vector<RealMatrix> initial(static_cast<std::size_t>(stages), RealMatrix::Identity(k2, k2));

    Table table{"bounds_summary",
                {"snr_db", "policy", "trials", "pee", "lower_bound", "upper_bound", "lower_bound_single_shot",
                 "upper_bound_realized", "within"},
                {}};
    const auto stats = summarize(records, snr.size());
    std::vector<double> lower(snr.size(), 0.0);
    std::vector<double> upper_realized(snr.size(), 0.0);
    std::vector<int> counted(snr.size(), 0);
    for (const auto& r : records)
    {
        if (r.policy != Policy::raf)
            continue;
        const double n0 = estimation_noise_var(book, r.snr_db);
        double lb = 0.0;
        std::vector<RealMatrix> realized;
        for (int s = 0; s < stages; ++s)
        {
            // realized pilot count spread evenly over the K^2 hypotheses
            const double per_hypothesis = static_cast<double>(r.outcome.stage_pilots[s]) / k2;
            lb = std::max(lb, pee_lower_bound(1.0, cfg.prior_var, gains[s], n0, 2.0 * per_hypothesis));
            realized.push_back(generator_from_counts(r.outcome.stage_row_counts[s]));
        }
        const auto si = static_cast<std::size_t>(r.snr_index);
        lower[si] += lb;
        upper_realized[si] += std::min(1.0, pee_upper_bound(realized, 1.0, cfg.prior_var, gains, n0));
        ++counted[si];
    }
    for (std::size_t si = 0; si < snr.size(); ++si)
    {
        const double n0 = estimation_noise_var(book, snr[si]);
        const auto& s = stats[si].at(Policy::raf);
        const double lb = lower[si] / counted[si];
        const double ub = std::min(1.0, pee_upper_bound(initial, 1.0, cfg.prior_var, gains, n0));
        const double pee = s.pee();
        table.rows.push_back({str(snr[si]), "raf", str(s.trials), str(pee), str(lb), str(ub),
                              str(pee_lower_bound(1.0, cfg.prior_var, gains[0], n0)),
                              str(upper_realized[si] / counted[si]), str(lb <= pee && pee <= ub)});
    }
    return {table};
}

std::vector<Table> feedback_tables(const std::vector<double>& snr, const std::vector<EstimationRecord>& records)
{
    const auto stats = summarize(records, snr.size());
    Table table{"feedback_summary",
                {"snr_db", "policy", "trials", "mean_feedback_bits", "mean_feedback_events", "reduction_vs_race_like"},
                {}};
    for (std::size_t si = 0; si < snr.size(); ++si)
    {
        const auto& race = stats[si].at(Policy::race_like);
        for (Policy p : kAllPolicies)
        {
            const auto& s = stats[si].at(p);
            table.rows.push_back({str(snr[si]), std::string(policy_name(p)), str(s.trials),
                                  str(s.mean(s.feedback_bits)), str(s.mean(s.feedback_events)),
                                  str(reduction(s.mean(s.feedback_bits), race.mean(race.feedback_bits)))});
        }
    }
    return {table};
}

std::vector<Table> time_tables(const std::vector<double>& snr, const std::vector<EstimationRecord>& records)
{
    const auto stats = summarize(records, snr.size());
    Table table{"time_summary",
                {"snr_db", "policy", "trials", "mean_pilots", "mean_time_slots", "mean_time_slots_per_event",
                 "reduction_vs_race_like"},
                {}};
    for (std::size_t si = 0; si < snr.size(); ++si)
    {
        const auto& race = stats[si].at(Policy::race_like);
        for (Policy p : kAllPolicies)
        {
            const auto& s = stats[si].at(p);
            table.rows.push_back({str(snr[si]), std::string(policy_name(p)), str(s.trials), str(s.mean(s.pilots)),
                                  str(s.mean(s.time_slots)), str(s.mean(s.time_slots_per_event)),
                                  str(reduction(s.mean(s.time_slots), race.mean(race.time_slots)))});
        }
    }
    return {table};
}

std::vector<EstimationRecord> estimation_records(const ExperimentConfig& cfg, const std::vector<double>& snr,
                                                std::span<const Policy> policies)
{
    return run_estimation_trials(cfg, snr, cfg.trials_or(kEstimationTrials), policies, kEstimationKey);
}

} // namespace

std::vector<Table> run_pee_sweep(const ExperimentConfig& cfg)
{
    const auto snr = cfg.snr_or(kEstimationSnr);
    return pee_tables(cfg, snr, estimation_records(cfg, snr, kAllPolicies));
}

std::vector<Table> run_bounds_sweep(const ExperimentConfig& cfg)
{
    const auto snr = cfg.snr_or(kEstimationSnr);
    const Policy raf[] = {Policy::raf};
    return bounds_tables(cfg, snr, estimation_records(cfg, snr, raf));
}

std::vector<Table> run_feedback_sweep(const ExperimentConfig& cfg)
{
    const auto snr = cfg.snr_or(kEstimationSnr);
    return feedback_tables(snr, estimation_records(cfg, snr, kAllPolicies));
}

std::vector<Table> run_time_sweep(const ExperimentConfig& cfg)
{
    const auto snr = cfg.snr_or(kEstimationSnr);
    return time_tables(snr, estimation_records(cfg, snr, kAllPolicies));
}

std::vector<Table> run_estimation_suite(const ExperimentConfig& cfg)
{
    const auto snr = cfg.snr_or(kEstimationSnr);
    const auto records = estimation_records(cfg, snr, kAllPolicies);
    std::vector<Table> out;
    for (auto part : {pee_tables(cfg, snr, records), bounds_tables(cfg, snr, records), feedback_tables(snr, records),
                      time_tables(snr, records)})
        out.insert(out.end(), part.begin(), part.end());
    return out;
}

std::string_view track_model_name(TrackModel m)
{
    return m == TrackModel::position ? "position" : "angle";
}

int valid_duration(std::span<const double> rmse, double threshold, bool* censored)
{
    for (std::size_t m = 0; m < rmse.size(); ++m)
    {
        if (rmse[m] > threshold)
        {
            if (censored)
                *censored = false;
            return static_cast<int>(m); // blocks are 1-based, so block m+1 is the first failure
        }
    }
    if (censored)
        *censored = true;
    return static_cast<int>(rmse.size());
}

TrackingCurve run_tracking_curve(const ExperimentConfig& cfg, TrackModel model, int n_antennas, double snr_db,
                                 double offset_fraction, int trials, std::string_view experiment, bool keep_traces)
{
    cfg.validate();
    require(trials >= 1, "trial count must be >= 1");
    MotionModel motion;
    motion.height = cfg.height;
    motion.block_duration = cfg.dt;
    motion.velocity_noise_std = cfg.sigma_w;
    motion.alpha_correlation = cfg.rho;
    const TrackLink link{{n_antennas, cfg.spacing}, {n_antennas, cfg.spacing}, 1.0, {1.0, 0.0}};
    TrackOptions options;
    options.horizon = cfg.horizon;
    options.noise_var = 1.0 / db_to_linear(snr_db);
    options.angle_noise_std = deg_to_rad(cfg.angle_noise_deg);

    TrackingCurve curve;
    curve.threshold = beamwidth(link.tx) / 2.0;
    const double offset = offset_fraction * beamwidth(link.tx);
    // Same streams for every model, SNR and offset: common random numbers.
    const std::string key = std::string(experiment) + "-N" + std::to_string(n_antennas);

    std::vector<std::vector<TrackStep>> traces(static_cast<std::size_t>(trials));
    for_each_index(cfg.parallel, trials, [&](long t) {
        const RandomStream stream = seed_trial(cfg.seed, key, 0, static_cast<std::uint64_t>(t));
        RandomStream init = stream.split(1);
        const TrackState truth{cfg.initial_position, cfg.initial_speed, init.complex_normal(1.0)};
        TrackBelief belief;
        belief.mean = truth.to_vector();
        const double phi = angles_from_position(truth.position, cfg.height).phi + offset;
        belief.mean(0) = cfg.height / std::tan(phi);
        belief.covariance = Vector4(cfg.initial_position_var, cfg.initial_velocity_var, 0.5, 0.5).asDiagonal();
        if (model == TrackModel::position)
            traces[t] = run_track(belief, truth, motion, link, options, stream.split(2));
        else
            traces[t] = run_track_angle_model(angle_belief_from(belief, motion, options.angle_noise_std), truth,
                                              motion, link, options, stream.split(2));
    });

    curve.rmse.assign(static_cast<std::size_t>(cfg.horizon), 0.0);
    for (const auto& trace : traces)
        for (std::size_t m = 0; m < trace.size(); ++m)
            curve.rmse[m] += trace[m].sq_err;
    for (double& v : curve.rmse)
        v = std::sqrt(v / trials);
    curve.valid_duration = valid_duration(curve.rmse, curve.threshold, &curve.censored);
    if (keep_traces)
        curve.traces = std::move(traces);
    return curve;
}

namespace
{

constexpr std::string_view kTrackingKey = "tracking";

void append_traces(Table& table, const TrackingCurve& curve, TrackModel model, int n, double snr)
{
    for (std::size_t t = 0; t < curve.traces.size(); ++t)
        for (const auto& s : curve.traces[t])
            table.rows.push_back({std::string(track_model_name(model)), str(n), str(snr), str(static_cast<int>(t)),
                                  str(s.block), str(s.true_phi), str(s.pointed_phi), str(s.sq_err),
                                  str(s.alpha_err)});
}

} // namespace

std::vector<Table> run_tracking_sweep(const ExperimentConfig& cfg)
{
    const auto snr = cfg.snr_or(kTrackingSnr);
    const int trials = cfg.trials_or(kTrackingTrials);
    Table rmse{"tracking_rmse", {"model", "n_antennas", "snr_db", "block", "rmse", "threshold"}, {}};
    Table duration{"tracking_duration",
                   {"model", "n_antennas", "snr_db", "trials", "valid_duration", "censored", "threshold"},
                   {}};
    Table traces{"tracking_traces",
                 {"model", "n_antennas", "snr_db", "trial", "block", "true_phi", "pointed_phi", "sq_err",
                  "alpha_err"},
                 {}};
    for (TrackModel model : {TrackModel::position, TrackModel::angle})
    {
        for (int n : cfg.track_antennas)
        {
            for (double s : snr)
            {
                const auto curve = run_tracking_curve(cfg, model, n, s, 0.0, trials, kTrackingKey, cfg.write_traces);
                const std::string name(track_model_name(model));
                for (std::size_t m = 0; m < curve.rmse.size(); ++m)
                    rmse.rows.push_back({name, str(n), str(s), str(static_cast<int>(m + 1)), str(curve.rmse[m]),
                                         str(curve.threshold)});
                duration.rows.push_back({name, str(n), str(s), str(trials), str(curve.valid_duration),
                                         str(curve.censored), str(curve.threshold)});
                if (cfg.write_traces)
                    append_traces(traces, curve, model, n, s);
            }
        }
    }
    std::vector<Table> out{rmse, duration};
    if (cfg.write_traces)
        out.push_back(std::move(traces));
    return out;
}

std::vector<Table> run_estimation_error_impact(const ExperimentConfig& cfg)
{
    const auto snr = cfg.snr_or({0.0});
    const int trials = cfg.trials_or(kTrackingTrials);
    const int n = cfg.error_antennas;
    const double bw = beamwidth(ArrayConfig{n, cfg.spacing});
    Table table{"error_impact",
                {"offset_fraction", "offset_rad", "n_antennas", "snr_db", "trials", "valid_duration", "censored",
                 "threshold"},
                {}};
    for (double s : snr)
    {
        for (double f : cfg.error_fractions)
        {
            const auto curve = run_tracking_curve(cfg, TrackModel::position, n, s, f, trials, kTrackingKey);
            table.rows.push_back({str(f), str(f * bw), str(n), str(s), str(trials), str(curve.valid_duration),
                                  str(curve.censored), str(curve.threshold)});
        }
    }
    return {table};
}

} // namespace beamlab
