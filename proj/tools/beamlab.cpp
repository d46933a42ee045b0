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

// beamlab: run channel-estimation and beam-tracking experiments, write CSV tables.

#include "beamlab/codebook.hpp"
#include "beamlab/harness.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace
{

using beamlab::ExperimentConfig;
using beamlab::Table;

struct CommonFlags
{
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = "results";
    std::optional<int> trials;
    std::vector<double> snr;
};

void add_common(CLI::App* sub, CommonFlags& flags)
{
    sub->add_option("--config", flags.config, "key=value config file");
    sub->add_option("--seed", flags.seed, "master seed (overrides config and BEAMLAB_SEED)");
    sub->add_option("--out", flags.out, "output directory")->capture_default_str();
    sub->add_option("--trials", flags.trials, "Monte Carlo trials per point")->check(CLI::PositiveNumber);
    sub->add_option("--snr", flags.snr, "SNR grid in dB, comma separated")->delimiter(',');
}

// defaults < BEAMLAB_SEED < config file < flags
ExperimentConfig resolve(const CommonFlags& flags)
{
    ExperimentConfig cfg;
    if (const char* env = std::getenv("BEAMLAB_SEED"); env != nullptr && *env != '\0')
        beamlab::apply_setting(cfg, "seed", env);
    if (!flags.config.empty())
        cfg = beamlab::load_config(flags.config, cfg);
    if (flags.seed)
        cfg.seed = *flags.seed;
    if (flags.trials)
        cfg.trials = *flags.trials;
    if (!flags.snr.empty())
        cfg.snr_db = flags.snr;
    cfg.validate();
    return cfg;
}

void write_all(const std::vector<Table>& tables, const std::filesystem::path& dir)
{
    for (const auto& t : tables)
    {
        beamlab::write_table(t, dir);
        std::cerr << "wrote " << (dir / (t.name + ".csv")).string() << " (" << t.rows.size() << " rows)\n";
    }
}

void dump_codebook(const ExperimentConfig& cfg, const std::filesystem::path& dir)
{
    const beamlab::Codebook book(beamlab::CodebookConfig{cfg.n_antennas, cfg.branching, cfg.stages, cfg.spacing});
    std::filesystem::create_directories(dir);
    const auto path = dir / "codebook.csv";
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write '" + path.string() + "'");
    beamlab::write_codebook_csv(out, book);
    std::cerr << "wrote " << path.string() << "\n";
}

using Runner = std::function<void(const ExperimentConfig&, const std::filesystem::path&)>;

Runner tables(std::vector<Table> (*fn)(const ExperimentConfig&))
{
    return [fn](const ExperimentConfig& cfg, const std::filesystem::path& dir) { write_all(fn(cfg), dir); };
}

void reproduce_all(const ExperimentConfig& cfg, const std::filesystem::path& dir)
{
    // Tracking sweeps use their own SNR grids unless one was given explicitly.
    std::cerr << "estimation sweeps\n";
    write_all(beamlab::run_estimation_suite(cfg), dir);
    std::cerr << "tracking sweep\n";
    write_all(beamlab::run_tracking_sweep(cfg), dir);
    std::cerr << "estimation-error impact\n";
    write_all(beamlab::run_estimation_error_impact(cfg), dir);
    dump_codebook(cfg, dir);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"beamlab: mmWave channel estimation and beam tracking experiments"};
    app.require_subcommand(1);

    const std::map<std::string, std::pair<std::string, Runner>> commands = {
        {"pee", {"estimation-error probability vs SNR, all policies", tables(beamlab::run_pee_sweep)}},
        {"bounds", {"empirical PEE with analytical bounds", tables(beamlab::run_bounds_sweep)}},
        {"feedback", {"mean feedback bits vs SNR", tables(beamlab::run_feedback_sweep)}},
        {"time", {"mean time slots vs SNR", tables(beamlab::run_time_sweep)}},
        {"track", {"tracking RMSE and valid durations", tables(beamlab::run_tracking_sweep)}},
        {"est-error", {"valid duration vs initial pointing error", tables(beamlab::run_estimation_error_impact)}},
        {"codebook-dump", {"write the hierarchical codebook", dump_codebook}},
        {"reproduce-all", {"run every experiment", reproduce_all}},
    };

    std::map<std::string, CommonFlags> flags;
    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, entry] : commands)
    {
        subs[name] = app.add_subcommand(name, entry.first);
        add_common(subs[name], flags[name]);
    }

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e)
    {
        std::cout << app.help();
        return 0;
    }
    catch (const CLI::ParseError& e)
    {
        std::cerr << e.what() << "\n\n" << app.help();
        return 2;
    }

    for (const auto& [name, entry] : commands)
    {
        if (!subs[name]->parsed())
            continue;
        try
        {
            const ExperimentConfig cfg = resolve(flags[name]);
            const auto start = std::chrono::steady_clock::now();
            entry.second(cfg, flags[name].out);
            const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
            std::cerr << name << " done in " << elapsed.count() << " s\n";
        }
        catch (const beamlab::ConfigError& e)
        {
            std::cerr << "config error: " << e.what() << "\n\n" << subs[name]->help();
            return 2;
        }
        catch (const std::exception& e)
        {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
    }
    return 0;
}
