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

#include "beamlab/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace beamlab
{

std::pair<int, int> index_to_subspaces(int d, int branching)
{
    if (branching < 1 || d < 1 || d > branching * branching)
        throw std::out_of_range("hypothesis " + std::to_string(d) + " outside [1, " +
                                std::to_string(branching * branching) + "]");
    const int k_t = (d + branching - 1) / branching;
    return {k_t, d - branching * (k_t - 1)};
}

int subspaces_to_index(int k_t, int k_r, int branching)
{
    if (k_t < 1 || k_t > branching || k_r < 1 || k_r > branching)
        throw std::out_of_range("subspace pair outside [1, K]");
    return (k_t - 1) * branching + k_r;
}

SparseSystem::SparseSystem(int branching, int stage, double gain, double power, double noise_var, double prior_var)
    : branching_(branching), stage_(stage), gain_(gain), power_(power), noise_var_(noise_var), prior_var_(prior_var),
      counts_(static_cast<std::size_t>(branching * branching), 0),
      sums_(static_cast<std::size_t>(branching * branching), Complex{0.0, 0.0})
{
    if (branching < 2)
        throw std::invalid_argument("branching factor K must be at least 2");
    if (!(noise_var > 0.0))
        throw std::invalid_argument("noise variance must be positive");
    if (!(gain > 0.0) || !(power > 0.0) || !(prior_var > 0.0))
        throw std::invalid_argument("gain, power and prior variance must be positive");
}

void SparseSystem::append(int d, Complex value)
{
    if (d < 1 || d > hypotheses())
        throw std::out_of_range("row hypothesis " + std::to_string(d) + " outside [1, " + std::to_string(hypotheses()) + "]");
    rows_.push_back(d);
    observations_.push_back(value);
    const auto i = static_cast<std::size_t>(d - 1);
    ++counts_[i];
    sums_[i] += value;
    energy_ += std::norm(value);
}

double SparseSystem::signal_var() const
{
    const double g2 = gain_ * gain_;
    return power_ * g2 * g2 * prior_var_;
}

RealMatrix SparseSystem::generator() const
{
    RealMatrix g = RealMatrix::Zero(size(), hypotheses());
    for (int r = 0; r < size(); ++r)
        g(r, rows_[static_cast<std::size_t>(r)] - 1) = 1.0;
    return g;
}

ComplexVector SparseSystem::observation_vector() const
{
    ComplexVector c(size());
    for (int r = 0; r < size(); ++r)
        c(r) = observations_[static_cast<std::size_t>(r)];
    return c;
}

std::vector<double> log_likelihoods(const SparseSystem& sys)
{
    const int q = sys.size();
    if (q < 1)
        throw std::invalid_argument("posterior needs at least one observation");
    if (!std::isfinite(sys.energy()))
        throw std::invalid_argument("non-finite observation in measurement system");

    const double n0 = sys.noise_var();
    const double gamma = sys.signal_var();
    const double common = -q * std::log(kPi) - (q - 1) * std::log(n0) - sys.energy() / n0;
    std::vector<double> ll(static_cast<std::size_t>(sys.hypotheses()));
    for (int d = 1; d <= sys.hypotheses(); ++d)
    {
        const double denom = n0 + gamma * sys.count(d);
        ll[static_cast<std::size_t>(d - 1)] =
            common - std::log(denom) + gamma * std::norm(sys.sum(d)) / (n0 * denom);
    }
    return ll;
}

std::vector<double> posterior(const SparseSystem& sys)
{
    auto ll = log_likelihoods(sys);
    const double peak = *std::max_element(ll.begin(), ll.end());
    double total = 0.0;
    for (auto& x : ll)
    {
        x = std::exp(x - peak);
        total += x;
    }
    for (auto& x : ll)
        x /= total;
    return ll;
}

MldDecision mld_detect(std::span<const double> post)
{
    MldDecision best{1, post.empty() ? 0.0 : post[0]};
    for (std::size_t i = 1; i < post.size(); ++i)
    {
        if (post[i] > best.confidence)
            best = {static_cast<int>(i) + 1, post[i]};
    }
    return best;
}

MldDecision mld_detect(const SparseSystem& sys)
{
    const auto post = posterior(sys);
    return mld_detect(post);
}

Complex estimate_alpha(const SparseSystem& sys, int d)
{
    if (d < 1 || d > sys.hypotheses())
        throw std::out_of_range("hypothesis outside [1, K^2]");
    const int n = sys.count(d);
    if (n == 0)
        throw std::invalid_argument("no observation measured on hypothesis " + std::to_string(d));
    const Complex mean = sys.sum(d) / static_cast<double>(n);
    return mean / (std::sqrt(sys.power()) * sys.gain() * sys.gain());
}

int shannon_lower_bound(Complex alpha_hat, double power, double noise_var, int branching, int stage, int q_max)
{
    if (!(noise_var > 0.0))
        throw std::invalid_argument("noise variance must be positive");
    const double stage_gain = std::pow(static_cast<double>(branching), 2.0 * stage - 2.0);
    const double snr = std::norm(alpha_hat) * power * stage_gain / noise_var;
    const double rate = std::log2(1.0 + snr);
    const double k2 = static_cast<double>(branching) * branching;
    if (!(rate > 0.0) || k2 / rate >= static_cast<double>(q_max))
        return q_max;
    return static_cast<int>(std::ceil(k2 / rate));
}

int feedback_bits_per_message(int branching)
{
    int bits = 0;
    while ((1 << bits) < branching)
        ++bits;
    return bits;
}

void PolicyConfig::validate(int stages) const
{
    if (branching < 2)
        throw std::invalid_argument("branching factor K must be at least 2");
    if (q_max < branching * branching * stages)
        throw std::invalid_argument("q_max = " + std::to_string(q_max) + " is below K^2 S = " +
                                    std::to_string(branching * branching * stages));
    if (!(target_pee > 0.0 && target_pee < 1.0))
        throw std::invalid_argument("target PEE must lie in (0, 1)");
    if (!(power > 0.0) || !(noise_var > 0.0) || !(prior_var > 0.0) || !(reference_power > 0.0))
        throw std::invalid_argument("power, noise and prior variances must be positive");
}

std::string_view policy_name(Policy p)
{
    switch (p)
    {
    case Policy::fixed_rate:
        return "fixed_rate";
    case Policy::optimal_feedback:
        return "optimal";
    case Policy::raf:
        return "raf";
    case Policy::race_like:
        return "race_like";
    }
    return "unknown";
}

Policy parse_policy(std::string_view name)
{
    for (Policy p : {Policy::fixed_rate, Policy::optimal_feedback, Policy::raf, Policy::race_like})
        if (policy_name(p) == name)
            return p;
    throw std::invalid_argument("unknown policy '" + std::string(name) + "'");
}

int nearest_grid_index(double angle, int n, double spacing_over_wavelength)
{
    const double u = spacing_over_wavelength * std::cos(angle) * n;
    long long i = std::llround(u) % n;
    if (i < 0)
        i += n;
    return static_cast<int>(i);
}

namespace
{

struct SteeringCache
{
    std::vector<Complex> alpha;
    std::vector<ComplexVector> rx; // a_r(theta_l)
    std::vector<ComplexVector> tx; // a_t(phi_l)
};

SteeringCache make_steering(const ChannelRealization& ch, const EstimationLink& link)
{
    SteeringCache cache;
    for (const auto& path : ch.components())
    {
        cache.alpha.push_back(path.alpha);
        cache.rx.push_back(array_response(link.rx_array, path.theta));
        cache.tx.push_back(array_response(link.tx_array, path.phi));
    }
    return cache;
}

/// One stage of pilots: fixed beam pairs, the measurement system and the noise stream.
class StageSession
{
public:
    StageSession(const SteeringCache& steer, const EstimationLink& link, const PolicyConfig& cfg, int stage,
                 int tx_first_block, int rx_first_block, RandomStream noise)
        : k_(cfg.branching),
          sys_(cfg.branching, stage,
               std::sqrt(link.tx_book->gain(stage) * link.rx_book->gain(stage)), cfg.power, cfg.noise_var,
               cfg.prior_var),
          noise_var_(cfg.noise_var), noise_(noise),
          mean_(static_cast<std::size_t>(cfg.branching * cfg.branching), Complex{0.0, 0.0})
    {
        const double amp = std::sqrt(cfg.power);
        for (int kt = 1; kt <= k_; ++kt)
        {
            const auto& f = link.tx_book->beam(stage, tx_first_block + kt - 1);
            for (int kr = 1; kr <= k_; ++kr)
            {
                const auto& w = link.rx_book->beam(stage, rx_first_block + kr - 1);
                Complex acc{0.0, 0.0};
                for (std::size_t l = 0; l < steer.alpha.size(); ++l)
                    acc += steer.alpha[l] * w.dot(steer.rx[l]) * steer.tx[l].dot(f);
                mean_[static_cast<std::size_t>(subspaces_to_index(kt, kr, k_) - 1)] = amp * acc;
            }
        }
    }

    void send(int d)
    {
        sys_.append(d, mean_[static_cast<std::size_t>(d - 1)] + noise_.complex_normal(noise_var_));
    }

    void send_cyclic() { send(cyclic_++ % (k_ * k_) + 1); }

    int pilots() const { return sys_.size(); }
    const SparseSystem& system() const { return sys_; }
    MldDecision detect() const { return mld_detect(sys_); }

private:
    int k_;
    SparseSystem sys_;
    double noise_var_;
    RandomStream noise_;
    std::vector<Complex> mean_;
    int cyclic_ = 0;
};

struct StageResult
{
    MldDecision decision;
    int feedback_bits = 0;
    int feedback_events = 0;
    bool outage = false;
};

StageResult run_stage(Policy policy, StageSession& session, const PolicyConfig& cfg, int stage)
{
    const int k2 = cfg.branching * cfg.branching;
    const int bits = feedback_bits_per_message(cfg.branching);
    const double threshold = 1.0 - cfg.target_pee;

    for (int i = 0; i < k2; ++i)
        session.send_cyclic();
    MldDecision dec = session.detect();

    StageResult res;
    switch (policy)
    {
    case Policy::fixed_rate:
        res.feedback_events = 1;
        res.feedback_bits = bits;
        break;

    case Policy::optimal_feedback:
    case Policy::race_like:
        while (dec.confidence < threshold && session.pilots() < cfg.q_max)
        {
            session.send_cyclic();
            dec = session.detect();
        }
        res.feedback_events = policy == Policy::optimal_feedback ? 1 : 1 + session.pilots() - k2;
        res.feedback_bits = bits * res.feedback_events;
        res.outage = dec.confidence < threshold;
        break;

    case Policy::raf:
    {
        auto pilot_bound = [&](const MldDecision& d) {
            const Complex alpha_hat = estimate_alpha(session.system(), d.hypothesis);
            return shannon_lower_bound(alpha_hat, cfg.reference_power, cfg.noise_var, cfg.branching, stage,
                                       cfg.q_max);
        };
        int bound = pilot_bound(dec);
        while (session.pilots() < bound && session.pilots() < cfg.q_max)
        {
            session.send_cyclic();
            dec = session.detect();
            bound = pilot_bound(dec);
        }
        int confirmations = 0;
        while (dec.confidence < threshold && session.pilots() < cfg.q_max)
        {
            // RX names the detected AoD subspace; TX answers with one pilot on that pair.
            ++res.feedback_events;
            res.feedback_bits += bits;
            session.send(dec.hypothesis);
            ++confirmations;
            dec = session.detect();
        }
        // Final report; in confirmation mode it carries the extra stop bit.
        ++res.feedback_events;
        res.feedback_bits += bits + (confirmations > 0 ? 1 : 0);
        res.outage = dec.confidence < threshold;
        break;
    }
    }
    res.decision = dec;
    return res;
}

int block_index(std::span<const int> path, int branching)
{
    int b = 0;
    for (int k : path)
        b = b * branching + (k - 1);
    return b;
}

} // namespace

EstimationOutcome run_policy(Policy policy, const ChannelRealization& ch, const EstimationLink& link,
                             const PolicyConfig& cfg, const RandomStream& stream)
{
    if (!link.tx_book || !link.rx_book)
        throw std::invalid_argument("estimation link is missing a codebook");
    const int stages = link.tx_book->stages();
    if (link.rx_book->stages() != stages || link.tx_book->branching() != cfg.branching ||
        link.rx_book->branching() != cfg.branching)
        throw std::invalid_argument("TX and RX codebooks must share K and S with the policy");
    if (link.tx_book->n_antennas() != link.tx_array.n_antennas || link.rx_book->n_antennas() != link.rx_array.n_antennas)
        throw std::invalid_argument("codebook size does not match the array");
    cfg.validate(stages);

    const SteeringCache steer = make_steering(ch, link);
    EstimationOutcome out;
    std::vector<int> tx_path, rx_path;
    Complex alpha_hat{0.0, 0.0};

    for (int s = 1; s <= stages; ++s)
    {
        StageSession session(steer, link, cfg, s, block_index(tx_path, cfg.branching) * cfg.branching,
                             block_index(rx_path, cfg.branching) * cfg.branching,
                             stream.split(static_cast<std::uint64_t>(s)));
        const StageResult res = run_stage(policy, session, cfg, s);
        const auto [k_t, k_r] = index_to_subspaces(res.decision.hypothesis, cfg.branching);
        tx_path.push_back(k_t);
        rx_path.push_back(k_r);
        out.k_t_hat.push_back(k_t);
        out.k_r_hat.push_back(k_r);
        out.stage_pilots.push_back(session.pilots());
        std::vector<int> counts;
        for (int d = 1; d <= session.system().hypotheses(); ++d)
            counts.push_back(session.system().count(d));
        out.stage_row_counts.push_back(std::move(counts));
        out.pilots_used += session.pilots();
        out.feedback_bits += res.feedback_bits;
        out.feedback_events += res.feedback_events;
        out.outage = out.outage || res.outage;
        if (s == stages)
            alpha_hat = estimate_alpha(session.system(), res.decision.hypothesis);
    }

    out.alpha_hat = alpha_hat;
    out.time_slots = out.pilots_used + out.feedback_bits;

    const auto paths = ch.components();
    const auto& los = paths.front();
    const int tx_leaf = link.tx_book->block_of(
        stages, nearest_grid_index(los.phi, link.tx_array.n_antennas, link.tx_array.spacing_over_wavelength));
    const int rx_leaf = link.rx_book->block_of(
        stages, nearest_grid_index(los.theta, link.rx_array.n_antennas, link.rx_array.spacing_over_wavelength));
    out.correct = block_index(tx_path, cfg.branching) == tx_leaf && block_index(rx_path, cfg.branching) == rx_leaf;
    return out;
}

EstimationOutcome run_fixed_rate(const ChannelRealization& ch, const EstimationLink& link, const PolicyConfig& cfg,
                                 const RandomStream& stream)
{
    return run_policy(Policy::fixed_rate, ch, link, cfg, stream);
}

EstimationOutcome run_optimal_feedback(const ChannelRealization& ch, const EstimationLink& link,
                                       const PolicyConfig& cfg, const RandomStream& stream)
{
    return run_policy(Policy::optimal_feedback, ch, link, cfg, stream);
}

EstimationOutcome run_race_like(const ChannelRealization& ch, const EstimationLink& link, const PolicyConfig& cfg,
                                const RandomStream& stream)
{
    return run_policy(Policy::race_like, ch, link, cfg, stream);
}

EstimationOutcome run_raf(const ChannelRealization& ch, const EstimationLink& link, const PolicyConfig& cfg,
                          const RandomStream& stream)
{
    return run_policy(Policy::raf, ch, link, cfg, stream);
}

double pairwise_error_prob(double omega)
{
    if (std::isinf(omega))
        return 0.0;
    const double o2 = omega * omega;
    return 0.5 - std::sqrt(o2 / (8.0 + 4.0 * o2));
}

double stage_pee_upper_bound(const RealMatrix& generator, double power, double prior_var, double gain,
                             double noise_var)
{
    const auto hyps = generator.cols();
    if (hyps < 2)
        throw std::invalid_argument("generator needs at least two hypotheses");
    const double g2 = gain * gain;
    const double scale = std::sqrt(power * prior_var * g2 * g2 / (2.0 * noise_var));
    const double prior = 1.0 / static_cast<double>(hyps);
    double total = 0.0;
    for (Eigen::Index v = 0; v < hyps; ++v)
    {
        for (Eigen::Index w = 0; w < hyps; ++w)
        {
            if (v == w)
                continue;
            const double dist = (generator.col(v) - generator.col(w)).squaredNorm();
            total += prior * pairwise_error_prob(scale * dist);
        }
    }
    return total;
}

double pee_upper_bound(std::span<const RealMatrix> generators, double power, double prior_var,
                       std::span<const double> gains, double noise_var)
{
    if (generators.size() != gains.size())
        throw std::invalid_argument("one generator and one gain per stage required");
    double total = 0.0;
    for (std::size_t s = 0; s < generators.size(); ++s)
        total += stage_pee_upper_bound(generators[s], power, prior_var, gains[s], noise_var);
    return total;
}

double pee_lower_bound(double power, double prior_var, double gain, double noise_var, double dv_norm_sq)
{
    const double g2 = gain * gain;
    const double x = power * prior_var * g2 * g2 * dv_norm_sq;
    return std::max(0.0, 0.5 - std::sqrt(x / (16.0 * noise_var + x)));
}

} // namespace beamlab
