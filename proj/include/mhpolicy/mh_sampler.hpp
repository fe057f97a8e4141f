#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mhpolicy/errors.hpp"
#include "mhpolicy/param_vector.hpp"
#include "mhpolicy/policy.hpp"
#include "mhpolicy/random.hpp"

namespace mhpolicy {

/// Geometric cooling T_i = T₀ · ε^i.
struct AnnealSchedule {
    double initial_temperature = 1.0;
    double cooling_rate = 0.999;

    void validate() const {
        if (!(initial_temperature > 0.0) || !std::isfinite(initial_temperature))
            throw validation_error("initial_temperature", "requirement T > 0 violated");
        if (!(cooling_rate > 0.0 && cooling_rate < 1.0))
            throw validation_error("cooling_rate", "requirement epsilon in (0, 1) violated");
    }

    double temperature_at(std::size_t iteration) const {
        return initial_temperature * std::pow(cooling_rate, static_cast<double>(iteration));
    }
};

struct ChainState {
    ParamVector theta;
    double reward_estimate = 0.0;
    double temperature = 1.0;
    std::size_t iteration = 0;
};

struct ChainRecord {
    std::size_t iteration = 0;
    double reward = 0.0;
    bool accepted = false;
    bool greedy = false;
    double temperature = 0.0; // after cooling
    double elapsed_s = 0.0;
};

struct ChainTrace {
    std::vector<ChainRecord> records;

    std::size_t size() const noexcept { return records.size(); }
    std::vector<double> rewards() const {
        std::vector<double> out;
        out.reserve(records.size());
        for (const auto& r : records) out.push_back(r.reward);
        return out;
    }
};

/// log f(θ) + r̂/T, the unnormalised log posterior given optimality.
inline double log_target(const ParamVector& theta, double reward_estimate, double temperature,
                         const ProposalConfig& prior) {
    if (!(temperature > 0.0) || !std::isfinite(temperature))
        throw contract_violation("log_target: temperature must be positive and finite");
    if (!std::isfinite(reward_estimate)) throw contract_violation("log_target: non-finite reward estimate");
    return log_prior_density(theta, prior) + reward_estimate / temperature;
}

/// log α for moving from `current` to the proposal, both at the current temperature.
inline double acceptance_log_ratio(const ChainState& current, const ParamVector& proposed_theta,
                                   double proposed_reward, const ProposalConfig& prior) {
    return log_target(proposed_theta, proposed_reward, current.temperature, prior) -
           log_target(current.theta, current.reward_estimate, current.temperature, prior);
}

inline double acceptance_probability(double log_ratio) {
    return log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
}

struct MhStepResult {
    ChainState next;
    ChainRecord record;
};

/// One iteration of the annealed chain with arbitrary proposal and reward
/// evaluation:
///   θ' = propose(θ, rng); r̂' = estimate(θ', rng)
///   r̂' > r̂  → accept without drawing p (greedy branch)
///   else     → accept iff α ≥ p, p ~ U(0,1)
///   T ← εT after the decision.
/// A rejected step keeps θ and r̂ unchanged; r̂ is never re-estimated.
template <class Propose, class Estimate>
MhStepResult metropolis_step(const ChainState& state, Propose&& propose_fn, Estimate&& estimate,
                             const ProposalConfig& prior, double cooling_rate, Rng& rng) {
    ParamVector candidate = propose_fn(state.theta, rng);
    const double candidate_reward = estimate(candidate, rng);

    MhStepResult out{state, {}};
    bool accept = false;
    bool greedy = false;
    if (candidate_reward > state.reward_estimate) {
        accept = true;
        greedy = true;
    } else {
        const double alpha = std::exp(acceptance_log_ratio(state, candidate, candidate_reward, prior));
        const double p = uniform01(rng);
        accept = alpha >= p;
    }
    if (accept) {
        out.next.theta = std::move(candidate);
        out.next.reward_estimate = candidate_reward;
    }
    out.next.temperature = state.temperature * cooling_rate;
    out.next.iteration = state.iteration + 1;
    out.record = {out.next.iteration, out.next.reward_estimate, accept, greedy, out.next.temperature, 0.0};
    return out;
}

/// Metropolis step with the Gaussian random-walk proposal N(θ, σ²I).
template <class Estimate>
MhStepResult mh_step(const ChainState& state, Estimate&& estimate, const ProposalConfig& proposal,
                     const ProposalConfig& prior, double cooling_rate, Rng& rng) {
    return metropolis_step(
        state, [&](const ParamVector& theta, Rng& r) { return propose(theta, proposal, r); },
        std::forward<Estimate>(estimate), prior, cooling_rate, rng);
}

struct MhConfig {
    std::size_t n_iterations = 10000;
    AnnealSchedule schedule;
    ProposalConfig proposal{0.1};
    ProposalConfig prior{1.0};
    /// Fill ChainRecord::elapsed_s. Off by default so traces are reproducible byte for byte.
    bool record_timing = false;

    void validate() const {
        if (n_iterations == 0) throw validation_error("n_iterations", "requirement n > 0 violated");
        proposal.validate("proposal_sigma");
        prior.validate("prior_sigma");
        schedule.validate();
    }
};

struct ChainResult {
    ChainTrace trace;
    /// θ₀ … θ_n.
    std::vector<ParamVector> samples;
    /// r̂ attached to each entry of `samples`.
    std::vector<double> sample_rewards;
    /// Wall-clock of the whole sampling loop, including θ₀'s estimate.
    double elapsed_s = 0.0;

    std::size_t best_sample_index() const {
        return static_cast<std::size_t>(std::max_element(sample_rewards.begin(), sample_rewards.end()) -
                                        sample_rewards.begin());
    }
};

/// Full annealed chain: θ₀ ~ N(0, σ_prior² I), r̂₀ estimated, then
/// n_iterations Metropolis steps. `estimate` is called as estimate(θ, rng).
template <PolicyModel P, class Estimate>
ChainResult run_chain(const MhConfig& config, const P& policy, Estimate& estimate, Rng& rng) {
    config.validate();
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    auto seconds_since_start = [&] { return std::chrono::duration<double>(clock::now() - start).count(); };

    ChainResult result;
    result.samples.reserve(config.n_iterations + 1);
    result.sample_rewards.reserve(config.n_iterations + 1);
    result.trace.records.reserve(config.n_iterations);

    ChainState state;
    state.theta = init_params(policy, config.prior, rng);
    state.reward_estimate = estimate(state.theta, rng);
    state.temperature = config.schedule.initial_temperature;
    result.samples.push_back(state.theta);
    result.sample_rewards.push_back(state.reward_estimate);

    for (std::size_t i = 0; i < config.n_iterations; ++i) {
        auto [next, record] = mh_step(state, estimate, config.proposal, config.prior,
                                      config.schedule.cooling_rate, rng);
        if (config.record_timing) record.elapsed_s = seconds_since_start();
        result.trace.records.push_back(record);
        result.samples.push_back(next.theta);
        result.sample_rewards.push_back(next.reward_estimate);
        state = std::move(next);
    }
    result.elapsed_s = seconds_since_start();
    return result;
}

/// Discretised f(θ | O) on a finite grid: w_k ∝ exp(log_prior_k + u_k / T),
/// normalised in log space after subtracting the maximum exponent.
inline std::vector<double> grid_posterior(std::span<const double> utilities, std::span<const double> log_priors,
                                          double temperature) {
    if (utilities.size() != log_priors.size() || utilities.size() < 2)
        throw std::invalid_argument("grid_posterior: need two or more points with matching priors");
    if (!(temperature > 0.0)) throw std::invalid_argument("grid_posterior: temperature must be positive");

    std::vector<double> w(utilities.size());
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = log_priors[k] + utilities[k] / temperature;
    const double top = *std::max_element(w.begin(), w.end());
    if (!std::isfinite(top)) throw contract_violation("grid_posterior: non-finite log weight");
    double total = 0.0;
    for (double& x : w) {
        x = std::exp(x - top);
        total += x;
    }
    if (!(total > 0.0)) throw contract_violation("grid_posterior: all weights underflowed");
    for (double& x : w) x /= total;
    return w;
}

} // namespace mhpolicy
