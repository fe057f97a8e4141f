#pragma once

#include <chrono>
#include <cstddef>
#include <span>
#include <vector>

#include "mhpolicy/cartpole.hpp"
#include "mhpolicy/errors.hpp"
#include "mhpolicy/estimator.hpp"
#include "mhpolicy/mdp.hpp"
#include "mhpolicy/mh_sampler.hpp"
#include "mhpolicy/param_vector.hpp"
#include "mhpolicy/policy.hpp"
#include "mhpolicy/random.hpp"

namespace mhpolicy {

struct PgConfig {
    double learning_rate = 0.1;
    std::size_t batch_size = 512;
    std::size_t buffer_size = 10000;
    std::size_t iterations = 10000;
    /// θ₀ ~ N(0, σ²I), same initial distribution as the MH chain.
    ProposalConfig init{1.0};
    bool record_timing = false;

    void validate() const {
        if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
            throw validation_error("learning_rate", "must be non-negative and finite");
        if (batch_size == 0) throw validation_error("batch_size", "must be positive");
        if (buffer_size == 0) throw validation_error("buffer_size", "must be positive");
        if (iterations == 0) throw validation_error("n_iterations", "must be positive");
        init.validate("prior_sigma");
    }
};

/// (1/|batch|) Σ G · ∇θ log π(a|s, θ), with G the sample's return_to_go.
/// Plain REINFORCE, no baseline.
template <PolicyModel P>
ParamVector policy_gradient(const P& policy, const ParamVector& theta,
                            std::span<const TransitionSample<typename P::State>> batch) {
    require_layout(policy, theta);
    if (batch.empty()) throw std::invalid_argument("policy_gradient: empty batch");
    ParamVector grad(theta.layout, std::vector<double>(theta.size(), 0.0));
    const double scale = 1.0 / static_cast<double>(batch.size());
    for (const auto& t : batch)
        policy.accumulate_grad_log_prob(theta.view(), t.state, t.action, t.return_to_go * scale, grad.values);
    return grad;
}

struct PgResult {
    ChainTrace trace;
    ParamVector final_theta;
    double elapsed_s = 0.0;
};

namespace detail {

inline void ascend(ParamVector& theta, const ParamVector& grad, double learning_rate) {
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] += learning_rate * grad[i];
}

template <class Clock>
double seconds_between(typename Clock::time_point a, typename Clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

} // namespace detail

/// REINFORCE on the tabular MDP. Each iteration draws batch_size one-step
/// transitions under the current policy; the recorded reward is their mean.
inline PgResult reinforce_run(const PgConfig& config, const MdpSpec& mdp, const TabularPolicy& policy, Rng& rng) {
    config.validate();
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();

    EstimatorConfig est_config{config.batch_size, config.buffer_size, EstimatorMode::per_step_mean};
    MdpRewardEstimator estimator(mdp, policy, est_config);

    PgResult result;
    result.final_theta = init_params(policy, config.init, rng);
    result.trace.records.reserve(config.iterations);
    for (std::size_t i = 1; i <= config.iterations; ++i) {
        const double reward = estimator(result.final_theta, rng);
        const auto& batch = estimator.last_batch();
        const auto grad = policy_gradient(policy, result.final_theta, std::span<const MdpTransition>(batch));
        detail::ascend(result.final_theta, grad, config.learning_rate);
        const double elapsed = config.record_timing ? detail::seconds_between<clock>(start, clock::now()) : 0.0;
        result.trace.records.push_back({i, reward, true, true, 0.0, elapsed});
    }
    result.elapsed_s = detail::seconds_between<clock>(start, clock::now());
    return result;
}

/// REINFORCE on cart-pole. Fresh episodes fill the buffer each iteration and
/// batch_size transitions are drawn from it without replacement; the
/// recorded reward is the mean episodic return of those episodes.
inline PgResult reinforce_run(const PgConfig& config, const CartPoleEnv& env, const MlpPolicy& policy, Rng& rng) {
    config.validate();
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();

    EstimatorConfig est_config{config.batch_size, config.buffer_size, EstimatorMode::episodic_return};
    CartPoleReturnEstimator estimator(env, policy, est_config);

    PgResult result;
    result.final_theta = init_params(policy, config.init, rng);
    result.trace.records.reserve(config.iterations);
    for (std::size_t i = 1; i <= config.iterations; ++i) {
        const double reward = estimator(result.final_theta, rng);
        const auto& buffer = estimator.buffer();
        const auto batch = buffer.sample(std::min(config.batch_size, buffer.size()), rng);
        const auto grad = policy_gradient(policy, result.final_theta, std::span<const CartPoleTransition>(batch));
        detail::ascend(result.final_theta, grad, config.learning_rate);
        const double elapsed = config.record_timing ? detail::seconds_between<clock>(start, clock::now()) : 0.0;
        result.trace.records.push_back({i, reward, true, true, 0.0, elapsed});
    }
    result.elapsed_s = detail::seconds_between<clock>(start, clock::now());
    return result;
}

} // namespace mhpolicy
