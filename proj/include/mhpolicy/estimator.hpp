#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "mhpolicy/cartpole.hpp"
#include "mhpolicy/errors.hpp"
#include "mhpolicy/mdp.hpp"
#include "mhpolicy/param_vector.hpp"
#include "mhpolicy/policy.hpp"
#include "mhpolicy/random.hpp"
#include "mhpolicy/replay_buffer.hpp"
#include "mhpolicy/transition.hpp"

namespace mhpolicy {

enum class EstimatorMode { per_step_mean, episodic_return };

struct EstimatorConfig {
    std::size_t batch_size = 512;
    std::size_t buffer_size = 10000;
    EstimatorMode mode = EstimatorMode::per_step_mean;

    void validate() const {
        if (batch_size == 0) throw validation_error("batch_size", "must be positive");
        if (mode == EstimatorMode::episodic_return && buffer_size < batch_size)
            throw validation_error("buffer_size", "must be at least batch_size");
    }
};

using MdpTransition = TransitionSample<std::size_t>;
using CartPoleTransition = TransitionSample<CartPoleState>;

/// `count` independent one-step transitions: s uniform, a ~ π(·|s, θ),
/// s' ~ P(·|s, a). Appends to `out`.
inline void collect_mdp_transitions(const MdpSpec& mdp, const TabularPolicy& policy, const ParamVector& theta,
                                    std::size_t count, Rng& rng, std::vector<MdpTransition>& out) {
    require_layout(policy, theta);
    if (policy.num_states() != mdp.num_states() || policy.num_actions() != mdp.num_actions())
        throw contract_violation("policy dimensions do not match the MDP");
    std::uniform_int_distribution<std::size_t> start(0, mdp.num_states() - 1);
    out.reserve(out.size() + count);
    for (std::size_t i = 0; i < count; ++i) {
        MdpTransition t;
        t.state = start(rng);
        const auto [action, log_prob] = sample_action_unchecked(policy, theta, t.state, rng);
        const auto [next, reward] = mdp_step(mdp, t.state, static_cast<std::size_t>(action), rng);
        t.action = action;
        t.next_state = next;
        t.reward = reward;
        t.terminal = true;
        t.behavior_log_prob = log_prob;
        t.return_to_go = reward;
        out.push_back(t);
    }
}

struct EpisodeBatch {
    std::vector<CartPoleTransition> transitions;
    std::vector<double> episode_returns;

    void clear() {
        transitions.clear();
        episode_returns.clear();
    }
};

/// Runs whole episodes under π(·|·, θ) until at least `min_transitions`
/// transitions are collected. Each transition carries its return-to-go.
inline void collect_cartpole_episodes(const CartPoleEnv& env, const MlpPolicy& policy, const ParamVector& theta,
                                      std::size_t min_transitions, Rng& rng, EpisodeBatch& out) {
    require_layout(policy, theta);
    while (out.transitions.size() < min_transitions) {
        const auto episode_start = out.transitions.size();
        CartPoleState s = env.reset(rng);
        bool done = false;
        while (!done) {
            const auto [action, log_prob] = sample_action_unchecked(policy, theta, s, rng);
            const auto step = env.step(s, action);
            out.transitions.push_back({s, action, step.next, step.reward, step.terminal, log_prob, 0.0});
            s = step.next;
            done = step.terminal;
        }
        double to_go = 0.0;
        for (auto i = out.transitions.size(); i-- > episode_start;) {
            to_go += out.transitions[i].reward;
            out.transitions[i].return_to_go = to_go;
        }
        out.episode_returns.push_back(to_go);
    }
}

/// On-policy r̂_θ for the tabular MDP: mean of batch_size single-step rewards.
class MdpRewardEstimator {
public:
    MdpRewardEstimator(MdpSpec mdp, TabularPolicy policy, EstimatorConfig config)
        : mdp_(std::move(mdp)), policy_(policy), config_(config) {
        config_.validate();
        if (config_.mode != EstimatorMode::per_step_mean)
            throw std::invalid_argument("MdpRewardEstimator: tabular MDP uses per_step_mean mode");
    }

    double operator()(const ParamVector& theta, Rng& rng) {
        batch_.clear();
        collect_mdp_transitions(mdp_, policy_, theta, config_.batch_size, rng, batch_);
        if (batch_.empty()) throw estimation_failure("no transitions collected");
        double total = 0.0;
        for (const auto& t : batch_) total += t.reward;
        return total / static_cast<double>(batch_.size());
    }

    const std::vector<MdpTransition>& last_batch() const noexcept { return batch_; }
    const MdpSpec& mdp() const noexcept { return mdp_; }
    const TabularPolicy& policy() const noexcept { return policy_; }
    const EstimatorConfig& config() const noexcept { return config_; }

private:
    MdpSpec mdp_;
    TabularPolicy policy_;
    EstimatorConfig config_;
    std::vector<MdpTransition> batch_;
};

/// On-policy r̂_θ for cart-pole: mean undiscounted return over the episodes
/// rolled out to gather at least batch_size transitions. The buffer is
/// refilled from these fresh rollouts on every call.
class CartPoleReturnEstimator {
public:
    CartPoleReturnEstimator(CartPoleEnv env, MlpPolicy policy, EstimatorConfig config)
        : env_(env), policy_(policy), config_(config), buffer_(std::max<std::size_t>(config.buffer_size, 1)) {
        config_.validate();
        if (config_.mode != EstimatorMode::episodic_return)
            throw std::invalid_argument("CartPoleReturnEstimator: cart-pole uses episodic_return mode");
    }

    double operator()(const ParamVector& theta, Rng& rng) {
        episodes_.clear();
        buffer_.clear();
        collect_cartpole_episodes(env_, policy_, theta, config_.batch_size, rng, episodes_);
        for (const auto& t : episodes_.transitions) buffer_.push(t);
        if (episodes_.episode_returns.empty()) throw estimation_failure("no completed episodes");
        double total = 0.0;
        for (double r : episodes_.episode_returns) total += r;
        return total / static_cast<double>(episodes_.episode_returns.size());
    }

    const EpisodeBatch& last_episodes() const noexcept { return episodes_; }
    const ReplayBuffer<CartPoleTransition>& buffer() const noexcept { return buffer_; }
    const CartPoleEnv& env() const noexcept { return env_; }
    const MlpPolicy& policy() const noexcept { return policy_; }
    const EstimatorConfig& config() const noexcept { return config_; }

private:
    CartPoleEnv env_;
    MlpPolicy policy_;
    EstimatorConfig config_;
    ReplayBuffer<CartPoleTransition> buffer_;
    EpisodeBatch episodes_;
};

inline double estimate_on_policy(const MdpSpec& mdp, const TabularPolicy& policy, const ParamVector& theta,
                                 const EstimatorConfig& config, Rng& rng) {
    return MdpRewardEstimator(mdp, policy, config)(theta, rng);
}

inline double estimate_on_policy(const CartPoleEnv& env, const MlpPolicy& policy, const ParamVector& theta,
                                 const EstimatorConfig& config, Rng& rng) {
    return CartPoleReturnEstimator(env, policy, config)(theta, rng);
}

/// Importance-sampled r̂_θ from transitions gathered under a behaviour
/// policy: mean of [π(a|s,θ) / b(a|s)] · reward.
template <PolicyModel P>
double estimate_off_policy(std::span<const TransitionSample<typename P::State>> behavior_samples, const P& policy,
                           const ParamVector& theta, const EstimatorConfig& config) {
    require_layout(policy, theta);
    if (config.mode != EstimatorMode::per_step_mean)
        throw std::invalid_argument("estimate_off_policy: only per_step_mean mode is supported");
    if (behavior_samples.empty()) throw estimation_failure("estimate_off_policy: no samples");
    std::array<double, kMaxActions> buffer{};
    auto probs = std::span(buffer).first(policy.num_actions());
    double total = 0.0;
    for (const auto& t : behavior_samples) {
        if (!std::isfinite(t.behavior_log_prob))
            throw contract_violation("estimate_off_policy: behaviour probability is zero or undefined");
        action_distribution_into(policy, theta, t.state, probs);
        const double target_log_prob = std::log(probs[static_cast<std::size_t>(t.action)]);
        total += std::exp(target_log_prob - t.behavior_log_prob) * t.reward;
    }
    return total / static_cast<double>(behavior_samples.size());
}

} // namespace mhpolicy
