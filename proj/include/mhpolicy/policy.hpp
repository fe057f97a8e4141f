#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mhpolicy/cartpole.hpp"
#include "mhpolicy/errors.hpp"
#include "mhpolicy/param_vector.hpp"
#include "mhpolicy/random.hpp"

namespace mhpolicy {

inline constexpr std::size_t kMaxActions = 64;

/// Numerically stable in-place softmax.
inline void softmax(std::span<double> logits) {
    const double top = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (double& z : logits) {
        z = std::exp(z - top);
        total += z;
    }
    for (double& z : logits) z /= total;
}

/// Softmax over a per-state row of logits: θ ∈ R^{|S|×|A|}, row-major.
class TabularPolicy {
public:
    using State = std::size_t;

    TabularPolicy(std::size_t num_states, std::size_t num_actions)
        : num_states_(num_states), num_actions_(num_actions) {
        if (num_states == 0 || num_actions < 2 || num_actions > kMaxActions)
            throw std::invalid_argument("TabularPolicy: unsupported dimensions");
    }

    std::size_t num_states() const noexcept { return num_states_; }
    std::size_t num_actions() const noexcept { return num_actions_; }
    std::size_t param_count() const noexcept { return num_states_ * num_actions_; }
    std::string layout() const {
        return "tabular:" + std::to_string(num_states_) + "x" + std::to_string(num_actions_);
    }

    void logits(std::span<const double> theta, State s, std::span<double> out) const {
        if (s >= num_states_) throw std::invalid_argument("TabularPolicy: state out of range");
        std::copy_n(theta.begin() + static_cast<std::ptrdiff_t>(s * num_actions_), num_actions_, out.begin());
    }

    /// grad += weight * ∇θ log π(action | s). Only row s is touched, with the
    /// indicator-minus-probability structure of the softmax.
    void accumulate_grad_log_prob(std::span<const double> theta, State s, int action, double weight,
                                  std::span<double> grad) const {
        std::array<double, kMaxActions> probs{};
        auto row = std::span(probs).first(num_actions_);
        logits(theta, s, row);
        softmax(row);
        const auto offset = s * num_actions_;
        for (std::size_t a = 0; a < num_actions_; ++a)
            grad[offset + a] += weight * ((static_cast<int>(a) == action ? 1.0 : 0.0) - row[a]);
    }

private:
    std::size_t num_states_;
    std::size_t num_actions_;
};

/// One hidden tanh layer over the 4-dimensional cart-pole observation,
/// softmax over two actions. Flat layout: W1 (H×4, row-major), b1 (H),
/// W2 (2×H, row-major), b2 (2).
class MlpPolicy {
public:
    using State = CartPoleState;
    static constexpr std::size_t kInputs = 4;
    static constexpr std::size_t kOutputs = 2;
    static constexpr std::size_t kMaxHidden = 512;

    explicit MlpPolicy(std::size_t hidden = 32) : hidden_(hidden) {
        if (hidden == 0 || hidden > kMaxHidden) throw std::invalid_argument("MlpPolicy: unsupported hidden size");
    }

    std::size_t hidden() const noexcept { return hidden_; }
    std::size_t num_actions() const noexcept { return kOutputs; }
    std::size_t param_count() const noexcept {
        return hidden_ * kInputs + hidden_ + kOutputs * hidden_ + kOutputs;
    }
    std::string layout() const { return "mlp:4-" + std::to_string(hidden_) + "-2"; }

    std::size_t w1_offset() const noexcept { return 0; }
    std::size_t b1_offset() const noexcept { return hidden_ * kInputs; }
    std::size_t w2_offset() const noexcept { return b1_offset() + hidden_; }
    std::size_t b2_offset() const noexcept { return w2_offset() + kOutputs * hidden_; }

    void logits(std::span<const double> theta, const State& s, std::span<double> out) const {
        std::array<double, kMaxHidden> h{};
        forward(theta, s.observation(), std::span(h).first(hidden_), out);
    }

    void accumulate_grad_log_prob(std::span<const double> theta, const State& s, int action, double weight,
                                  std::span<double> grad) const {
        const auto x = s.observation();
        std::array<double, kMaxHidden> h_storage{};
        auto h = std::span(h_storage).first(hidden_);
        std::array<double, kOutputs> z{};
        forward(theta, x, h, z);
        softmax(z);

        std::array<double, kOutputs> dz{};
        for (std::size_t k = 0; k < kOutputs; ++k)
            dz[k] = weight * ((static_cast<int>(k) == action ? 1.0 : 0.0) - z[k]);

        for (std::size_t k = 0; k < kOutputs; ++k) {
            grad[b2_offset() + k] += dz[k];
            for (std::size_t j = 0; j < hidden_; ++j) grad[w2_offset() + k * hidden_ + j] += dz[k] * h[j];
        }
        for (std::size_t j = 0; j < hidden_; ++j) {
            double dh = 0.0;
            for (std::size_t k = 0; k < kOutputs; ++k) dh += theta[w2_offset() + k * hidden_ + j] * dz[k];
            const double dpre = dh * (1.0 - h[j] * h[j]);
            grad[b1_offset() + j] += dpre;
            for (std::size_t i = 0; i < kInputs; ++i) grad[w1_offset() + j * kInputs + i] += dpre * x[i];
        }
    }

private:
    void forward(std::span<const double> theta, const std::array<double, kInputs>& x, std::span<double> h,
                 std::span<double> out) const {
        for (std::size_t j = 0; j < hidden_; ++j) {
            double pre = theta[b1_offset() + j];
            for (std::size_t i = 0; i < kInputs; ++i) pre += theta[w1_offset() + j * kInputs + i] * x[i];
            h[j] = std::tanh(pre);
        }
        for (std::size_t k = 0; k < kOutputs; ++k) {
            double z = theta[b2_offset() + k];
            for (std::size_t j = 0; j < hidden_; ++j) z += theta[w2_offset() + k * hidden_ + j] * h[j];
            out[k] = z;
        }
    }

    std::size_t hidden_;
};

template <class P>
concept PolicyModel = requires(const P& p, std::span<const double> theta, const typename P::State& s,
                               std::span<double> out, int action, double weight) {
    { p.param_count() } -> std::convertible_to<std::size_t>;
    { p.num_actions() } -> std::convertible_to<std::size_t>;
    { p.layout() } -> std::convertible_to<std::string>;
    p.logits(theta, s, out);
    p.accumulate_grad_log_prob(theta, s, action, weight, out);
};

template <PolicyModel P>
void require_layout(const P& policy, const ParamVector& theta) {
    if (theta.size() != policy.param_count() || theta.layout != policy.layout())
        throw contract_violation("parameter layout '" + theta.layout + "' does not match policy '" +
                                 policy.layout() + "'");
}

/// π(·|s, θ) into a caller buffer of length num_actions().
template <PolicyModel P>
void action_distribution_into(const P& policy, const ParamVector& theta, const typename P::State& s,
                              std::span<double> out) {
    policy.logits(theta.view(), s, out);
    softmax(out);
}

template <PolicyModel P>
std::vector<double> action_distribution(const P& policy, const ParamVector& theta, const typename P::State& s) {
    require_layout(policy, theta);
    std::vector<double> probs(policy.num_actions());
    action_distribution_into(policy, theta, s, probs);
    return probs;
}

struct SampledAction {
    int action;
    double log_prob;
};

/// Assumes the layout was already checked by the caller's loop.
template <PolicyModel P>
SampledAction sample_action_unchecked(const P& policy, const ParamVector& theta, const typename P::State& s,
                                      Rng& rng) {
    std::array<double, kMaxActions> buffer{};
    auto probs = std::span(buffer).first(policy.num_actions());
    action_distribution_into(policy, theta, s, probs);
    const double u = uniform01(rng);
    double cumulative = 0.0;
    std::size_t chosen = probs.size() - 1;
    for (std::size_t a = 0; a < probs.size(); ++a) {
        cumulative += probs[a];
        if (u < cumulative) {
            chosen = a;
            break;
        }
    }
    // Guard the tail: never return an action whose probability underflowed.
    while (probs[chosen] == 0.0 && chosen > 0) --chosen;
    return {static_cast<int>(chosen), std::log(probs[chosen])};
}

template <PolicyModel P>
SampledAction sample_action(const P& policy, const ParamVector& theta, const typename P::State& s, Rng& rng) {
    require_layout(policy, theta);
    return sample_action_unchecked(policy, theta, s, rng);
}

/// Isotropic Gaussian N(·, σ²I), used both as prior and as random-walk proposal.
struct ProposalConfig {
    double sigma = 0.1;

    void validate(const char* field = "sigma") const {
        if (!(sigma > 0.0) || !std::isfinite(sigma)) throw validation_error(field, "must be positive and finite");
    }
};

/// θ₀ ~ N(0, σ²I).
template <PolicyModel P>
ParamVector init_params(const P& policy, const ProposalConfig& prior, Rng& rng) {
    prior.validate();
    std::vector<double> values(policy.param_count());
    for (double& v : values) v = prior.sigma * standard_normal(rng);
    return {policy.layout(), std::move(values)};
}

/// θ' ~ N(θ, σ²I).
inline ParamVector propose(const ParamVector& theta, const ProposalConfig& proposal, Rng& rng) {
    proposal.validate();
    ParamVector out = theta;
    for (double& v : out.values) v += proposal.sigma * standard_normal(rng);
    return out;
}

inline double log_prior_density(const ParamVector& theta, const ProposalConfig& prior) {
    prior.validate();
    if (!theta.all_finite()) throw contract_violation("log_prior_density: non-finite parameter");
    const double log_norm = std::log(prior.sigma) + 0.5 * std::log(2.0 * std::numbers::pi);
    const double inv_two_var = 1.0 / (2.0 * prior.sigma * prior.sigma);
    double total = 0.0;
    for (double v : theta.values) total -= v * v * inv_two_var + log_norm;
    return total;
}

/// log q(to | from) for the Gaussian random-walk proposal.
inline double proposal_log_density(const ParamVector& from, const ParamVector& to, const ProposalConfig& proposal) {
    return log_prior_density(to - from, proposal);
}

/// Mean of π(·|s, θ_i) over the samples after the first `burn_in`.
template <PolicyModel P>
std::vector<double> posterior_average_policy(const P& policy, std::span<const ParamVector> samples,
                                             std::size_t burn_in, const typename P::State& s) {
    if (burn_in >= samples.size())
        throw std::invalid_argument("posterior_average_policy: no samples left after burn-in");
    std::vector<double> mean(policy.num_actions(), 0.0);
    std::vector<double> probs(policy.num_actions());
    for (std::size_t i = burn_in; i < samples.size(); ++i) {
        require_layout(policy, samples[i]);
        action_distribution_into(policy, samples[i], s, probs);
        for (std::size_t a = 0; a < probs.size(); ++a) mean[a] += probs[a];
    }
    const double m = static_cast<double>(samples.size() - burn_in);
    for (double& p : mean) p /= m;
    return mean;
}

/// Full action table of a tabular policy, one row per state.
inline std::vector<std::vector<double>> policy_table(const TabularPolicy& policy, const ParamVector& theta) {
    require_layout(policy, theta);
    std::vector<std::vector<double>> table(policy.num_states(), std::vector<double>(policy.num_actions()));
    for (std::size_t s = 0; s < policy.num_states(); ++s) action_distribution_into(policy, theta, s, table[s]);
    return table;
}

} // namespace mhpolicy
