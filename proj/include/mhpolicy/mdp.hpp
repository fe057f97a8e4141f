#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mhpolicy/random.hpp"

namespace mhpolicy {

/// Row-stochastic policy table, indexed [state][action].
using ActionMatrix = std::vector<std::vector<double>>;

/// Tabular MDP with transition and reward tensors both indexed [s][a][s'],
/// stored flat in row-major order.
class MdpSpec {
public:
    MdpSpec() = default;

    MdpSpec(std::size_t num_states, std::size_t num_actions, std::vector<double> transitions,
            std::vector<double> rewards, std::uint64_t seed = 0)
        : num_states_(num_states), num_actions_(num_actions), seed_(seed),
          transitions_(std::move(transitions)), rewards_(std::move(rewards)) {
        const auto expected = num_states_ * num_actions_ * num_states_;
        if (num_states_ == 0 || num_actions_ == 0)
            throw std::invalid_argument("MdpSpec: dimensions must be positive");
        if (transitions_.size() != expected || rewards_.size() != expected)
            throw std::invalid_argument("MdpSpec: tensor size does not match dimensions");
        for (std::size_t s = 0; s < num_states_; ++s) {
            for (std::size_t a = 0; a < num_actions_; ++a) {
                double total = 0.0;
                for (std::size_t next = 0; next < num_states_; ++next) {
                    const double p = transition(s, a, next);
                    if (!(p >= 0.0)) throw std::invalid_argument("MdpSpec: negative transition probability");
                    total += p;
                }
                if (std::abs(total - 1.0) > 1e-12)
                    throw std::invalid_argument("MdpSpec: transition row does not sum to 1");
            }
        }
    }

    std::size_t num_states() const noexcept { return num_states_; }
    std::size_t num_actions() const noexcept { return num_actions_; }
    std::uint64_t seed() const noexcept { return seed_; }

    double transition(std::size_t s, std::size_t a, std::size_t next) const {
        return transitions_[index(s, a, next)];
    }
    double reward(std::size_t s, std::size_t a, std::size_t next) const {
        return rewards_[index(s, a, next)];
    }

    const std::vector<double>& transitions() const noexcept { return transitions_; }
    const std::vector<double>& rewards() const noexcept { return rewards_; }

    /// Expected immediate reward Σ_{s'} P[s][a][s'] R[s][a][s'].
    double expected_reward(std::size_t s, std::size_t a) const {
        double q = 0.0;
        for (std::size_t next = 0; next < num_states_; ++next)
            q += transition(s, a, next) * reward(s, a, next);
        return q;
    }

    bool operator==(const MdpSpec&) const = default;

private:
    std::size_t index(std::size_t s, std::size_t a, std::size_t next) const {
        return (s * num_actions_ + a) * num_states_ + next;
    }

    std::size_t num_states_ = 0;
    std::size_t num_actions_ = 0;
    std::uint64_t seed_ = 0;
    std::vector<double> transitions_;
    std::vector<double> rewards_;
};

/// Transition rows are i.i.d. uniform(0,1] entries normalised per (s,a);
/// rewards are uniform on [-1, 1].
inline MdpSpec generate_random_mdp(std::size_t num_states, std::size_t num_actions, std::uint64_t seed) {
    if (num_states < 2 || num_actions < 2)
        throw std::invalid_argument("generate_random_mdp: need at least 2 states and 2 actions");

    auto rng = make_rng(seed);
    const auto n = num_states * num_actions * num_states;
    std::vector<double> transitions(n);
    std::vector<double> rewards(n);

    for (std::size_t row = 0; row < num_states * num_actions; ++row) {
        double total = 0.0;
        for (std::size_t next = 0; next < num_states; ++next) {
            const double u = 1.0 - uniform01(rng);
            transitions[row * num_states + next] = u;
            total += u;
        }
        for (std::size_t next = 0; next < num_states; ++next)
            transitions[row * num_states + next] /= total;
    }

    std::uniform_real_distribution<double> reward_dist(-1.0, 1.0);
    bool has_positive = false;
    bool has_negative = false;
    do {
        for (auto& r : rewards) {
            r = reward_dist(rng);
            has_positive = has_positive || r > 0.0;
            has_negative = has_negative || r < 0.0;
        }
    } while (!has_positive || !has_negative);

    return MdpSpec(num_states, num_actions, std::move(transitions), std::move(rewards), seed);
}

struct MdpStep {
    std::size_t next_state;
    double reward;
};

inline MdpStep mdp_step(const MdpSpec& mdp, std::size_t state, std::size_t action, Rng& rng) {
    if (state >= mdp.num_states() || action >= mdp.num_actions())
        throw std::invalid_argument("mdp_step: state or action out of range");

    const double u = uniform01(rng);
    double cumulative = 0.0;
    std::size_t next = mdp.num_states() - 1;
    for (std::size_t k = 0; k < mdp.num_states(); ++k) {
        cumulative += mdp.transition(state, action, k);
        if (u < cumulative) {
            next = k;
            break;
        }
    }
    return {next, mdp.reward(state, action, next)};
}

namespace detail {

inline void check_action_matrix(const MdpSpec& mdp, const ActionMatrix& probs) {
    if (probs.size() != mdp.num_states())
        throw std::invalid_argument("action matrix has wrong number of states");
    for (const auto& row : probs) {
        if (row.size() != mdp.num_actions())
            throw std::invalid_argument("action matrix has wrong number of actions");
        double total = 0.0;
        for (double p : row) {
            if (!(p >= 0.0)) throw std::invalid_argument("action probability is negative");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-9)
            throw std::invalid_argument("action probabilities do not sum to 1");
    }
}

} // namespace detail

/// Expected one-step reward of a stochastic policy with start states drawn
/// uniformly: (1/|S|) Σ_s Σ_a π[s][a] Σ_{s'} P[s][a][s'] R[s][a][s'].
inline double exact_expected_reward(const MdpSpec& mdp, const ActionMatrix& action_probs) {
    detail::check_action_matrix(mdp, action_probs);
    double total = 0.0;
    for (std::size_t s = 0; s < mdp.num_states(); ++s) {
        double state_value = 0.0;
        for (std::size_t a = 0; a < mdp.num_actions(); ++a)
            state_value += action_probs[s][a] * mdp.expected_reward(s, a);
        total += state_value;
    }
    return total / static_cast<double>(mdp.num_states());
}

inline ActionMatrix one_hot_policy(const MdpSpec& mdp, const std::vector<std::size_t>& actions) {
    ActionMatrix probs(mdp.num_states(), std::vector<double>(mdp.num_actions(), 0.0));
    for (std::size_t s = 0; s < mdp.num_states(); ++s) probs[s].at(actions.at(s)) = 1.0;
    return probs;
}

struct DeterministicPolicy {
    std::vector<std::size_t> actions;
    double value = 0.0;
};

/// Best deterministic policy for the uniform-start one-step objective. The
/// objective separates per state, so a per-state argmax is globally optimal.
/// Ties go to the lowest action index.
inline DeterministicPolicy optimal_deterministic_policy(const MdpSpec& mdp) {
    DeterministicPolicy best;
    best.actions.resize(mdp.num_states());
    for (std::size_t s = 0; s < mdp.num_states(); ++s) {
        std::size_t arg = 0;
        double top = mdp.expected_reward(s, 0);
        for (std::size_t a = 1; a < mdp.num_actions(); ++a) {
            const double q = mdp.expected_reward(s, a);
            if (q > top) {
                top = q;
                arg = a;
            }
        }
        best.actions[s] = arg;
    }
    best.value = exact_expected_reward(mdp, one_hot_policy(mdp, best.actions));
    return best;
}

// JSON: {"num_states", "num_actions", "seed", "transitions", "rewards"} with
// the tensors as nested [s][a][s'] arrays.

inline void to_json(nlohmann::json& j, const MdpSpec& mdp) {
    auto nest = [&](const std::vector<double>& flat) {
        nlohmann::json outer = nlohmann::json::array();
        std::size_t i = 0;
        for (std::size_t s = 0; s < mdp.num_states(); ++s) {
            nlohmann::json by_action = nlohmann::json::array();
            for (std::size_t a = 0; a < mdp.num_actions(); ++a) {
                nlohmann::json row = nlohmann::json::array();
                for (std::size_t next = 0; next < mdp.num_states(); ++next) row.push_back(flat[i++]);
                by_action.push_back(std::move(row));
            }
            outer.push_back(std::move(by_action));
        }
        return outer;
    };
    j = nlohmann::json{{"num_states", mdp.num_states()},
                       {"num_actions", mdp.num_actions()},
                       {"seed", mdp.seed()},
                       {"transitions", nest(mdp.transitions())},
                       {"rewards", nest(mdp.rewards())}};
}

inline void from_json(const nlohmann::json& j, MdpSpec& mdp) {
    const auto num_states = j.at("num_states").get<std::size_t>();
    const auto num_actions = j.at("num_actions").get<std::size_t>();
    auto flatten = [&](const nlohmann::json& nested) {
        std::vector<double> flat;
        flat.reserve(num_states * num_actions * num_states);
        if (nested.size() != num_states) throw std::invalid_argument("MdpSpec json: bad state count");
        for (const auto& by_action : nested) {
            if (by_action.size() != num_actions) throw std::invalid_argument("MdpSpec json: bad action count");
            for (const auto& row : by_action) {
                if (row.size() != num_states) throw std::invalid_argument("MdpSpec json: bad row length");
                for (const auto& v : row) flat.push_back(v.get<double>());
            }
        }
        return flat;
    };
    mdp = MdpSpec(num_states, num_actions, flatten(j.at("transitions")), flatten(j.at("rewards")),
                  j.value("seed", std::uint64_t{0}));
}

} // namespace mhpolicy
