#pragma once

// Reference computations used only by the tests. Each one takes a different
// route from the library code it checks: explicit enumeration instead of
// per-state argmax, textbook dynamics instead of the library's temp/acc
// split, finite differences instead of backprop, quadrature instead of the
// closed form.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "mhpolicy/mdp.hpp"
#include "mhpolicy/param_vector.hpp"
#include "mhpolicy/policy.hpp"
#include "mhpolicy/random.hpp"
#include "mhpolicy/reinforce.hpp"
#include "mhpolicy/transition.hpp"

namespace oracle {

/// (1/|S|) Σ_{s,a,s'} π[s][a] P[s][a][s'] R[s][a][s'] as one flat triple sum
/// over the raw tensors.
inline double triple_sum_reward(const mhpolicy::MdpSpec& mdp, const std::vector<std::vector<double>>& pi) {
    const auto S = mdp.num_states();
    const auto A = mdp.num_actions();
    double total = 0.0;
    for (std::size_t idx = 0; idx < S * A * S; ++idx) {
        const std::size_t s = idx / (A * S);
        const std::size_t a = (idx / S) % A;
        total += pi[s][a] * mdp.transitions()[idx] * mdp.rewards()[idx];
    }
    return total / static_cast<double>(S);
}

struct Enumerated {
    std::vector<std::size_t> actions;
    double value = -std::numeric_limits<double>::infinity();
};

/// Evaluates all |A|^|S| deterministic policies; keeps the first best in
/// lexicographic order (which matches lowest-index tie breaking per state).
inline Enumerated enumerate_deterministic(const mhpolicy::MdpSpec& mdp) {
    const auto S = mdp.num_states();
    const auto A = mdp.num_actions();
    std::vector<std::size_t> choice(S, 0);
    Enumerated best;
    while (true) {
        std::vector<std::vector<double>> pi(S, std::vector<double>(A, 0.0));
        for (std::size_t s = 0; s < S; ++s) pi[s][choice[s]] = 1.0;
        const double v = triple_sum_reward(mdp, pi);
        if (v > best.value + 1e-15) {
            best.value = v;
            best.actions = choice;
        }
        std::size_t pos = S;
        while (pos > 0) {
            --pos;
            if (++choice[pos] < A) break;
            choice[pos] = 0;
            if (pos == 0) return best;
        }
    }
}

/// Cart-pole equations of motion in the textbook form
///   θ̈ = [g sinθ + cosθ (−F − m_p l θ̇² sinθ)/(m_c + m_p)] / [l (4/3 − m_p cos²θ/(m_c + m_p))]
///   ẍ = [F + m_p l (θ̇² sinθ − θ̈ cosθ)] / (m_c + m_p)
/// followed by one explicit Euler step.
struct PoleState {
    double x, x_dot, theta, theta_dot;
};

inline PoleState euler_step(const PoleState& s, double force) {
    const double g = 9.8, mc = 1.0, mp = 0.1, l = 0.5, tau = 0.02;
    const double st = std::sin(s.theta), ct = std::cos(s.theta);
    const double theta_acc = (g * st + ct * (-force - mp * l * s.theta_dot * s.theta_dot * st) / (mc + mp)) /
                             (l * (4.0 / 3.0 - mp * ct * ct / (mc + mp)));
    const double x_acc = (force + mp * l * (s.theta_dot * s.theta_dot * st - theta_acc * ct)) / (mc + mp);
    return {s.x + tau * s.x_dot, s.x_dot + tau * x_acc, s.theta + tau * s.theta_dot, s.theta_dot + tau * theta_acc};
}

/// Steps survived (reward-earning steps) pushing right from `s` until the
/// pole or cart leaves the safe region, capped at 200 steps.
inline int steps_survived_pushing_right(PoleState s) {
    const double angle_limit = 12.0 * M_PI / 180.0;
    for (int step = 1; step <= 200; ++step) {
        s = euler_step(s, 10.0);
        if (std::abs(s.x) > 2.4 || std::abs(s.theta) > angle_limit) return step - 1;
    }
    return 200;
}

/// Central differences of f at theta, step h.
inline std::vector<double> central_difference(const std::function<double(const mhpolicy::ParamVector&)>& f,
                                              const mhpolicy::ParamVector& theta, double h) {
    std::vector<double> grad(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        auto plus = theta;
        auto minus = theta;
        plus[i] += h;
        minus[i] -= h;
        grad[i] = (f(plus) - f(minus)) / (2.0 * h);
    }
    return grad;
}

/// Largest coordinate error of `analytic` against `reference`, relative to the
/// reference gradient's scale: max_i |a_i − r_i| / max(|r_i|, ‖r‖∞).
inline double max_relative_error(const std::vector<double>& analytic, const std::vector<double>& reference) {
    double scale = 0.0;
    for (double r : reference) scale = std::max(scale, std::abs(r));
    double worst = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const double denom = std::max(std::abs(reference[i]), scale);
        if (denom == 0.0) {
            worst = std::max(worst, std::abs(analytic[i]));
            continue;
        }
        worst = std::max(worst, std::abs(analytic[i] - reference[i]) / denom);
    }
    return worst;
}

/// (1/|B|) Σ G · log π(a|s, θ), the surrogate whose gradient REINFORCE uses.
template <class P>
double batch_objective(const P& policy, const mhpolicy::ParamVector& theta,
                       std::span<const mhpolicy::TransitionSample<typename P::State>> batch) {
    double total = 0.0;
    for (const auto& t : batch)
        total += t.return_to_go *
                 std::log(mhpolicy::action_distribution(policy, theta, t.state)[static_cast<std::size_t>(t.action)]);
    return total / static_cast<double>(batch.size());
}

/// A random (policy, θ, batch) triple for gradient checking.
template <class P>
struct GradientCase {
    P policy;
    mhpolicy::ParamVector theta;
    std::vector<mhpolicy::TransitionSample<typename P::State>> batch;
};

inline GradientCase<mhpolicy::TabularPolicy> random_tabular_case(mhpolicy::Rng& rng) {
    std::uniform_int_distribution<std::size_t> states(1, 6), actions(2, 5), size(1, 24);
    std::uniform_real_distribution<double> ret(-2.0, 2.0);
    mhpolicy::TabularPolicy policy(states(rng), actions(rng));
    auto theta = mhpolicy::init_params(policy, {1.5}, rng);
    std::vector<mhpolicy::TransitionSample<std::size_t>> batch(size(rng));
    std::uniform_int_distribution<std::size_t> pick_state(0, policy.num_states() - 1);
    std::uniform_int_distribution<int> pick_action(0, static_cast<int>(policy.num_actions()) - 1);
    for (auto& t : batch) {
        t.state = pick_state(rng);
        t.action = pick_action(rng);
        t.return_to_go = ret(rng);
    }
    return {policy, std::move(theta), std::move(batch)};
}

inline GradientCase<mhpolicy::MlpPolicy> random_mlp_case(mhpolicy::Rng& rng, std::size_t hidden = 32) {
    std::uniform_int_distribution<std::size_t> size(1, 24);
    std::uniform_int_distribution<int> pick_action(0, 1);
    std::uniform_real_distribution<double> ret(0.0, 200.0), u(-1.0, 1.0);
    mhpolicy::MlpPolicy policy(hidden);
    auto theta = mhpolicy::init_params(policy, {0.5}, rng);
    std::vector<mhpolicy::TransitionSample<mhpolicy::CartPoleState>> batch(size(rng));
    for (auto& t : batch) {
        t.state = {2.4 * u(rng), 2.0 * u(rng), 0.2 * u(rng), 2.0 * u(rng), 0};
        t.action = pick_action(rng);
        t.return_to_go = ret(rng);
    }
    return {policy, std::move(theta), std::move(batch)};
}

/// Worst relative error of policy_gradient against central differences (h = 1e-5).
template <class P>
double gradient_case_error(const GradientCase<P>& c) {
    using Sample = mhpolicy::TransitionSample<typename P::State>;
    const std::span<const Sample> batch(c.batch);
    const auto analytic = mhpolicy::policy_gradient(c.policy, c.theta, batch);
    const auto fd = central_difference(
        [&](const mhpolicy::ParamVector& th) { return batch_objective(c.policy, th, batch); }, c.theta, 1e-5);
    return max_relative_error(analytic.values, fd);
}

/// Composite Simpson rule on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double total = f(a) + f(b);
    for (int i = 1; i < n; ++i) total += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return total * h / 3.0;
}

/// Total-variation distance between empirical counts and a distribution.
inline double total_variation(const std::vector<std::size_t>& counts, const std::vector<double>& p) {
    double n = 0.0;
    for (auto c : counts) n += static_cast<double>(c);
    double tv = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) tv += std::abs(static_cast<double>(counts[k]) / n - p[k]);
    return 0.5 * tv;
}

} // namespace oracle
