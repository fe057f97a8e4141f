#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "mhpolicy/errors.hpp"
#include "mhpolicy/random.hpp"

namespace mhpolicy {

struct CartPoleState {
    double cart_position = 0.0;     // m
    double cart_velocity = 0.0;     // m/s
    double pole_angle = 0.0;        // rad, 0 is upright
    double pole_tip_velocity = 0.0; // rad/s
    std::uint32_t elapsed_steps = 0;

    std::array<double, 4> observation() const {
        return {cart_position, cart_velocity, pole_angle, pole_tip_velocity};
    }

    bool operator==(const CartPoleState&) const = default;
};

/// Left/right reflection. Maps action a to 1 - a under the same symmetry.
inline CartPoleState mirror(const CartPoleState& s) {
    return {-s.cart_position, -s.cart_velocity, -s.pole_angle, -s.pole_tip_velocity, s.elapsed_steps};
}

struct CartPoleStep {
    CartPoleState next;
    double reward;
    bool terminal;
};

/// Classic cart-pole: explicit Euler with the CartPole-v0 constants.
/// The observation box for the pole angle is ±41.8°, but an episode fails
/// once the pole leaves ±12°.
struct CartPoleEnv {
    double gravity = 9.8;
    double cart_mass = 1.0;
    double pole_mass = 0.1;
    double half_pole_length = 0.5;
    double force_magnitude = 10.0;
    double tau = 0.02;
    double position_threshold = 2.4;
    double angle_threshold = 12.0 * std::numbers::pi / 180.0;
    std::uint32_t max_episode_steps = 200;

    static constexpr int num_actions = 2;
    static constexpr double observation_angle_bound = 41.8 * std::numbers::pi / 180.0;

    CartPoleState reset(Rng& rng) const {
        std::uniform_real_distribution<double> dist(-0.05, 0.05);
        CartPoleState s;
        s.cart_position = dist(rng);
        s.cart_velocity = dist(rng);
        s.pole_angle = dist(rng);
        s.pole_tip_velocity = dist(rng);
        return s;
    }

    bool failed(const CartPoleState& s) const {
        return std::abs(s.cart_position) > position_threshold || std::abs(s.pole_angle) > angle_threshold;
    }

    bool terminal(const CartPoleState& s) const {
        return failed(s) || s.elapsed_steps >= max_episode_steps;
    }

    /// Reward is 1.0 unless the step leaves the safe region. Reaching the
    /// step cap ends the episode without forfeiting the last reward, so a
    /// full-length episode returns exactly `max_episode_steps`.
    CartPoleStep step(const CartPoleState& s, int action) const {
        if (terminal(s)) throw contract_violation("cartpole step: state is terminal");
        if (action != 0 && action != 1) throw std::invalid_argument("cartpole step: action must be 0 or 1");

        const double total_mass = cart_mass + pole_mass;
        const double pole_mass_length = pole_mass * half_pole_length;
        const double force = action == 1 ? force_magnitude : -force_magnitude;
        const double cos_theta = std::cos(s.pole_angle);
        const double sin_theta = std::sin(s.pole_angle);

        const double temp =
            (force + pole_mass_length * s.pole_tip_velocity * s.pole_tip_velocity * sin_theta) / total_mass;
        const double angular_acc =
            (gravity * sin_theta - cos_theta * temp) /
            (half_pole_length * (4.0 / 3.0 - pole_mass * cos_theta * cos_theta / total_mass));
        const double linear_acc = temp - pole_mass_length * angular_acc * cos_theta / total_mass;

        CartPoleState next;
        next.cart_position = s.cart_position + tau * s.cart_velocity;
        next.cart_velocity = s.cart_velocity + tau * linear_acc;
        next.pole_angle = s.pole_angle + tau * s.pole_tip_velocity;
        next.pole_tip_velocity = s.pole_tip_velocity + tau * angular_acc;
        next.elapsed_steps = s.elapsed_steps + 1;

        const bool fell = failed(next);
        return {next, fell ? 0.0 : 1.0, fell || next.elapsed_steps >= max_episode_steps};
    }
};

inline CartPoleState cartpole_reset(Rng& rng) { return CartPoleEnv{}.reset(rng); }

inline CartPoleStep cartpole_step(const CartPoleState& state, int action) {
    return CartPoleEnv{}.step(state, action);
}

} // namespace mhpolicy
