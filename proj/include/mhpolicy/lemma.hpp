#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <vector>

#include "mhpolicy/mh_sampler.hpp"
#include "mhpolicy/random.hpp"

namespace mhpolicy {

/// A finite utility grid with a unique maximiser, used to check numerically
/// that the annealed target concentrates on the maximiser as T → 0.
struct UtilityGrid {
    std::vector<double> utilities;
    std::vector<double> log_priors;
    std::size_t argmax = 0;
    double gap = 0.0; // best minus second best
};

/// Utilities uniform on [0, 1 - gap] except one random index at 1.0 and one
/// at exactly 1 - gap. Log priors uniform on [-prior_spread, prior_spread].
inline UtilityGrid make_utility_grid(std::size_t size, double gap, double prior_spread, Rng& rng) {
    if (size < 2) throw std::invalid_argument("make_utility_grid: need at least two points");
    if (!(gap > 0.0 && gap < 1.0)) throw std::invalid_argument("make_utility_grid: gap must lie in (0, 1)");
    if (!(prior_spread >= 0.0)) throw std::invalid_argument("make_utility_grid: negative prior spread");

    UtilityGrid g;
    g.gap = gap;
    std::uniform_real_distribution<double> rest(0.0, 1.0 - gap);
    std::uniform_real_distribution<double> prior(-prior_spread, prior_spread);
    g.utilities.resize(size);
    g.log_priors.resize(size);
    for (std::size_t k = 0; k < size; ++k) {
        g.utilities[k] = rest(rng);
        g.log_priors[k] = prior_spread > 0.0 ? prior(rng) : 0.0;
    }
    std::uniform_int_distribution<std::size_t> pick(0, size - 1);
    g.argmax = pick(rng);
    std::size_t runner_up = pick(rng);
    while (runner_up == g.argmax) runner_up = pick(rng);
    g.utilities[g.argmax] = 1.0;
    g.utilities[runner_up] = 1.0 - gap;
    return g;
}

/// Total posterior mass away from the maximiser.
inline double off_max_mass(const UtilityGrid& g, double temperature) {
    const auto w = grid_posterior(g.utilities, g.log_priors, temperature);
    double off = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k)
        if (k != g.argmax) off += w[k];
    return off;
}

/// Temperature at which, with equal priors, the off-maximum mass is at most
/// (N - 1) · N^-20.
inline double concentration_temperature(std::size_t size, double gap) {
    return gap / (20.0 * std::log(static_cast<double>(size)));
}

} // namespace mhpolicy
