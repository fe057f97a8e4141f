// Command-line front end: run experiments, compare runtimes, and tabulate
// the low-temperature concentration of the annealed target on a grid.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mhpolicy/mhpolicy.hpp"

namespace {

using namespace mhpolicy;

constexpr int kExitIo = 1;
constexpr int kExitValidation = 2;

/// CLI flags mirroring RunConfig fields. Unset flags leave the config alone.
struct Overrides {
    std::optional<std::string> experiment;
    std::optional<std::string> algorithm;
    std::optional<std::size_t> n_iterations;
    std::optional<std::size_t> trials;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<double> initial_temperature;
    std::optional<double> cooling_rate;
    std::optional<double> proposal_sigma;
    std::optional<double> prior_sigma;
    std::optional<double> burn_in_fraction;
    std::optional<double> learning_rate;
    std::optional<std::size_t> batch_size;
    std::optional<std::size_t> buffer_size;
    std::optional<std::size_t> num_states;
    std::optional<std::size_t> num_actions;
    std::optional<std::size_t> hidden_size;
    std::optional<std::size_t> eval_episodes;
    std::optional<std::uint64_t> eval_seed;
    std::optional<bool> record_timing;

    void attach(CLI::App& app, bool with_algorithm) {
        app.add_option("--experiment", experiment, "random_mdp | cartpole");
        if (with_algorithm) app.add_option("--algorithm", algorithm, "mh | reinforce");
        app.add_option("--n_iterations", n_iterations);
        app.add_option("--trials", trials);
        app.add_option("--seed,--master_seed", seed, "master seed");
        app.add_option("--out,--output_dir", out, "output directory");
        app.add_option("--initial_temperature", initial_temperature);
        app.add_option("--cooling_rate", cooling_rate);
        app.add_option("--proposal_sigma", proposal_sigma);
        app.add_option("--prior_sigma", prior_sigma);
        app.add_option("--burn_in_fraction", burn_in_fraction);
        app.add_option("--learning_rate", learning_rate);
        app.add_option("--batch_size", batch_size);
        app.add_option("--buffer_size", buffer_size);
        app.add_option("--num_states", num_states);
        app.add_option("--num_actions", num_actions);
        app.add_option("--hidden_size", hidden_size);
        app.add_option("--eval_episodes", eval_episodes);
        app.add_option("--eval_seed", eval_seed);
        app.add_option("--record_timing", record_timing);
    }

    RunConfig resolve(const std::string& config_path) const {
        RunConfig c;
        if (!config_path.empty()) {
            c = load_run_config(config_path);
        } else {
            c = default_config(experiment ? parse_experiment(*experiment) : Experiment::random_mdp);
        }
        if (experiment) c.experiment = parse_experiment(*experiment);
        if (algorithm) c.algorithm = parse_algorithm(*algorithm);
        auto set = [](auto& field, const auto& flag) {
            if (flag) field = *flag;
        };
        set(c.n_iterations, n_iterations);
        set(c.trials, trials);
        set(c.master_seed, seed);
        set(c.output_dir, out);
        set(c.mh.initial_temperature, initial_temperature);
        set(c.mh.cooling_rate, cooling_rate);
        set(c.mh.proposal_sigma, proposal_sigma);
        set(c.mh.prior_sigma, prior_sigma);
        set(c.mh.burn_in_fraction, burn_in_fraction);
        set(c.pg.learning_rate, learning_rate);
        set(c.estimator.batch_size, batch_size);
        set(c.estimator.buffer_size, buffer_size);
        set(c.mdp_dims.num_states, num_states);
        set(c.mdp_dims.num_actions, num_actions);
        set(c.hidden_size, hidden_size);
        set(c.eval_episodes, eval_episodes);
        set(c.eval_seed, eval_seed);
        set(c.record_timing, record_timing);
        c.validate();
        return c;
    }
};

int cmd_run(const std::string& config_path, const Overrides& overrides) {
    const RunConfig config = overrides.resolve(config_path);
    const auto report = run_experiment(config);
    std::printf("%s/%s: %zu trial(s) x %zu iterations\n", to_string(config.experiment).c_str(),
                to_string(config.algorithm).c_str(), config.trials, config.n_iterations);
    std::printf("final reward  mean %.6g  std %.6g\n", report.mean.back(), report.stddev.back());
    std::printf("final_eval    %.6g\n", report.final_eval);
    std::printf("runtime_s     %.3f\n", report.runtime_s);
    std::printf("wrote %s\n", config.output_dir.c_str());
    return 0;
}

int cmd_compare(const std::string& config_path, const Overrides& overrides, std::size_t iterations) {
    const RunConfig config = overrides.resolve(config_path);
    const auto timing = compare_runtimes(config, iterations);
    std::printf("experiment  %s\n", to_string(config.experiment).c_str());
    std::printf("iterations  %zu x %zu trial(s), batch %zu\n", iterations, config.trials,
                config.estimator.batch_size);
    std::printf("mh_seconds  %.6f\n", timing.mh_seconds);
    std::printf("pg_seconds  %.6f\n", timing.pg_seconds);
    return 0;
}

int cmd_lemma(std::size_t grid_size, double gap, std::uint64_t seed, double prior_spread) {
    auto rng = make_rng(seed);
    const auto grid = make_utility_grid(grid_size, gap, prior_spread, rng);
    const double t_star = concentration_temperature(grid_size, gap);
    std::printf("grid_size %zu  gap %.6g  argmax %zu  prior_spread %.6g\n", grid_size, gap, grid.argmax, prior_spread);
    std::printf("%-14s %-24s\n", "temperature", "off_max_mass");
    double previous = 2.0;
    bool monotone = true;
    for (double t : {1.0, 0.1, 0.01, 0.001}) {
        const double m = off_max_mass(grid, t);
        monotone = monotone && m < previous;
        previous = m;
        std::printf("%-14.6g %-24.17g\n", t, m);
    }
    const double at_star = off_max_mass(grid, t_star);
    std::printf("%-14.6g %-24.17g (gap / (20 ln N))\n", t_star, at_star);
    std::printf("strictly_decreasing %s\n", monotone ? "yes" : "no");
    std::printf("below_1e-6_at_0.001 %s\n", off_max_mass(grid, 0.001) < 1e-6 ? "yes" : "no");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Annealed Metropolis-Hastings policy search and REINFORCE baseline"};
    app.require_subcommand(1);

    std::string run_config;
    Overrides run_overrides;
    auto* run = app.add_subcommand("run", "run trials of one algorithm and write traces");
    run->add_option("--config", run_config, "JSON run configuration");
    run_overrides.attach(*run, true);

    std::string cmp_config;
    Overrides cmp_overrides;
    std::size_t cmp_iterations = 1000;
    auto* cmp = app.add_subcommand("compare-runtimes", "time MH against REINFORCE at matched settings");
    cmp->add_option("--config", cmp_config, "JSON run configuration");
    cmp->add_option("--iterations", cmp_iterations, "iterations per run")->capture_default_str();
    cmp_overrides.attach(*cmp, false);

    std::size_t grid_size = 100;
    double gap = 0.05;
    std::uint64_t lemma_seed = 0;
    double prior_spread = 0.0;
    auto* lemma = app.add_subcommand("lemma-check", "off-maximum posterior mass over a temperature sweep");
    lemma->add_option("--grid-size", grid_size)->capture_default_str();
    lemma->add_option("--gap", gap)->capture_default_str();
    lemma->add_option("--seed", lemma_seed)->capture_default_str();
    lemma->add_option("--prior-spread", prior_spread, "half-width of random log priors")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (run->parsed()) return cmd_run(run_config, run_overrides);
        if (cmp->parsed()) return cmd_compare(cmp_config, cmp_overrides, cmp_iterations);
        if (lemma->parsed()) return cmd_lemma(grid_size, gap, lemma_seed, prior_spread);
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    }
    return 0;
}
