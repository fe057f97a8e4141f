#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <type_traits>
#include <vector>

#include <nlohmann/json.hpp>

#include "mhpolicy/cartpole.hpp"
#include "mhpolicy/errors.hpp"
#include "mhpolicy/estimator.hpp"
#include "mhpolicy/mdp.hpp"
#include "mhpolicy/mh_sampler.hpp"
#include "mhpolicy/policy.hpp"
#include "mhpolicy/random.hpp"
#include "mhpolicy/reinforce.hpp"
#include "mhpolicy/trace_csv.hpp"

namespace mhpolicy {

enum class Experiment { random_mdp, cartpole };
enum class Algorithm { mh, reinforce };

inline std::string to_string(Experiment e) { return e == Experiment::random_mdp ? "random_mdp" : "cartpole"; }
inline std::string to_string(Algorithm a) { return a == Algorithm::mh ? "mh" : "reinforce"; }

inline Experiment parse_experiment(const std::string& s) {
    if (s == "random_mdp") return Experiment::random_mdp;
    if (s == "cartpole") return Experiment::cartpole;
    throw validation_error("experiment", "expected random_mdp or cartpole, got '" + s + "'");
}

inline Algorithm parse_algorithm(const std::string& s) {
    if (s == "mh") return Algorithm::mh;
    if (s == "reinforce") return Algorithm::reinforce;
    throw validation_error("algorithm", "expected mh or reinforce, got '" + s + "'");
}

struct MhSettings {
    double initial_temperature = 1.0;
    double cooling_rate = 0.999;
    double proposal_sigma = 0.1;
    double prior_sigma = 1.0;
    /// Fraction of the chain discarded before posterior averaging.
    double burn_in_fraction = 0.5;
    bool operator==(const MhSettings&) const = default;
};

struct PgSettings {
    double learning_rate = 0.1;
    bool operator==(const PgSettings&) const = default;
};

struct EstimatorSettings {
    std::size_t batch_size = 512;
    std::size_t buffer_size = 10000;
    bool operator==(const EstimatorSettings&) const = default;
};

struct MdpDims {
    std::size_t num_states = 10;
    std::size_t num_actions = 5;
    bool operator==(const MdpDims&) const = default;
};

/// Everything needed to reproduce one experiment. Trial k draws its
/// environment and algorithm randomness from streams derived from
/// (master_seed, k) only.
struct RunConfig {
    Experiment experiment = Experiment::random_mdp;
    Algorithm algorithm = Algorithm::mh;
    std::size_t n_iterations = 10000;
    std::size_t trials = 10;
    std::uint64_t master_seed = 0;
    MhSettings mh;
    PgSettings pg;
    EstimatorSettings estimator;
    MdpDims mdp_dims;
    std::size_t hidden_size = 32;
    std::size_t eval_episodes = 100;
    std::uint64_t eval_seed = 0x5eed'e7a1ULL;
    bool record_timing = false;
    std::string output_dir = "runs";

    bool operator==(const RunConfig&) const = default;

    void validate() const {
        if (n_iterations == 0) throw validation_error("n_iterations", "must be positive");
        if (trials == 0) throw validation_error("trials", "must be at least 1");
        mh_config().validate();
        if (!(mh.burn_in_fraction >= 0.0 && mh.burn_in_fraction < 1.0))
            throw validation_error("burn_in_fraction", "must lie in [0, 1)");
        if (!(pg.learning_rate >= 0.0) || !std::isfinite(pg.learning_rate))
            throw validation_error("learning_rate", "must be non-negative and finite");
        if (estimator.batch_size == 0) throw validation_error("batch_size", "must be positive");
        if (experiment == Experiment::cartpole && estimator.buffer_size < estimator.batch_size)
            throw validation_error("buffer_size", "must be at least batch_size");
        if (experiment == Experiment::random_mdp && (mdp_dims.num_states < 2 || mdp_dims.num_actions < 2))
            throw validation_error("mdp_dims", "need at least 2 states and 2 actions");
        if (mdp_dims.num_actions > kMaxActions) throw validation_error("num_actions", "too many actions");
        if (hidden_size == 0 || hidden_size > MlpPolicy::kMaxHidden)
            throw validation_error("hidden_size", "out of supported range");
        if (eval_episodes == 0) throw validation_error("eval_episodes", "must be positive");
    }

    MhConfig mh_config() const {
        MhConfig c;
        c.n_iterations = n_iterations;
        c.schedule = {mh.initial_temperature, mh.cooling_rate};
        c.proposal.sigma = mh.proposal_sigma;
        c.prior.sigma = mh.prior_sigma;
        c.record_timing = record_timing;
        return c;
    }

    PgConfig pg_config() const {
        PgConfig c;
        c.learning_rate = pg.learning_rate;
        c.batch_size = estimator.batch_size;
        c.buffer_size = estimator.buffer_size;
        c.iterations = n_iterations;
        c.init.sigma = mh.prior_sigma;
        c.record_timing = record_timing;
        return c;
    }

    EstimatorConfig estimator_config() const {
        return {estimator.batch_size, estimator.buffer_size,
                experiment == Experiment::cartpole ? EstimatorMode::episodic_return : EstimatorMode::per_step_mean};
    }
};

/// Shipped defaults for the two experiments.
inline RunConfig default_config(Experiment experiment) {
    RunConfig c;
    c.experiment = experiment;
    if (experiment == Experiment::cartpole) {
        c.n_iterations = 1000;
        c.mh.cooling_rate = 0.9;
    }
    return c;
}

namespace detail {

template <class T>
void read_field(const nlohmann::json& obj, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(key, std::string("wrong type: ") + e.what());
    }
}

inline void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> known, const std::string& where) {
    if (!obj.is_object()) throw validation_error(where, "expected a JSON object");
    const std::set<std::string> allowed(known.begin(), known.end());
    for (const auto& [key, value] : obj.items())
        if (!allowed.contains(key)) throw validation_error(key, "unknown key in " + where);
}

} // namespace detail

inline void to_json(nlohmann::json& j, const RunConfig& c) {
    j = nlohmann::json{
        {"experiment", to_string(c.experiment)},
        {"algorithm", to_string(c.algorithm)},
        {"n_iterations", c.n_iterations},
        {"trials", c.trials},
        {"master_seed", c.master_seed},
        {"mh",
         {{"initial_temperature", c.mh.initial_temperature},
          {"cooling_rate", c.mh.cooling_rate},
          {"proposal_sigma", c.mh.proposal_sigma},
          {"prior_sigma", c.mh.prior_sigma},
          {"burn_in_fraction", c.mh.burn_in_fraction}}},
        {"pg", {{"learning_rate", c.pg.learning_rate}}},
        {"estimator", {{"batch_size", c.estimator.batch_size}, {"buffer_size", c.estimator.buffer_size}}},
        {"mdp_dims", {{"num_states", c.mdp_dims.num_states}, {"num_actions", c.mdp_dims.num_actions}}},
        {"hidden_size", c.hidden_size},
        {"eval_episodes", c.eval_episodes},
        {"eval_seed", c.eval_seed},
        {"record_timing", c.record_timing},
        {"output_dir", c.output_dir}};
}

/// Missing keys keep their defaults; unknown keys are rejected so typos do
/// not silently fall back to a default.
inline void from_json(const nlohmann::json& j, RunConfig& c) {
    using detail::read_field;
    detail::reject_unknown(j,
                           {"experiment", "algorithm", "n_iterations", "trials", "master_seed", "mh", "pg",
                            "estimator", "mdp_dims", "hidden_size", "eval_episodes", "eval_seed", "record_timing",
                            "output_dir"},
                           "config");
    if (j.contains("experiment")) c.experiment = parse_experiment(j.at("experiment").get<std::string>());
    if (j.contains("algorithm")) c.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    read_field(j, "n_iterations", c.n_iterations);
    read_field(j, "trials", c.trials);
    read_field(j, "master_seed", c.master_seed);
    read_field(j, "hidden_size", c.hidden_size);
    read_field(j, "eval_episodes", c.eval_episodes);
    read_field(j, "eval_seed", c.eval_seed);
    read_field(j, "record_timing", c.record_timing);
    read_field(j, "output_dir", c.output_dir);
    if (j.contains("mh")) {
        const auto& m = j.at("mh");
        detail::reject_unknown(
            m, {"initial_temperature", "cooling_rate", "proposal_sigma", "prior_sigma", "burn_in_fraction"}, "mh");
        read_field(m, "initial_temperature", c.mh.initial_temperature);
        read_field(m, "cooling_rate", c.mh.cooling_rate);
        read_field(m, "proposal_sigma", c.mh.proposal_sigma);
        read_field(m, "prior_sigma", c.mh.prior_sigma);
        read_field(m, "burn_in_fraction", c.mh.burn_in_fraction);
    }
    if (j.contains("pg")) {
        detail::reject_unknown(j.at("pg"), {"learning_rate"}, "pg");
        read_field(j.at("pg"), "learning_rate", c.pg.learning_rate);
    }
    if (j.contains("estimator")) {
        detail::reject_unknown(j.at("estimator"), {"batch_size", "buffer_size"}, "estimator");
        read_field(j.at("estimator"), "batch_size", c.estimator.batch_size);
        read_field(j.at("estimator"), "buffer_size", c.estimator.buffer_size);
    }
    if (j.contains("mdp_dims")) {
        detail::reject_unknown(j.at("mdp_dims"), {"num_states", "num_actions"}, "mdp_dims");
        read_field(j.at("mdp_dims"), "num_states", c.mdp_dims.num_states);
        read_field(j.at("mdp_dims"), "num_actions", c.mdp_dims.num_actions);
    }
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw validation_error("config", std::string("malformed JSON: ") + e.what());
    }
    RunConfig c = default_config(j.contains("experiment") ? parse_experiment(j.at("experiment").get<std::string>())
                                                          : Experiment::random_mdp);
    from_json(j, c);
    return c;
}

// ---------------------------------------------------------------------------
// Seeding

struct TrialSeeds {
    std::uint64_t environment;
    std::uint64_t algorithm;
};

inline TrialSeeds trial_seeds(std::uint64_t master_seed, std::size_t trial) {
    const auto base = derive_seed(master_seed, trial);
    return {derive_seed(base, 1), derive_seed(base, 2)};
}

inline MdpSpec trial_mdp(const RunConfig& config, std::size_t trial) {
    return generate_random_mdp(config.mdp_dims.num_states, config.mdp_dims.num_actions,
                               trial_seeds(config.master_seed, trial).environment);
}

// ---------------------------------------------------------------------------
// Final-policy evaluation

inline double evaluate_final_policy(const MdpSpec& mdp, const ActionMatrix& action_probs) {
    return exact_expected_reward(mdp, action_probs);
}

inline double evaluate_final_policy(const MdpSpec& mdp, const TabularPolicy& policy, const ParamVector& theta) {
    return exact_expected_reward(mdp, policy_table(policy, theta));
}

/// Mean undiscounted return over `episodes` fresh episodes. `probs_of`
/// maps a state to an action distribution; actions are sampled from it.
template <class ProbsOf>
double evaluate_cartpole_policy(const CartPoleEnv& env, ProbsOf&& probs_of, std::size_t episodes,
                                std::uint64_t eval_seed) {
    auto rng = make_rng(eval_seed);
    double total = 0.0;
    for (std::size_t e = 0; e < episodes; ++e) {
        CartPoleState s = env.reset(rng);
        bool done = false;
        while (!done) {
            const std::vector<double> probs = probs_of(s);
            const int action = uniform01(rng) < probs[0] ? 0 : 1;
            const auto step = env.step(s, action);
            total += step.reward;
            s = step.next;
            done = step.terminal;
        }
    }
    return total / static_cast<double>(episodes);
}

inline double evaluate_final_policy(const CartPoleEnv& env, const MlpPolicy& policy, const ParamVector& theta,
                                    std::size_t episodes, std::uint64_t eval_seed) {
    require_layout(policy, theta);
    return evaluate_cartpole_policy(
        env, [&](const CartPoleState& s) { return action_distribution(policy, theta, s); }, episodes, eval_seed);
}

/// Post-burn-in samples, thinned to at most `max_samples` evenly spaced draws.
inline std::vector<ParamVector> thin_samples(const std::vector<ParamVector>& samples, std::size_t burn_in,
                                             std::size_t max_samples) {
    std::vector<ParamVector> out;
    const std::size_t available = samples.size() - burn_in;
    const std::size_t stride = std::max<std::size_t>(1, (available + max_samples - 1) / max_samples);
    for (std::size_t i = burn_in; i < samples.size(); i += stride) out.push_back(samples[i]);
    return out;
}

// ---------------------------------------------------------------------------
// Trials and aggregation

struct TrialResult {
    ChainTrace trace;
    ParamVector final_theta;
    double elapsed_s = 0.0;
    /// Score of θ_n: exact for the MDP, mean evaluation return for cart-pole.
    double final_eval = 0.0;
    /// MH only: score of the posterior-averaged policy and of the best-r̂ sample.
    std::optional<double> posterior_average_eval;
    std::optional<double> best_sample_eval;
    /// MDP only: brute-force optimum of the trial's MDP.
    std::optional<double> optimal_value;
    /// MH only: θ₀ … θ_n.
    std::vector<ParamVector> samples;
};

inline std::size_t burn_in_count(const RunConfig& config, std::size_t num_samples) {
    const auto b = static_cast<std::size_t>(std::floor(config.mh.burn_in_fraction * static_cast<double>(num_samples)));
    return std::min(b, num_samples - 1);
}

inline TrialResult run_trial(const RunConfig& config, std::size_t trial) {
    config.validate();
    const auto seeds = trial_seeds(config.master_seed, trial);
    auto rng = make_rng(seeds.algorithm);
    TrialResult out;

    if (config.experiment == Experiment::random_mdp) {
        const MdpSpec mdp = trial_mdp(config, trial);
        const TabularPolicy policy(mdp.num_states(), mdp.num_actions());
        out.optimal_value = optimal_deterministic_policy(mdp).value;
        if (config.algorithm == Algorithm::mh) {
            MdpRewardEstimator estimator(mdp, policy, config.estimator_config());
            auto chain = run_chain(config.mh_config(), policy, estimator, rng);
            out.trace = std::move(chain.trace);
            out.final_theta = chain.samples.back();
            out.elapsed_s = chain.elapsed_s;
            const auto burn_in = burn_in_count(config, chain.samples.size());
            ActionMatrix averaged(mdp.num_states());
            for (std::size_t s = 0; s < mdp.num_states(); ++s)
                averaged[s] = posterior_average_policy(policy, std::span<const ParamVector>(chain.samples), burn_in, s);
            out.posterior_average_eval = evaluate_final_policy(mdp, averaged);
            out.best_sample_eval = evaluate_final_policy(mdp, policy, chain.samples[chain.best_sample_index()]);
            out.samples = std::move(chain.samples);
        } else {
            auto run = reinforce_run(config.pg_config(), mdp, policy, rng);
            out.trace = std::move(run.trace);
            out.final_theta = std::move(run.final_theta);
            out.elapsed_s = run.elapsed_s;
        }
        out.final_eval = evaluate_final_policy(mdp, policy, out.final_theta);
        return out;
    }

    const CartPoleEnv env;
    const MlpPolicy policy(config.hidden_size);
    if (config.algorithm == Algorithm::mh) {
        CartPoleReturnEstimator estimator(env, policy, config.estimator_config());
        auto chain = run_chain(config.mh_config(), policy, estimator, rng);
        out.trace = std::move(chain.trace);
        out.final_theta = chain.samples.back();
        out.elapsed_s = chain.elapsed_s;
        const auto burn_in = burn_in_count(config, chain.samples.size());
        const auto kept = thin_samples(chain.samples, burn_in, 50);
        out.posterior_average_eval = evaluate_cartpole_policy(
            env,
            [&](const CartPoleState& s) {
                return posterior_average_policy(policy, std::span<const ParamVector>(kept), 0, s);
            },
            config.eval_episodes, config.eval_seed);
        out.best_sample_eval = evaluate_final_policy(env, policy, chain.samples[chain.best_sample_index()],
                                                     config.eval_episodes, config.eval_seed);
        out.samples = std::move(chain.samples);
    } else {
        auto run = reinforce_run(config.pg_config(), env, policy, rng);
        out.trace = std::move(run.trace);
        out.final_theta = std::move(run.final_theta);
        out.elapsed_s = run.elapsed_s;
    }
    out.final_eval = evaluate_final_policy(env, policy, out.final_theta, config.eval_episodes, config.eval_seed);
    return out;
}

struct AggregateReport {
    std::vector<double> mean;
    std::vector<double> stddev;
    /// Summed sampling/optimisation wall-clock over trials, excluding I/O.
    double runtime_s = 0.0;
    /// Mean over trials of TrialResult::final_eval.
    double final_eval = 0.0;
    std::vector<TrialResult> trials;
};

/// Per-iteration mean and population standard deviation across curves.
inline void aggregate_curves(const std::vector<std::vector<double>>& curves, std::vector<double>& mean,
                             std::vector<double>& stddev) {
    if (curves.empty()) throw std::invalid_argument("aggregate_curves: no curves");
    const auto n = curves.front().size();
    mean.assign(n, 0.0);
    stddev.assign(n, 0.0);
    for (const auto& c : curves) {
        if (c.size() != n) throw std::invalid_argument("aggregate_curves: curves differ in length");
        for (std::size_t i = 0; i < n; ++i) mean[i] += c[i];
    }
    const double k = static_cast<double>(curves.size());
    for (double& m : mean) m /= k;
    for (const auto& c : curves)
        for (std::size_t i = 0; i < n; ++i) stddev[i] += (c[i] - mean[i]) * (c[i] - mean[i]);
    for (double& s : stddev) s = std::sqrt(s / k);
}

inline AggregateReport aggregate(std::vector<TrialResult> trials) {
    AggregateReport report;
    std::vector<std::vector<double>> curves;
    curves.reserve(trials.size());
    for (const auto& t : trials) {
        curves.push_back(t.trace.rewards());
        report.runtime_s += t.elapsed_s;
        report.final_eval += t.final_eval;
    }
    aggregate_curves(curves, report.mean, report.stddev);
    report.final_eval /= static_cast<double>(trials.size());
    report.trials = std::move(trials);
    return report;
}

inline nlohmann::json report_json(const RunConfig& config, const AggregateReport& report) {
    nlohmann::json j{{"config", config},
                     {"mean", report.mean},
                     {"std", report.stddev},
                     {"runtime_s", report.runtime_s},
                     {"final_eval", report.final_eval}};
    auto per_trial = [&](auto member) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& t : report.trials) {
            const auto& v = t.*member;
            if constexpr (std::is_same_v<std::decay_t<decltype(v)>, double>)
                arr.push_back(v);
            else if (v)
                arr.push_back(*v);
            else
                arr.push_back(nullptr);
        }
        return arr;
    };
    j["final_evals"] = per_trial(&TrialResult::final_eval);
    if (config.experiment == Experiment::random_mdp) j["optimal_values"] = per_trial(&TrialResult::optimal_value);
    if (config.algorithm == Algorithm::mh) {
        j["posterior_average_evals"] = per_trial(&TrialResult::posterior_average_eval);
        j["best_sample_evals"] = per_trial(&TrialResult::best_sample_eval);
    }
    return j;
}

inline std::filesystem::path trial_csv_path(const std::filesystem::path& dir, std::size_t trial) {
    char name[32];
    std::snprintf(name, sizeof name, "trial_%03zu.csv", trial);
    return dir / name;
}

/// Fails with io_error unless `dir` exists (or can be created) and accepts a file.
inline void ensure_writable_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) throw io_error("cannot create output directory " + dir.string());
    const auto probe = dir / ".write_probe";
    {
        std::ofstream f(probe);
        if (!f) throw io_error("output directory is not writable: " + dir.string());
    }
    std::filesystem::remove(probe, ec);
}

/// Runs every trial, then writes trial_NNN.csv, aggregate.csv and report.json
/// into config.output_dir. Validation and the writability check happen
/// before any compute.
inline AggregateReport run_experiment(const RunConfig& config) {
    config.validate();
    const std::filesystem::path dir(config.output_dir);
    ensure_writable_dir(dir);

    std::vector<TrialResult> trials;
    trials.reserve(config.trials);
    for (std::size_t k = 0; k < config.trials; ++k) trials.push_back(run_trial(config, k));
    auto report = aggregate(std::move(trials));

    auto open = [](const std::filesystem::path& p) {
        std::ofstream f(p);
        if (!f) throw io_error("cannot write " + p.string());
        return f;
    };
    for (std::size_t k = 0; k < report.trials.size(); ++k) {
        auto f = open(trial_csv_path(dir, k));
        write_trace_csv(f, report.trials[k].trace);
    }
    {
        auto f = open(dir / "aggregate.csv");
        write_aggregate_csv(f, report.mean, report.stddev);
    }
    {
        auto f = open(dir / "report.json");
        f << report_json(config, report).dump(2) << '\n';
    }
    return report;
}

struct RuntimeComparison {
    double mh_seconds = 0.0;
    double pg_seconds = 0.0;
};

/// Runs both algorithms for `iterations` steps at the config's batch and
/// buffer sizes over all trials, one after another, and sums the loop
/// wall-clock of each. Nothing is written to disk.
inline RuntimeComparison compare_runtimes(RunConfig config, std::size_t iterations) {
    config.n_iterations = iterations;
    config.record_timing = false;
    config.validate();
    RuntimeComparison out;
    for (std::size_t k = 0; k < config.trials; ++k) {
        const auto seeds = trial_seeds(config.master_seed, k);
        if (config.experiment == Experiment::random_mdp) {
            const MdpSpec mdp = trial_mdp(config, k);
            const TabularPolicy policy(mdp.num_states(), mdp.num_actions());
            auto rng_mh = make_rng(seeds.algorithm);
            MdpRewardEstimator estimator(mdp, policy, config.estimator_config());
            out.mh_seconds += run_chain(config.mh_config(), policy, estimator, rng_mh).elapsed_s;
            auto rng_pg = make_rng(seeds.algorithm);
            out.pg_seconds += reinforce_run(config.pg_config(), mdp, policy, rng_pg).elapsed_s;
        } else {
            const CartPoleEnv env;
            const MlpPolicy policy(config.hidden_size);
            auto rng_mh = make_rng(seeds.algorithm);
            CartPoleReturnEstimator estimator(env, policy, config.estimator_config());
            out.mh_seconds += run_chain(config.mh_config(), policy, estimator, rng_mh).elapsed_s;
            auto rng_pg = make_rng(seeds.algorithm);
            out.pg_seconds += reinforce_run(config.pg_config(), env, policy, rng_pg).elapsed_s;
        }
    }
    return out;
}

} // namespace mhpolicy
