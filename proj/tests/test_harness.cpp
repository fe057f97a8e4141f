#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "mhpolicy/harness.hpp"

using namespace mhpolicy;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("mhpolicy_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig small_mdp_config(Algorithm algorithm) {
    RunConfig c = default_config(Experiment::random_mdp);
    c.algorithm = algorithm;
    c.n_iterations = 60;
    c.trials = 3;
    c.master_seed = 17;
    c.estimator.batch_size = 64;
    c.mdp_dims = {4, 3};
    return c;
}

} // namespace

TEST(Config, DefaultsMatchExperiments) {
    const auto mdp = default_config(Experiment::random_mdp);
    EXPECT_EQ(mdp.n_iterations, 10000u);
    EXPECT_EQ(mdp.trials, 10u);
    EXPECT_EQ(mdp.mh.initial_temperature, 1.0);
    EXPECT_EQ(mdp.mh.cooling_rate, 0.999);
    EXPECT_EQ(mdp.estimator.batch_size, 512u);
    EXPECT_EQ(mdp.pg.learning_rate, 0.1);
    const auto cp = default_config(Experiment::cartpole);
    EXPECT_EQ(cp.n_iterations, 1000u);
    EXPECT_EQ(cp.mh.cooling_rate, 0.9);
    EXPECT_EQ(cp.estimator.buffer_size, 10000u);
    EXPECT_EQ(cp.hidden_size, 32u);
}

TEST(Config, JsonRoundTrip) {
    RunConfig c = small_mdp_config(Algorithm::reinforce);
    c.experiment = Experiment::cartpole;
    c.mh.proposal_sigma = 0.37;
    c.mh.burn_in_fraction = 0.25;
    c.eval_seed = 99;
    c.record_timing = true;
    c.output_dir = "somewhere/else";
    const nlohmann::json j = c;
    RunConfig back;
    from_json(nlohmann::json::parse(j.dump()), back);
    EXPECT_EQ(back, c);
}

TEST(Config, UnknownKeysRejected) {
    RunConfig c;
    try {
        from_json(nlohmann::json::parse(R"({"mh": {"cooling": 0.5}})"), c);
        FAIL();
    } catch (const validation_error& e) {
        EXPECT_EQ(e.field(), "cooling");
    }
    EXPECT_THROW(from_json(nlohmann::json::parse(R"({"n_iter": 5})"), c), validation_error);
    EXPECT_THROW(from_json(nlohmann::json::parse(R"({"trials": "ten"})"), c), validation_error);
    EXPECT_THROW(from_json(nlohmann::json::parse(R"({"algorithm": "sgd"})"), c), validation_error);
}

TEST(Config, ValidationNamesField) {
    auto field_of = [](RunConfig c) -> std::string {
        try {
            c.validate();
        } catch (const validation_error& e) {
            return e.field();
        }
        return "";
    };
    auto c = small_mdp_config(Algorithm::mh);
    EXPECT_EQ(field_of(c), "");
    auto bad = c;
    bad.mh.cooling_rate = 1.5;
    EXPECT_EQ(field_of(bad), "cooling_rate");
    bad = c;
    bad.trials = 0;
    EXPECT_EQ(field_of(bad), "trials");
    bad = c;
    bad.mh.proposal_sigma = 0.0;
    EXPECT_EQ(field_of(bad), "proposal_sigma");
    bad = c;
    bad.mh.initial_temperature = -1.0;
    EXPECT_EQ(field_of(bad), "initial_temperature");
    bad = c;
    bad.n_iterations = 0;
    EXPECT_EQ(field_of(bad), "n_iterations");
    bad = c;
    bad.experiment = Experiment::cartpole;
    bad.estimator.buffer_size = 10;
    EXPECT_EQ(field_of(bad), "buffer_size");
}

TEST(Seeds, TrialStreamsDerivedFromMasterAndIndex) {
    EXPECT_EQ(trial_seeds(5, 3).algorithm, trial_seeds(5, 3).algorithm);
    EXPECT_NE(trial_seeds(5, 3).algorithm, trial_seeds(5, 4).algorithm);
    EXPECT_NE(trial_seeds(5, 3).algorithm, trial_seeds(6, 3).algorithm);
    EXPECT_NE(trial_seeds(5, 3).algorithm, trial_seeds(5, 3).environment);
}

TEST(Trial, IndependentOfOtherTrials) {
    auto c = small_mdp_config(Algorithm::mh);
    const auto alone = run_trial(c, 2);
    c.trials = 5;
    const auto again = run_trial(c, 2);
    EXPECT_EQ(alone.final_theta, again.final_theta);
    EXPECT_EQ(alone.trace.rewards(), again.trace.rewards());
}

TEST(Aggregate, SingleTrialDegenerates) {
    auto c = small_mdp_config(Algorithm::mh);
    c.trials = 1;
    c.output_dir = scratch_dir("single").string();
    const auto report = run_experiment(c);
    const auto rewards = report.trials.front().trace.rewards();
    ASSERT_EQ(report.mean.size(), rewards.size());
    for (std::size_t i = 0; i < rewards.size(); ++i) {
        EXPECT_EQ(report.mean[i], rewards[i]);
        EXPECT_EQ(report.stddev[i], 0.0);
    }
}

TEST(Aggregate, MeanIsArithmeticMeanOfTraces) {
    for (auto algorithm : {Algorithm::mh, Algorithm::reinforce}) {
        auto c = small_mdp_config(algorithm);
        c.trials = 4;
        std::vector<TrialResult> trials;
        for (std::size_t k = 0; k < c.trials; ++k) trials.push_back(run_trial(c, k));
        const auto report = aggregate(trials);
        for (std::size_t i = 0; i < c.n_iterations; ++i) {
            double sum = 0.0;
            for (const auto& t : trials) sum += t.trace.records[i].reward;
            const double mean = sum / 4.0;
            EXPECT_NEAR(report.mean[i], mean, 1e-12);
            double ss = 0.0;
            for (const auto& t : trials) ss += std::pow(t.trace.records[i].reward - mean, 2);
            EXPECT_NEAR(report.stddev[i], std::sqrt(ss / 4.0), 1e-12);
            EXPECT_GE(report.stddev[i], 0.0);
        }
        for (const auto& t : report.trials) EXPECT_EQ(t.trace.size(), c.n_iterations);
    }
}

TEST(Aggregate, RejectsRaggedCurves) {
    std::vector<double> mean, sd;
    EXPECT_THROW(aggregate_curves({{1.0, 2.0}, {1.0}}, mean, sd), std::invalid_argument);
    EXPECT_THROW(aggregate_curves({}, mean, sd), std::invalid_argument);
}

TEST(RunExperiment, WritesFilesAndIsByteIdentical) {
    for (auto algorithm : {Algorithm::mh, Algorithm::reinforce}) {
        auto c = small_mdp_config(algorithm);
        const auto a = scratch_dir("det_a");
        const auto b = scratch_dir("det_b");
        c.output_dir = a.string();
        run_experiment(c);
        c.output_dir = b.string();
        run_experiment(c);
        for (std::size_t k = 0; k < c.trials; ++k) {
            const auto fa = slurp(trial_csv_path(a, k));
            ASSERT_FALSE(fa.empty());
            EXPECT_EQ(fa, slurp(trial_csv_path(b, k)));
            EXPECT_EQ(fa.substr(0, fa.find('\n')), kTraceCsvHeader);
            EXPECT_EQ(std::count(fa.begin(), fa.end(), '\n'), static_cast<long>(c.n_iterations + 1));
        }
        EXPECT_EQ(slurp(a / "aggregate.csv"), slurp(b / "aggregate.csv"));
        const auto report = nlohmann::json::parse(slurp(a / "report.json"));
        EXPECT_EQ(report.at("mean").size(), c.n_iterations);
        EXPECT_EQ(report.at("final_evals").size(), c.trials);
        EXPECT_EQ(report.at("optimal_values").size(), c.trials);
        EXPECT_EQ(report.contains("posterior_average_evals"), algorithm == Algorithm::mh);
        RunConfig echoed;
        from_json(report.at("config"), echoed);
        echoed.output_dir = c.output_dir;
        EXPECT_EQ(echoed, c);
    }
}

TEST(RunExperiment, UnwritableOutputFailsBeforeCompute) {
    const auto dir = scratch_dir("blocked");
    fs::create_directories(dir);
    const auto file = dir / "plain_file";
    std::ofstream(file) << "x";
    auto c = small_mdp_config(Algorithm::mh);
    c.n_iterations = 100000000; // would take far too long if compute started
    c.output_dir = (file / "sub").string();
    EXPECT_THROW(run_experiment(c), io_error);
}

TEST(RunExperiment, InvalidConfigFailsWithField) {
    auto c = small_mdp_config(Algorithm::mh);
    c.mh.prior_sigma = -2.0;
    c.output_dir = scratch_dir("invalid").string();
    try {
        run_experiment(c);
        FAIL();
    } catch (const validation_error& e) {
        EXPECT_EQ(e.field(), "prior_sigma");
    }
    EXPECT_FALSE(fs::exists(c.output_dir));
}

TEST(Evaluate, OptimalDeterministicPolicyScoresOracleValue) {
    const auto mdp = generate_random_mdp(10, 5, 3);
    const auto best = optimal_deterministic_policy(mdp);
    EXPECT_EQ(evaluate_final_policy(mdp, one_hot_policy(mdp, best.actions)), best.value);
}

TEST(Evaluate, UniformRandomCartPoleBaseline) {
    const CartPoleEnv env;
    auto uniform = [](const CartPoleState&) { return std::vector<double>{0.5, 0.5}; };
    const double score = evaluate_cartpole_policy(env, uniform, 100, 0x5eede7a1);
    EXPECT_GE(score, 15.0);
    EXPECT_LE(score, 35.0);
    const MlpPolicy policy(32);
    const ParamVector zero(policy.layout(), std::vector<double>(policy.param_count(), 0.0));
    EXPECT_EQ(evaluate_final_policy(env, policy, zero, 100, 0x5eede7a1), score);
}

TEST(Evaluate, DeterministicGivenSeed) {
    const CartPoleEnv env;
    const MlpPolicy policy(8);
    auto rng = make_rng(4);
    const auto theta = init_params(policy, {1.0}, rng);
    EXPECT_EQ(evaluate_final_policy(env, policy, theta, 50, 7), evaluate_final_policy(env, policy, theta, 50, 7));
}

TEST(Evaluate, ThinningKeepsAtMostRequested) {
    std::vector<ParamVector> samples(1001, ParamVector("x", {0.0}));
    for (std::size_t i = 0; i < samples.size(); ++i) samples[i][0] = static_cast<double>(i);
    const auto kept = thin_samples(samples, 500, 50);
    EXPECT_LE(kept.size(), 50u);
    EXPECT_GE(kept.size(), 40u);
    EXPECT_EQ(kept.front()[0], 500.0);
    EXPECT_EQ(thin_samples(samples, 990, 50).size(), 11u);
}

TEST(CompareRuntimes, PositiveAndFinite) {
    auto c = small_mdp_config(Algorithm::mh);
    const auto t = compare_runtimes(c, 50);
    EXPECT_GT(t.mh_seconds, 0.0);
    EXPECT_GT(t.pg_seconds, 0.0);
    EXPECT_TRUE(std::isfinite(t.mh_seconds));
    EXPECT_TRUE(std::isfinite(t.pg_seconds));
}

TEST(TraceCsv, FormatRoundTrips) {
    ChainTrace trace;
    trace.records.push_back({1, 0.1, true, false, 0.999, 0.0});
    trace.records.push_back({2, -1.0 / 3.0, false, false, 0.998001, 0.0});
    std::ostringstream out;
    write_trace_csv(out, trace);
    EXPECT_EQ(out.str(), "iteration,reward,accepted,greedy,temperature,elapsed_s\n"
                         "1,0.10000000000000001,1,0,0.999,0\n"
                         "2,-0.33333333333333331,0,0,0.99800100000000003,0\n");
    EXPECT_EQ(std::stod(format_double(-1.0 / 3.0)), -1.0 / 3.0);
}
