#include "sartre/error.hpp"
#include "sartre/experiment.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <map>

using namespace sartre;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "sartre_experiment_test" / name;
    std::filesystem::remove_all(dir);
    return dir;
}

ExperimentConfig quick(std::size_t d, std::size_t n, std::size_t trials) {
    ExperimentConfig cfg;
    cfg.d = d;
    cfg.n = n;
    cfg.trials = trials;
    cfg.seed = 42;
    cfg.ordering = OrderingMode::GroundTruth;
    return cfg;
}

std::map<std::string, std::string> snapshot(const std::filesystem::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const auto rel = std::filesystem::relative(entry.path(), dir).string();
        if (rel == "timings.csv") continue;
        out[rel] = read_text_file(entry.path());
    }
    return out;
}

}  // namespace

TEST(Config, DefaultsValidate) {
    const ExperimentConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    EXPECT_EQ(cfg.sartre.lambda, 0.1);
}

TEST(Config, JsonRoundTrip) {
    ExperimentConfig cfg = quick(7, 123, 3);
    cfg.graph = GraphFamily::ScaleFree;
    cfg.edge_factor = 2;
    cfg.p_linear = 0.5;
    cfg.stein.bandwidth = 1.25;
    cfg.sartre.lambda = 0.2;
    const Json j = to_json(cfg);
    EXPECT_EQ(to_json(config_from_json(Json::parse(j.dump()))).dump(), j.dump());
}

TEST(Config, StrictParsing) {
    EXPECT_THROW(config_from_json(Json::parse(R"({"dd": 3})")), ConfigError);
    EXPECT_THROW(config_from_json(Json::parse(R"({"sartre": {"lamda": 0.1}})")), ConfigError);
    EXPECT_THROW(config_from_json(Json::parse(R"({"stein": {"foo": 1}})")), ConfigError);
    EXPECT_THROW(config_from_json(Json::parse(R"({"d": "ten"})")), ConfigError);
    EXPECT_THROW(config_from_json(Json::parse(R"({"d": -3})")), ConfigError);
    EXPECT_THROW(config_from_json(Json::parse(R"({"graph": "ba"})")), ConfigError);
    EXPECT_THROW(config_from_json(Json::parse(R"({"trials": 0})")), ConfigError);
    EXPECT_THROW(config_from_json(Json::parse(R"({"ordering": "file"})")), ConfigError);
    EXPECT_THROW(config_from_json(Json::parse(R"({"sartre": {"lambda": -1}})")), ConfigError);
    EXPECT_THROW(config_from_json(Json::parse("[1, 2]")), ConfigError);
    try {
        config_from_json(Json::parse(R"({"sartre": {"num_trees": 1.5}})"));
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("sartre.num_trees"), std::string::npos);
    }
    const auto ok = config_from_json(Json::parse(R"({"d": 12, "stein": {"bandwidth": null}})"));
    EXPECT_EQ(ok.d, 12u);
    EXPECT_FALSE(ok.stein.bandwidth.has_value());
}

TEST(Config, HighDimensionalForcesGroundTruth) {
    ExperimentConfig cfg;
    cfg.d = 64;
    EXPECT_EQ(cfg.effective_ordering(), OrderingMode::GroundTruth);
    cfg.d = 63;
    EXPECT_EQ(cfg.effective_ordering(), OrderingMode::Score);
}

TEST(TrialSeeds, IndependentOfTrialCount) {
    const auto a = run_experiment(quick(5, 150, 2));
    const auto b = run_experiment(quick(5, 150, 3));
    for (std::size_t t = 0; t < 2; ++t) {
        EXPECT_EQ(a.trials[t].seed, b.trials[t].seed);
        EXPECT_EQ(a.trials[t].dataset_hash, b.trials[t].dataset_hash);
        EXPECT_EQ(a.trials[t].estimate, b.trials[t].estimate);
    }
    EXPECT_NE(a.trials[0].seed, a.trials[1].seed);
}

TEST(Run, SingleVariable) {
    const auto r = run_experiment(quick(1, 20, 1));
    ASSERT_TRUE(r.trials[0].ok);
    EXPECT_EQ(r.trials[0].metrics.shd, 0u);
    EXPECT_EQ(r.trials[0].metrics.sid, 0u);
}

TEST(Run, HugePenaltyGivesEmptyGraphs) {
    ExperimentConfig cfg = quick(5, 200, 4);
    cfg.sartre.lambda = 1e6;
    for (const auto& t : run_experiment(cfg).trials) {
        ASSERT_TRUE(t.ok);
        EXPECT_EQ(t.metrics.num_edges_est, 0u);
        EXPECT_EQ(t.metrics.shd, t.metrics.num_edges_true);
        EXPECT_EQ(t.metrics.recall, t.metrics.num_edges_true ? 0.0 : 1.0);
    }
}

TEST(Run, TimesAndMetricsAreSane) {
    ExperimentConfig cfg = quick(4, 150, 2);
    cfg.ordering = OrderingMode::Score;
    for (const auto& t : run_experiment(cfg).trials) {
        ASSERT_TRUE(t.ok);
        EXPECT_GE(t.order_seconds, 0.0);
        EXPECT_GE(t.prune_seconds, 0.0);
        EXPECT_GE(t.metrics.precision, 0.0);
        EXPECT_LE(t.metrics.precision, 1.0);
        EXPECT_LE(t.metrics.shd, 6u);
        EXPECT_TRUE(t.order.consistent_with(t.estimate));
    }
}

TEST(Run, WritesSelfConsistentResults) {
    ExperimentConfig cfg = quick(5, 150, 3);
    cfg.output_dir = scratch_dir("consistent").string();
    write_results(run_experiment(cfg));
    const std::filesystem::path dir(cfg.output_dir);
    for (const char* f : {"config.json", "trials.jsonl", "aggregate.json", "plot.csv", "timings.csv"}) {
        EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
    }
    EXPECT_TRUE(std::filesystem::exists(dir / "dags" / "trial_2_est.dag"));
    EXPECT_TRUE(verify_results(dir));
    const ExperimentConfig echo = load_config(dir / "config.json");
    EXPECT_EQ(to_json(echo).dump(), to_json(cfg).dump());

    Json agg = Json::parse(read_text_file(dir / "aggregate.json"));
    agg["metrics"]["shd"]["mean"] = agg["metrics"]["shd"]["mean"].get<double>() + 0.5;
    write_text_file(dir / "aggregate.json", agg.dump(2));
    EXPECT_FALSE(verify_results(dir));
}

TEST(Run, RegeneratesFromConfigEcho) {
    ExperimentConfig cfg = quick(5, 150, 2);
    cfg.workers = 1;
    cfg.output_dir = scratch_dir("regen").string();
    write_results(run_experiment(cfg));
    const auto first = snapshot(cfg.output_dir);
    ExperimentConfig echo = load_config(std::filesystem::path(cfg.output_dir) / "config.json");
    echo.workers = 3;
    std::filesystem::remove_all(cfg.output_dir);
    write_results(run_experiment(echo));
    EXPECT_EQ(snapshot(cfg.output_dir), first);
}

TEST(Summary, SkipsFailedTrials) {
    ExperimentResults r;
    r.trials.resize(3);
    r.trials[0].ok = true;
    r.trials[0].metrics.shd = 2;
    r.trials[1].ok = false;
    r.trials[1].metrics.shd = 100;
    r.trials[2].ok = true;
    r.trials[2].metrics.shd = 4;
    EXPECT_EQ(r.failed(), 1u);
    for (const auto& s : r.summarize()) {
        if (s.name == "shd") {
            EXPECT_DOUBLE_EQ(s.mean, 3.0);
            EXPECT_DOUBLE_EQ(s.std, 1.0);
        }
    }
}

TEST(Sweep, PairedDatasetsAndEndpoints) {
    ExperimentConfig cfg = quick(6, 200, 3);
    const auto rows = sweep_lambda(cfg, {0.1, 1e6});
    ASSERT_EQ(rows.size(), 6u);
    for (std::size_t t = 0; t < 3; ++t) {
        EXPECT_EQ(rows[t].lambda, 0.1);
        EXPECT_EQ(rows[t].trial, t);
        EXPECT_EQ(rows[3 + t].dataset_hash, rows[t].dataset_hash);
        EXPECT_EQ(rows[3 + t].metrics.num_edges_est, 0u);
    }
    const std::string csv = sweep_to_csv(rows);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "lambda,trial,dataset_hash,metric,value");
    EXPECT_NE(sweep_summary_csv(rows).find("num_edges_est,1000000,0,0"), std::string::npos);
    EXPECT_THROW(sweep_lambda(cfg, {}), ConfigError);
    EXPECT_THROW(sweep_lambda(cfg, {0.1, 0.1}), ConfigError);
    EXPECT_THROW(sweep_lambda(cfg, {-0.1}), ConfigError);
}

TEST(Sweep, LargerPenaltyKeepsFewerEdges) {
    ExperimentConfig cfg = quick(10, 1000, 10);
    const auto rows = sweep_lambda(cfg, {0.1, 0.15, 0.2, 0.25, 0.3});
    ASSERT_EQ(rows.size(), 50u);
    int ok = 0;
    for (std::size_t t = 0; t < 10; ++t) {
        ok += rows[40 + t].metrics.num_edges_est <= rows[t].metrics.num_edges_est;
    }
    EXPECT_GE(ok, 9);
}
