#pragma once

// Seeded experiment orchestration: generate ANM data over random DAGs, order,
// prune, score against the truth, and persist per-trial and aggregate results.

#include "sartre/graph.hpp"
#include "sartre/io.hpp"
#include "sartre/ordering.hpp"
#include "sartre/prune.hpp"
#include "sartre/synthgen.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sartre {

enum class GraphFamily { ErdosRenyi, ScaleFree };
enum class OrderingMode { Score, GroundTruth, File };

/// Orderings from data are skipped at and above this many variables.
inline constexpr std::size_t kHighDimThreshold = 64;

struct ExperimentConfig {
    GraphFamily graph = GraphFamily::ErdosRenyi;
    std::size_t d = 10;
    /// ER: expected edges = edge_factor * d (capped at d(d-1)/2).
    /// SF: edges per new node m = edge_factor (capped at d-1).
    std::size_t edge_factor = 1;
    std::size_t n = 1000;
    std::size_t trials = 10;
    Seed seed = 0;
    OrderingMode ordering = OrderingMode::Score;
    std::string order_file;
    double p_linear = 0.0;
    NoiseRange noise;
    double gp_bandwidth = 1.0;
    SartreConfig sartre;
    SteinConfig stein;
    std::string output_dir = "results";
    std::size_t workers = 1;

    /// Throws ConfigError naming the offending field.
    void validate() const;
    /// Ordering mode after the high-dimensional override.
    OrderingMode effective_ordering() const;
};

/// Strict parse: unknown keys and type mismatches raise ConfigError.
ExperimentConfig config_from_json(const Json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
Json to_json(const ExperimentConfig& cfg);

std::string to_string(GraphFamily g);
std::string to_string(OrderingMode m);
GraphFamily parse_graph_family(const std::string& s);
OrderingMode parse_ordering_mode(const std::string& s);
LambdaScale parse_lambda_scale(const std::string& s);

/// Deterministic inputs of one trial.
struct TrialData {
    std::size_t index = 0;
    Seed seed = 0;
    Dag truth;
    AnmSpec spec;
    Dataset data;
    TopologicalOrder order;
    double order_seconds = 0.0;
};

Seed trial_seed(Seed master, std::size_t trial);

/// Generates the data of trial `t` and obtains its order.
TrialData prepare_trial(const ExperimentConfig& cfg, std::size_t t);

/// Configuration handed to the pruner for a trial.
SartreConfig trial_sartre_config(const ExperimentConfig& cfg, Seed trial_seed);

struct TrialResult {
    std::size_t trial = 0;
    Seed seed = 0;
    bool ok = false;
    std::string error;
    std::string dataset_hash;
    GraphMetrics metrics;
    /// SHD of the unpruned order-induced DAG.
    std::size_t full_dag_shd = 0;
    double order_seconds = 0.0;
    double prune_seconds = 0.0;
    Dag truth;
    Dag estimate;
    TopologicalOrder order;
};

struct MetricSummary {
    std::string name;
    double mean = 0.0;
    double std = 0.0;
};

struct ExperimentResults {
    ExperimentConfig config;
    std::vector<TrialResult> trials;

    std::size_t failed() const;
    /// Mean and population standard deviation over successful trials.
    std::vector<MetricSummary> summarize() const;
};

ExperimentResults run_experiment(const ExperimentConfig& cfg);

/// Writes config.json, trials.jsonl, aggregate.json, plot.csv, timings.csv
/// and per-trial DAG files under cfg.output_dir. All but timings.csv are
/// deterministic functions of the config.
void write_results(const ExperimentResults& results);

/// Recomputes aggregate.json from trials.jsonl in `dir`; true iff they agree.
bool verify_results(const std::filesystem::path& dir);

struct SweepRow {
    double lambda = 0.0;
    std::size_t trial = 0;
    std::string dataset_hash;
    GraphMetrics metrics;
};

/// Every lambda reuses each trial's dataset and order.
std::vector<SweepRow> sweep_lambda(const ExperimentConfig& cfg, const std::vector<double>& lambdas);

/// Long format: lambda,trial,dataset_hash,metric,value
std::string sweep_to_csv(const std::vector<SweepRow>& rows);
/// Tidy summary: metric,lambda,mean,std
std::string sweep_summary_csv(const std::vector<SweepRow>& rows);

}  // namespace sartre
