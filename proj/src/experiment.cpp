#include "sartre/experiment.hpp"

#include "sartre/error.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <sstream>

namespace sartre {

// ---------------------------------------------------------------------------
// Enumerations

std::string to_string(GraphFamily g) { return g == GraphFamily::ErdosRenyi ? "er" : "sf"; }

std::string to_string(OrderingMode m) {
    switch (m) {
        case OrderingMode::Score: return "score";
        case OrderingMode::GroundTruth: return "ground-truth";
        case OrderingMode::File: return "file";
    }
    return "score";
}

GraphFamily parse_graph_family(const std::string& s) {
    if (s == "er") return GraphFamily::ErdosRenyi;
    if (s == "sf") return GraphFamily::ScaleFree;
    throw ConfigError("graph: expected 'er' or 'sf', got '" + s + "'");
}

OrderingMode parse_ordering_mode(const std::string& s) {
    if (s == "score") return OrderingMode::Score;
    if (s == "ground-truth") return OrderingMode::GroundTruth;
    if (s == "file") return OrderingMode::File;
    throw ConfigError("ordering: expected 'score', 'ground-truth' or 'file', got '" + s + "'");
}

LambdaScale parse_lambda_scale(const std::string& s) {
    if (s == "mean") return LambdaScale::Mean;
    if (s == "sum") return LambdaScale::Sum;
    throw ConfigError("lambda_scale: expected 'mean' or 'sum', got '" + s + "'");
}

// ---------------------------------------------------------------------------
// Config

void ExperimentConfig::validate() const {
    if (d == 0) throw ConfigError("d: must be at least 1");
    if (n < 2) throw ConfigError("n: must be at least 2");
    if (trials == 0) throw ConfigError("trials: must be at least 1");
    if (edge_factor == 0) throw ConfigError("edge_factor: must be at least 1");
    if (!(p_linear >= 0.0 && p_linear <= 1.0)) throw ConfigError("p_linear: must lie in [0, 1]");
    if (!(noise.lo > 0.0) || noise.hi < noise.lo) throw ConfigError("noise: need 0 < noise_lo <= noise_hi");
    if (!(gp_bandwidth > 0.0)) throw ConfigError("gp_bandwidth: must be positive");
    if (workers == 0) throw ConfigError("workers: must be at least 1");
    if (ordering == OrderingMode::File && order_file.empty()) {
        throw ConfigError("order_file: required when ordering is 'file'");
    }
    try {
        sartre.validate();
        stein.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("sartre/stein: ") + e.what());
    }
}

OrderingMode ExperimentConfig::effective_ordering() const {
    if (ordering == OrderingMode::Score && d >= kHighDimThreshold) return OrderingMode::GroundTruth;
    return ordering;
}

namespace {

void reject_unknown(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

template <typename T>
void read_field(const Json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    const Json& v = j.at(key);
    try {
        if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, Seed>) {
            if (!v.is_number_unsigned()) throw ConfigError("");
        } else if constexpr (std::is_same_v<T, double>) {
            if (!v.is_number()) throw ConfigError("");
        } else if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw ConfigError("");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw ConfigError("");
        }
        out = v.get<T>();
    } catch (const std::exception&) {
        throw ConfigError(where + key + ": wrong type (" + std::string(v.type_name()) + ")");
    }
}

}  // namespace

ExperimentConfig config_from_json(const Json& j) {
    ExperimentConfig cfg;
    reject_unknown(j,
                   {"graph", "d", "edge_factor", "n", "trials", "seed", "ordering", "order_file", "p_linear",
                    "noise_lo", "noise_hi", "gp_bandwidth", "sartre", "stein", "output_dir", "workers"},
                   "config");
    std::string graph = to_string(cfg.graph);
    std::string ordering = to_string(cfg.ordering);
    read_field(j, "graph", graph, "");
    read_field(j, "d", cfg.d, "");
    read_field(j, "edge_factor", cfg.edge_factor, "");
    read_field(j, "n", cfg.n, "");
    read_field(j, "trials", cfg.trials, "");
    read_field(j, "seed", cfg.seed, "");
    read_field(j, "ordering", ordering, "");
    read_field(j, "order_file", cfg.order_file, "");
    read_field(j, "p_linear", cfg.p_linear, "");
    read_field(j, "noise_lo", cfg.noise.lo, "");
    read_field(j, "noise_hi", cfg.noise.hi, "");
    read_field(j, "gp_bandwidth", cfg.gp_bandwidth, "");
    read_field(j, "output_dir", cfg.output_dir, "");
    read_field(j, "workers", cfg.workers, "");
    cfg.graph = parse_graph_family(graph);
    cfg.ordering = parse_ordering_mode(ordering);

    if (j.contains("sartre")) {
        const Json& s = j.at("sartre");
        reject_unknown(s, {"lambda", "lambda_scale", "num_trees", "max_leaves", "min_samples_leaf", "tol", "max_iter"},
                       "sartre");
        std::string scale = cfg.sartre.scale == LambdaScale::Mean ? "mean" : "sum";
        read_field(s, "lambda", cfg.sartre.lambda, "sartre.");
        read_field(s, "lambda_scale", scale, "sartre.");
        read_field(s, "num_trees", cfg.sartre.trees.num_trees, "sartre.");
        read_field(s, "max_leaves", cfg.sartre.trees.max_leaves, "sartre.");
        read_field(s, "min_samples_leaf", cfg.sartre.trees.min_samples_leaf, "sartre.");
        read_field(s, "tol", cfg.sartre.solver.tol, "sartre.");
        read_field(s, "max_iter", cfg.sartre.solver.max_iter, "sartre.");
        cfg.sartre.scale = parse_lambda_scale(scale);
    }
    if (j.contains("stein")) {
        const Json& s = j.at("stein");
        reject_unknown(s, {"bandwidth", "ridge", "recompute_each_round", "max_samples"}, "stein");
        if (s.contains("bandwidth") && !s.at("bandwidth").is_null()) {
            double bw = 0.0;
            read_field(s, "bandwidth", bw, "stein.");
            cfg.stein.bandwidth = bw;
        }
        read_field(s, "ridge", cfg.stein.ridge, "stein.");
        read_field(s, "recompute_each_round", cfg.stein.recompute_each_round, "stein.");
        read_field(s, "max_samples", cfg.stein.max_samples, "stein.");
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

Json to_json(const ExperimentConfig& cfg) {
    Json j;
    j["graph"] = to_string(cfg.graph);
    j["d"] = cfg.d;
    j["edge_factor"] = cfg.edge_factor;
    j["n"] = cfg.n;
    j["trials"] = cfg.trials;
    j["seed"] = cfg.seed;
    j["ordering"] = to_string(cfg.ordering);
    j["order_file"] = cfg.order_file;
    j["p_linear"] = cfg.p_linear;
    j["noise_lo"] = cfg.noise.lo;
    j["noise_hi"] = cfg.noise.hi;
    j["gp_bandwidth"] = cfg.gp_bandwidth;
    Json s;
    s["lambda"] = cfg.sartre.lambda;
    s["lambda_scale"] = cfg.sartre.scale == LambdaScale::Mean ? "mean" : "sum";
    s["num_trees"] = cfg.sartre.trees.num_trees;
    s["max_leaves"] = cfg.sartre.trees.max_leaves;
    s["min_samples_leaf"] = cfg.sartre.trees.min_samples_leaf;
    s["tol"] = cfg.sartre.solver.tol;
    s["max_iter"] = cfg.sartre.solver.max_iter;
    j["sartre"] = std::move(s);
    Json st;
    st["bandwidth"] = cfg.stein.bandwidth ? Json(*cfg.stein.bandwidth) : Json(nullptr);
    st["ridge"] = cfg.stein.ridge;
    st["recompute_each_round"] = cfg.stein.recompute_each_round;
    st["max_samples"] = cfg.stein.max_samples;
    j["stein"] = std::move(st);
    j["output_dir"] = cfg.output_dir;
    // Worker count is deliberately absent: it never changes results.
    return j;
}

// ---------------------------------------------------------------------------
// Trials

Seed trial_seed(Seed master, std::size_t trial) { return derive_seed(master, trial); }

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

Dag generate_graph(const ExperimentConfig& cfg, Seed seed) {
    if (cfg.graph == GraphFamily::ErdosRenyi) {
        const double pairs = 0.5 * static_cast<double>(cfg.d) * static_cast<double>(cfg.d - 1);
        const double expected = std::min(pairs, static_cast<double>(cfg.edge_factor * cfg.d));
        return gen_erdos_renyi(cfg.d, expected, seed);
    }
    const std::size_t m = std::max<std::size_t>(1, std::min(cfg.edge_factor, cfg.d > 1 ? cfg.d - 1 : 1));
    return gen_scale_free(cfg.d, m, seed);
}

}  // namespace

SartreConfig trial_sartre_config(const ExperimentConfig& cfg, Seed tseed) {
    SartreConfig s = cfg.sartre;
    s.trees.seed = derive_seed(tseed, stream::kTrees);
    s.workers = 1;
    return s;
}

TrialData prepare_trial(const ExperimentConfig& cfg, std::size_t t) {
    TrialData trial;
    trial.index = t;
    trial.seed = trial_seed(cfg.seed, t);
    trial.truth = generate_graph(cfg, derive_seed(trial.seed, stream::kGraph));
    trial.spec = make_mixed_spec(trial.truth, cfg.p_linear, derive_seed(trial.seed, stream::kSpec), cfg.noise);
    trial.spec.gp_bandwidth = cfg.gp_bandwidth;
    trial.data = sample_anm(trial.spec, cfg.n);

    const auto start = Clock::now();
    switch (cfg.effective_ordering()) {
        case OrderingMode::GroundTruth:
            trial.order = topological_sort(trial.truth);
            break;
        case OrderingMode::File:
            trial.order = read_order(std::filesystem::path(cfg.order_file));
            if (trial.order.size() != cfg.d) throw ConfigError("order_file: order length does not match d");
            break;
        case OrderingMode::Score: {
            SteinConfig stein = cfg.stein;
            stein.subsample_seed = derive_seed(trial.seed, stream::kSubsample);
            trial.order = estimate_order(trial.data, stein);
            break;
        }
    }
    trial.order_seconds = seconds_since(start);
    return trial;
}

namespace {

TrialResult run_trial(const ExperimentConfig& cfg, std::size_t t) {
    TrialResult result;
    result.trial = t;
    result.seed = trial_seed(cfg.seed, t);
    try {
        TrialData trial = prepare_trial(cfg, t);
        result.dataset_hash = dataset_hash(trial.data);
        result.order_seconds = trial.order_seconds;
        const auto start = Clock::now();
        result.estimate = sartre_prune(trial.data, trial.order, trial_sartre_config(cfg, trial.seed));
        result.prune_seconds = seconds_since(start);
        result.metrics = evaluate(trial.truth, result.estimate);
        result.full_dag_shd = shd(trial.truth, full_dag_from_order(trial.order));
        result.truth = std::move(trial.truth);
        result.order = std::move(trial.order);
        result.ok = true;
    } catch (const ConfigError&) {
        throw;
    } catch (const IoError&) {
        throw;
    } catch (const Error& e) {
        result.ok = false;
        result.error = e.what();
    }
    return result;
}

struct MetricField {
    const char* name;
    double (*get)(const TrialResult&);
};

constexpr MetricField kMetrics[] = {
    {"shd", [](const TrialResult& r) { return static_cast<double>(r.metrics.shd); }},
    {"sid", [](const TrialResult& r) { return static_cast<double>(r.metrics.sid); }},
    {"precision", [](const TrialResult& r) { return r.metrics.precision; }},
    {"recall", [](const TrialResult& r) { return r.metrics.recall; }},
    {"f1", [](const TrialResult& r) { return r.metrics.f1; }},
    {"num_edges_true", [](const TrialResult& r) { return static_cast<double>(r.metrics.num_edges_true); }},
    {"num_edges_est", [](const TrialResult& r) { return static_cast<double>(r.metrics.num_edges_est); }},
    {"full_dag_shd", [](const TrialResult& r) { return static_cast<double>(r.full_dag_shd); }},
};

MetricSummary summarize_values(const std::string& name, const std::vector<double>& values) {
    MetricSummary s{name, 0.0, 0.0};
    if (values.empty()) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size()));
    return s;
}

Json trial_to_json(const TrialResult& r) {
    Json j;
    j["trial"] = r.trial;
    j["seed"] = r.seed;
    j["ok"] = r.ok;
    if (!r.ok) {
        j["error"] = r.error;
        return j;
    }
    j["dataset_hash"] = r.dataset_hash;
    j["metrics"] = to_json(r.metrics);
    j["full_dag_shd"] = r.full_dag_shd;
    std::vector<std::size_t> order;
    for (Var v : r.order) order.push_back(v + 1);
    j["order"] = order;
    return j;
}

Json conventions() {
    Json j;
    j["shd_reversal_cost"] = 1;
    j["precision_when_estimate_empty"] = 1.0;
    j["recall_when_truth_empty"] = 1.0;
    j["std"] = "population";
    j["indices"] = "1-based";
    return j;
}

Json aggregate_json(const ExperimentConfig& cfg, std::size_t trials, std::size_t failed,
                    const std::vector<MetricSummary>& summary) {
    Json j;
    j["trials"] = trials;
    j["failed"] = failed;
    j["ordering_effective"] = to_string(cfg.effective_ordering());
    j["ordering_subsampled"] =
        cfg.effective_ordering() == OrderingMode::Score && ordering_subsamples(cfg.n, cfg.stein);
    Json metrics;
    for (const auto& s : summary) {
        Json m;
        m["mean"] = s.mean;
        m["std"] = s.std;
        metrics[s.name] = std::move(m);
    }
    j["metrics"] = std::move(metrics);
    j["conventions"] = conventions();
    return j;
}

std::string trial_dag_name(std::size_t t, const char* kind) {
    return "trial_" + std::to_string(t) + "_" + kind + ".dag";
}

}  // namespace

std::size_t ExperimentResults::failed() const {
    return static_cast<std::size_t>(std::count_if(trials.begin(), trials.end(), [](const TrialResult& r) { return !r.ok; }));
}

std::vector<MetricSummary> ExperimentResults::summarize() const {
    std::vector<MetricSummary> out;
    for (const auto& field : kMetrics) {
        std::vector<double> values;
        for (const auto& r : trials) {
            if (r.ok) values.push_back(field.get(r));
        }
        out.push_back(summarize_values(field.name, values));
    }
    return out;
}

ExperimentResults run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentResults results;
    results.config = cfg;
    results.trials.resize(cfg.trials);
    detail::parallel_for(cfg.trials, cfg.workers, [&](std::size_t t) { results.trials[t] = run_trial(cfg, t); });
    return results;
}

void write_results(const ExperimentResults& results) {
    const std::filesystem::path dir(results.config.output_dir);
    const auto& cfg = results.config;
    write_text_file(dir / "config.json", to_json(cfg).dump(2) + "\n");

    std::string lines;
    std::ostringstream timings;
    timings << "trial,order_seconds,prune_seconds\n";
    for (const auto& r : results.trials) {
        lines += trial_to_json(r).dump() + "\n";
        timings << r.trial << ',' << format_double(r.order_seconds) << ',' << format_double(r.prune_seconds) << '\n';
        if (r.ok) {
            write_dag(dir / "dags" / trial_dag_name(r.trial, "truth"), r.truth);
            write_dag(dir / "dags" / trial_dag_name(r.trial, "est"), r.estimate);
        }
    }
    write_text_file(dir / "trials.jsonl", lines);
    write_text_file(dir / "timings.csv", timings.str());

    const auto summary = results.summarize();
    write_text_file(dir / "aggregate.json",
                    aggregate_json(cfg, results.trials.size(), results.failed(), summary).dump(2) + "\n");

    std::ostringstream plot;
    plot << "metric,d,n,lambda,mean,std\n";
    for (const auto& s : summary) {
        plot << s.name << ',' << cfg.d << ',' << cfg.n << ',' << format_double(cfg.sartre.lambda) << ','
             << format_double(s.mean) << ',' << format_double(s.std) << '\n';
    }
    write_text_file(dir / "plot.csv", plot.str());
}

bool verify_results(const std::filesystem::path& dir) {
    const Json aggregate = Json::parse(read_text_file(dir / "aggregate.json"));
    std::istringstream in(read_text_file(dir / "trials.jsonl"));
    std::vector<TrialResult> trials;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const Json j = Json::parse(line);
        TrialResult r;
        r.trial = j.at("trial").get<std::size_t>();
        r.ok = j.at("ok").get<bool>();
        if (r.ok) {
            const Json& m = j.at("metrics");
            r.metrics.shd = m.at("shd").get<std::size_t>();
            r.metrics.sid = m.at("sid").get<std::size_t>();
            r.metrics.precision = m.at("precision").get<double>();
            r.metrics.recall = m.at("recall").get<double>();
            r.metrics.f1 = m.at("f1").get<double>();
            r.metrics.num_edges_true = m.at("num_edges_true").get<std::size_t>();
            r.metrics.num_edges_est = m.at("num_edges_est").get<std::size_t>();
            r.full_dag_shd = j.at("full_dag_shd").get<std::size_t>();
        }
        trials.push_back(std::move(r));
    }
    ExperimentResults recomputed;
    recomputed.trials = std::move(trials);
    if (aggregate.at("trials").get<std::size_t>() != recomputed.trials.size()) return false;
    if (aggregate.at("failed").get<std::size_t>() != recomputed.failed()) return false;
    for (const auto& s : recomputed.summarize()) {
        const Json& m = aggregate.at("metrics").at(s.name);
        const double mean = m.at("mean").get<double>();
        const double sd = m.at("std").get<double>();
        if (std::abs(mean - s.mean) > 1e-12 * std::max(1.0, std::abs(s.mean))) return false;
        if (std::abs(sd - s.std) > 1e-12 * std::max(1.0, std::abs(s.std))) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Lambda sweep

std::vector<SweepRow> sweep_lambda(const ExperimentConfig& cfg, const std::vector<double>& lambdas) {
    cfg.validate();
    if (lambdas.empty()) throw ConfigError("lambdas: need at least one value");
    for (double l : lambdas) {
        if (!(l >= 0.0) || !std::isfinite(l)) throw ConfigError("lambdas: values must be non-negative");
    }
    if (std::set<double>(lambdas.begin(), lambdas.end()).size() != lambdas.size()) {
        throw ConfigError("lambdas: duplicate value");
    }
    std::vector<std::vector<SweepRow>> per_trial(cfg.trials);
    detail::parallel_for(cfg.trials, cfg.workers, [&](std::size_t t) {
        TrialData trial;
        try {
            trial = prepare_trial(cfg, t);
        } catch (const ConfigError&) {
            throw;
        } catch (const Error&) {
            return;  // failed trials contribute no rows
        }
        const std::string hash = dataset_hash(trial.data);
        for (double lambda : lambdas) {
            SartreConfig s = trial_sartre_config(cfg, trial.seed);
            s.lambda = lambda;
            try {
                const Dag est = sartre_prune(trial.data, trial.order, s);
                per_trial[t].push_back({lambda, t, hash, evaluate(trial.truth, est)});
            } catch (const ConfigError&) {
                throw;
            } catch (const Error&) {
            }
        }
    });
    std::vector<SweepRow> rows;
    for (std::size_t li = 0; li < lambdas.size(); ++li) {
        for (const auto& trial_rows : per_trial) {
            for (const auto& row : trial_rows) {
                if (row.lambda == lambdas[li]) rows.push_back(row);
            }
        }
    }
    return rows;
}

namespace {

struct SweepMetric {
    const char* name;
    double (*get)(const GraphMetrics&);
};

constexpr SweepMetric kSweepMetrics[] = {
    {"shd", [](const GraphMetrics& m) { return static_cast<double>(m.shd); }},
    {"sid", [](const GraphMetrics& m) { return static_cast<double>(m.sid); }},
    {"precision", [](const GraphMetrics& m) { return m.precision; }},
    {"recall", [](const GraphMetrics& m) { return m.recall; }},
    {"f1", [](const GraphMetrics& m) { return m.f1; }},
    {"num_edges_est", [](const GraphMetrics& m) { return static_cast<double>(m.num_edges_est); }},
};

}  // namespace

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "lambda,trial,dataset_hash,metric,value\n";
    for (const auto& row : rows) {
        for (const auto& m : kSweepMetrics) {
            out << format_double(row.lambda) << ',' << row.trial << ',' << row.dataset_hash << ',' << m.name << ','
                << format_double(m.get(row.metrics)) << '\n';
        }
    }
    return out.str();
}

std::string sweep_summary_csv(const std::vector<SweepRow>& rows) {
    std::vector<double> lambdas;
    for (const auto& row : rows) {
        if (std::find(lambdas.begin(), lambdas.end(), row.lambda) == lambdas.end()) lambdas.push_back(row.lambda);
    }
    std::ostringstream out;
    out << "metric,lambda,mean,std\n";
    for (const auto& m : kSweepMetrics) {
        for (double lambda : lambdas) {
            std::vector<double> values;
            for (const auto& row : rows) {
                if (row.lambda == lambda) values.push_back(m.get(row.metrics));
            }
            const auto s = summarize_values(m.name, values);
            out << m.name << ',' << format_double(lambda) << ',' << format_double(s.mean) << ','
                << format_double(s.std) << '\n';
        }
    }
    return out.str();
}

}  // namespace sartre
