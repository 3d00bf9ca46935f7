// sartre: command-line front end.
//
// Exit codes: 0 ok, 2 configuration/usage error, 3 data error (parse,
// dimension, I/O), 4 numerical failure.

#include "sartre/error.hpp"
#include "sartre/experiment.hpp"
#include "sartre/io.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

using namespace sartre;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

constexpr const char* kOutputDirEnv = "SARTRE_OUTPUT_DIR";

std::string default_output_dir() {
    const char* env = std::getenv(kOutputDirEnv);
    return env && *env ? std::string(env) : std::string("results");
}

// Command-line flags that overwrite fields of a JSON config before it goes
// through the strict parser, so flags get the same validation as files.
class Overlay {
public:
    template <typename T>
    void add(CLI::App* app, const std::string& flag, std::vector<std::string> path, const std::string& help) {
        auto value = std::make_shared<T>();
        CLI::Option* opt = app->add_option(flag, *value, help);
        apply_.push_back([value, opt, path](Json& j) {
            if (opt->count() == 0) return;
            Json* at = &j;
            for (std::size_t k = 0; k + 1 < path.size(); ++k) at = &(*at)[path[k]];
            (*at)[path.back()] = *value;
        });
    }

    void add_switch(CLI::App* app, const std::string& flag, std::vector<std::string> path, bool value,
                    const std::string& help) {
        CLI::Option* opt = app->add_flag(flag, help);
        apply_.push_back([opt, path, value](Json& j) {
            if (opt->count() == 0) return;
            Json* at = &j;
            for (std::size_t k = 0; k + 1 < path.size(); ++k) at = &(*at)[path[k]];
            (*at)[path.back()] = value;
        });
    }

    void apply(Json& j) const {
        for (const auto& f : apply_) f(j);
    }

private:
    std::vector<std::function<void(Json&)>> apply_;
};

struct ExperimentArgs {
    std::string config_path;
    Overlay overlay;
};

void add_experiment_flags(CLI::App* app, ExperimentArgs& args) {
    app->add_option("--config", args.config_path, "JSON config file; flags override its fields")
        ->check(CLI::ExistingFile);
    auto& o = args.overlay;
    o.add<std::string>(app, "--graph", {"graph"}, "graph family: er | sf");
    o.add<std::size_t>(app, "-d,--d", {"d"}, "number of variables");
    o.add<std::size_t>(app, "--edge-factor", {"edge_factor"}, "ER: expected edges per node; SF: edges per new node");
    o.add<std::size_t>(app, "-n,--n", {"n"}, "samples per dataset");
    o.add<std::size_t>(app, "--trials", {"trials"}, "number of trials");
    o.add<Seed>(app, "--seed", {"seed"}, "master seed");
    o.add<std::string>(app, "--ordering", {"ordering"}, "score | ground-truth | file");
    o.add<std::string>(app, "--order-file", {"order_file"}, "order file for --ordering file");
    o.add<double>(app, "--p-linear", {"p_linear"}, "probability that a node's link is linear");
    o.add<double>(app, "--noise-lo", {"noise_lo"}, "lower bound of the noise standard deviation");
    o.add<double>(app, "--noise-hi", {"noise_hi"}, "upper bound of the noise standard deviation");
    o.add<double>(app, "--gp-bandwidth", {"gp_bandwidth"}, "RBF bandwidth of the GP link functions");
    o.add<double>(app, "--lambda", {"sartre", "lambda"}, "group lasso penalty");
    o.add<std::string>(app, "--lambda-scale", {"sartre", "lambda_scale"}, "mean | sum");
    o.add<std::size_t>(app, "--num-trees", {"sartre", "num_trees"}, "trees per variable");
    o.add<std::size_t>(app, "--max-leaves", {"sartre", "max_leaves"}, "leaves per tree");
    o.add<std::size_t>(app, "--min-samples-leaf", {"sartre", "min_samples_leaf"}, "samples per leaf");
    o.add<double>(app, "--tol", {"sartre", "tol"}, "solver tolerance");
    o.add<std::size_t>(app, "--max-iter", {"sartre", "max_iter"}, "solver sweep limit");
    o.add<double>(app, "--bandwidth", {"stein", "bandwidth"}, "Stein kernel bandwidth (default: median heuristic)");
    o.add<double>(app, "--ridge", {"stein", "ridge"}, "Stein kernel ridge");
    o.add_switch(app, "--no-recompute", {"stein", "recompute_each_round"}, false,
                 "rank leaves once instead of re-estimating after each removal");
    o.add<std::size_t>(app, "--max-samples", {"stein", "max_samples"}, "subsample size for ordering");
    o.add<std::string>(app, "-o,--out", {"output_dir"}, std::string("output directory (default: $") + kOutputDirEnv +
                                                           " or ./results)");
    o.add<std::size_t>(app, "-j,--workers", {"workers"}, "worker threads");
}

ExperimentConfig resolve_config(const ExperimentArgs& args) {
    Json j = Json::object();
    if (!args.config_path.empty()) {
        try {
            j = Json::parse(read_text_file(args.config_path));
        } catch (const Json::parse_error& e) {
            throw ConfigError(args.config_path + ": " + e.what());
        }
        if (!j.is_object()) throw ConfigError(args.config_path + ": expected a JSON object");
    }
    if (!j.contains("output_dir")) j["output_dir"] = default_output_dir();
    args.overlay.apply(j);
    return config_from_json(j);
}

void write_or_print(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
    } else {
        write_text_file(path, text);
    }
}

template <typename F>
std::string render(F&& writer) {
    std::ostringstream out;
    writer(out);
    return out.str();
}

template <typename F>
void as_config_error(F&& check) {
    try {
        check();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
}

int fail(int code, const std::string& what) {
    std::cerr << "sartre: " << what << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Order-based causal discovery with tree-embedding group lasso pruning"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate one dataset with its true DAG and order");
    ExperimentArgs gen_args;
    std::size_t gen_trial = 0;
    add_experiment_flags(gen, gen_args);
    gen->add_option("--trial", gen_trial, "trial index whose seed is used");

    // order
    auto* order = app.add_subcommand("order", "estimate a topological order from data");
    std::string order_data, order_out = "-";
    SteinConfig stein;
    double stein_bw = 0.0;
    Seed order_seed = 0;
    order->add_option("--data", order_data, "dataset CSV")->required()->check(CLI::ExistingFile);
    order->add_option("-o,--out", order_out, "order file (default: stdout)");
    auto* bw_opt = order->add_option("--bandwidth", stein_bw, "kernel bandwidth (default: median heuristic)");
    order->add_option("--ridge", stein.ridge, "kernel ridge");
    order->add_option("--max-samples", stein.max_samples, "subsample size");
    order->add_option("--seed", order_seed, "subsampling seed");
    bool no_recompute = false;
    order->add_flag("--no-recompute", no_recompute, "rank leaves once");

    // prune
    auto* prune = app.add_subcommand("prune", "prune the full DAG of an order");
    std::string prune_data, prune_order, prune_out = "-", prune_model;
    SartreConfig sartre;
    std::string prune_scale = "mean";
    Seed prune_seed = 0;
    prune->add_option("--data", prune_data, "dataset CSV")->required()->check(CLI::ExistingFile);
    prune->add_option("--order", prune_order, "order file")->required()->check(CLI::ExistingFile);
    prune->add_option("-o,--out", prune_out, "estimated DAG file (default: stdout)");
    prune->add_option("--model", prune_model, "also write the fitted model as JSON");
    prune->add_option("--lambda", sartre.lambda, "group lasso penalty");
    prune->add_option("--lambda-scale", prune_scale, "mean | sum");
    prune->add_option("--num-trees", sartre.trees.num_trees, "trees per variable");
    prune->add_option("--max-leaves", sartre.trees.max_leaves, "leaves per tree");
    prune->add_option("--min-samples-leaf", sartre.trees.min_samples_leaf, "samples per leaf");
    prune->add_option("--tol", sartre.solver.tol, "solver tolerance");
    prune->add_option("--max-iter", sartre.solver.max_iter, "solver sweep limit");
    prune->add_option("--seed", prune_seed, "tree seed");
    prune->add_option("-j,--workers", sartre.workers, "worker threads");

    // run
    auto* run = app.add_subcommand("run", "run seeded trials and write results");
    ExperimentArgs run_args;
    add_experiment_flags(run, run_args);

    // sweep-lambda
    auto* sweep = app.add_subcommand("sweep-lambda", "evaluate several penalties on shared datasets");
    ExperimentArgs sweep_args;
    std::vector<double> lambdas{0.1, 0.15, 0.2, 0.25, 0.3};
    add_experiment_flags(sweep, sweep_args);
    sweep->add_option("--lambdas", lambdas, "penalty grid")->delimiter(',');

    // eval
    auto* eval = app.add_subcommand("eval", "compare an estimated DAG to the truth");
    std::string truth_path, est_path;
    eval->add_option("truth", truth_path, "true DAG file")->required()->check(CLI::ExistingFile);
    eval->add_option("estimate", est_path, "estimated DAG file")->required()->check(CLI::ExistingFile);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "load a CSV, optionally bootstrap its rows, and rewrite it");
    std::string ingest_in, ingest_out = "-";
    std::size_t bootstrap = 0;
    Seed ingest_seed = 0;
    ingest->add_option("input", ingest_in, "CSV with a header row")->required()->check(CLI::ExistingFile);
    ingest->add_option("-o,--out", ingest_out, "output CSV (default: stdout)");
    ingest->add_option("--bootstrap", bootstrap, "resample this many rows with replacement");
    ingest->add_option("--seed", ingest_seed, "bootstrap seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (gen->parsed()) {
            const ExperimentConfig cfg = resolve_config(gen_args);
            const TrialData trial = prepare_trial(cfg, gen_trial);
            const std::filesystem::path dir(cfg.output_dir);
            write_dataset_csv(dir / "data.csv", trial.data);
            write_dag(dir / "truth.dag", trial.truth);
            write_order(dir / "truth.order", topological_sort(trial.truth));
            std::cerr << "wrote " << (dir / "data.csv").string() << ", truth.dag, truth.order\n";
        } else if (order->parsed()) {
            if (bw_opt->count()) stein.bandwidth = stein_bw;
            stein.recompute_each_round = !no_recompute;
            stein.subsample_seed = order_seed;
            as_config_error([&] { stein.validate(); });
            const Dataset data = read_dataset_csv(order_data);
            const TopologicalOrder est = estimate_order(data, stein);
            write_or_print(order_out, render([&](std::ostream& out) { write_order(out, est); }));
        } else if (prune->parsed()) {
            sartre.scale = parse_lambda_scale(prune_scale);
            sartre.trees.seed = prune_seed;
            as_config_error([&] { sartre.validate(); });
            const Dataset data = read_dataset_csv(prune_data);
            const TopologicalOrder ord = read_order(std::filesystem::path(prune_order));
            const SartreModel model = fit_sartre(data, ord, sartre);
            write_or_print(prune_out, render([&](std::ostream& out) { write_dag(out, model.graph); }));
            if (!prune_model.empty()) write_text_file(prune_model, model_to_json(model).dump(2) + "\n");
        } else if (run->parsed()) {
            const ExperimentConfig cfg = resolve_config(run_args);
            const ExperimentResults results = run_experiment(cfg);
            write_results(results);
            for (const auto& s : results.summarize()) {
                std::cout << s.name << ' ' << format_double(s.mean) << " +- " << format_double(s.std) << '\n';
            }
            std::cerr << results.trials.size() << " trials, " << results.failed() << " failed; results in "
                      << cfg.output_dir << '\n';
        } else if (sweep->parsed()) {
            const ExperimentConfig cfg = resolve_config(sweep_args);
            const auto rows = sweep_lambda(cfg, lambdas);
            const std::filesystem::path dir(cfg.output_dir);
            write_text_file(dir / "config.json", to_json(cfg).dump(2) + "\n");
            write_text_file(dir / "sweep.csv", sweep_to_csv(rows));
            write_text_file(dir / "sweep_summary.csv", sweep_summary_csv(rows));
            std::cerr << rows.size() << " rows; results in " << cfg.output_dir << '\n';
        } else if (eval->parsed()) {
            const Dag truth = read_dag(std::filesystem::path(truth_path));
            const Dag est = read_dag(std::filesystem::path(est_path));
            std::cout << to_json(evaluate(truth, est)).dump(2) << '\n';
        } else if (ingest->parsed()) {
            CsvTable table = read_csv_table(std::filesystem::path(ingest_in));
            if (bootstrap > 0) table.data = bootstrap_rows(table.data, bootstrap, ingest_seed);
            write_or_print(ingest_out, render([&](std::ostream& out) { write_csv_table(out, table); }));
            std::cerr << "n=" << table.data.n() << " d=" << table.data.d() << '\n';
        }
    } catch (const ConfigError& e) {
        return fail(kExitConfig, e.what());
    } catch (const NumericalFailure& e) {
        return fail(kExitNumerical, e.what());
    } catch (const Error& e) {
        return fail(kExitData, e.what());
    } catch (const Json::exception& e) {
        return fail(kExitData, e.what());
    }
    return kExitOk;
}
