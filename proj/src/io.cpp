#include "sartre/io.hpp"

#include "sartre/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

namespace sartre {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t begin = 0;
    while (true) {
        const auto at = line.find(sep, begin);
        out.push_back(trim(line.substr(begin, at == std::string_view::npos ? std::string_view::npos : at - begin)));
        if (at == std::string_view::npos) break;
        begin = at + 1;
    }
    return out;
}

bool parse_double(std::string_view s, double& out) {
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_index(std::string_view s, std::size_t& out) {
    if (s.empty()) return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    return in;
}

Json bound(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

void write_rows(std::ostream& out, const Dataset& data) {
    const auto& x = data.values();
    for (Eigen::Index m = 0; m < x.rows(); ++m) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) out << (j ? "," : "") << format_double(x(m, j));
        out << '\n';
    }
}

}  // namespace

void write_dataset_csv(std::ostream& out, const Dataset& data) {
    for (std::size_t j = 0; j < data.d(); ++j) out << (j ? "," : "") << 'x' << (j + 1);
    out << '\n';
    write_rows(out, data);
}

void write_csv_table(std::ostream& out, const CsvTable& table) {
    if (table.names.size() != table.data.d()) throw DimensionMismatch("header and data widths differ");
    for (std::size_t j = 0; j < table.names.size(); ++j) out << (j ? "," : "") << table.names[j];
    out << '\n';
    write_rows(out, table.data);
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data) {
    std::ostringstream s;
    write_dataset_csv(s, data);
    write_text_file(path, s.str());
}

CsvTable read_csv_table(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    CsvTable table;
    bool have_header = false;
    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split(line, ',');
        if (!have_header) {
            for (auto cell : cells) {
                if (cell.size() >= 2 && cell.front() == '"' && cell.back() == '"') cell = cell.substr(1, cell.size() - 2);
                table.names.emplace_back(cell);
            }
            have_header = true;
            continue;
        }
        if (cells.size() != table.names.size()) {
            throw ParseError("expected " + std::to_string(table.names.size()) + " cells, found " +
                                 std::to_string(cells.size()),
                             line_no);
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double v;
            if (!parse_double(cells[c], v) || !std::isfinite(v)) {
                throw ParseError("column " + std::to_string(c + 1) + ": '" + std::string(cells[c]) +
                                     "' is not a finite number",
                                 line_no);
            }
            values.push_back(v);
        }
        ++rows;
    }
    if (!have_header) throw ParseError("empty CSV file");
    if (rows == 0) throw ParseError("CSV file has a header but no data rows");
    const auto d = static_cast<Eigen::Index>(table.names.size());
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows), d);
    for (std::size_t m = 0; m < rows; ++m) {
        for (Eigen::Index j = 0; j < d; ++j) x(static_cast<Eigen::Index>(m), j) = values[m * static_cast<std::size_t>(d) + static_cast<std::size_t>(j)];
    }
    table.data = Dataset(std::move(x));
    return table;
}

CsvTable read_csv_table(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_csv_table(in);
}

Dataset read_dataset_csv(const std::filesystem::path& path) { return read_csv_table(path).data; }

Dataset bootstrap_rows(const Dataset& data, std::size_t n, Seed seed) {
    if (data.n() == 0) throw InvalidArgument("cannot bootstrap an empty dataset");
    if (n == 0) throw InvalidArgument("bootstrap size must be positive");
    Rng rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, data.n() - 1);
    std::vector<std::size_t> rows(n);
    for (auto& r : rows) r = pick(rng);
    return data.select_rows(rows);
}

void write_dag(std::ostream& out, const Dag& g) {
    out << "d=" << g.num_vars() << '\n';
    for (const Edge& e : g.edges()) out << (e.from + 1) << ',' << (e.to + 1) << '\n';
}

void write_dag(const std::filesystem::path& path, const Dag& g) {
    std::ostringstream s;
    write_dag(s, g);
    write_text_file(path, s.str());
}

Dag read_dag(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::size_t d = 0;
    bool have_header = false;
    std::vector<Edge> edges;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = trim(line);
        if (text.empty()) continue;
        if (!have_header) {
            if (text.substr(0, 2) != "d=" || !parse_index(trim(text.substr(2)), d) || d == 0) {
                throw ParseError("expected header 'd=<num_vars>', found '" + std::string(text) + "'", line_no);
            }
            have_header = true;
            continue;
        }
        const auto cells = split(text, ',');
        std::size_t from = 0, to = 0;
        if (cells.size() != 2 || !parse_index(cells[0], from) || !parse_index(cells[1], to)) {
            throw ParseError("expected edge 'j,i', found '" + std::string(text) + "'", line_no);
        }
        if (from < 1 || from > d || to < 1 || to > d) {
            throw ParseError("edge endpoint outside [1, " + std::to_string(d) + "]", line_no);
        }
        if (from == to) throw ParseError("self-loop", line_no);
        edges.push_back({from - 1, to - 1});
    }
    if (!have_header) throw ParseError("empty DAG file");
    try {
        return Dag(d, edges);
    } catch (const InvalidArgument& e) {
        throw ParseError(e.what());
    }
}

Dag read_dag(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_dag(in);
}

void write_order(std::ostream& out, const TopologicalOrder& order) {
    for (std::size_t k = 0; k < order.size(); ++k) out << (k ? "," : "") << (order[k] + 1);
    out << '\n';
}

void write_order(const std::filesystem::path& path, const TopologicalOrder& order) {
    std::ostringstream s;
    write_order(s, order);
    write_text_file(path, s.str());
}

TopologicalOrder read_order(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = trim(line);
        if (text.empty()) continue;
        std::vector<Var> perm;
        for (auto cell : split(text, ',')) {
            std::size_t v = 0;
            if (!parse_index(cell, v) || v == 0) {
                throw ParseError("'" + std::string(cell) + "' is not a positive variable index", line_no);
            }
            perm.push_back(v - 1);
        }
        try {
            return TopologicalOrder(std::move(perm));
        } catch (const InvalidArgument& e) {
            throw ParseError(e.what(), line_no);
        }
    }
    throw ParseError("empty order file");
}

TopologicalOrder read_order(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_order(in);
}

Json to_json(const TreeConfig& cfg) {
    Json j;
    j["num_trees"] = cfg.num_trees;
    j["max_leaves"] = cfg.max_leaves;
    j["min_samples_leaf"] = cfg.min_samples_leaf;
    j["seed"] = cfg.seed;
    return j;
}

Json to_json(const IntervalSet& rset, const TreeConfig& cfg) {
    Json j;
    j["var"] = rset.var() + 1;
    j["config"] = to_json(cfg);
    Json trees = Json::array();
    for (std::size_t t = 0; t < rset.num_trees(); ++t) {
        Json tree = Json::array();
        for (const Interval& r : rset.tree(t)) {
            Json iv;
            iv["lo"] = bound(r.lo);
            iv["hi"] = bound(r.hi);
            tree.push_back(std::move(iv));
        }
        trees.push_back(std::move(tree));
    }
    j["trees"] = std::move(trees);
    return j;
}

IntervalSet interval_set_from_json(const Json& j) {
    try {
        const auto var = j.at("var").get<std::size_t>();
        if (var == 0) throw ParseError("interval set variable index must be positive");
        std::vector<Interval> intervals;
        std::vector<std::size_t> sizes;
        for (const auto& tree : j.at("trees")) {
            sizes.push_back(tree.size());
            for (const auto& iv : tree) {
                const auto& lo = iv.at("lo");
                const auto& hi = iv.at("hi");
                intervals.push_back({lo.is_null() ? -kInf : lo.get<double>(), hi.is_null() ? kInf : hi.get<double>()});
            }
        }
        return IntervalSet(var - 1, std::move(intervals), sizes);
    } catch (const Json::exception& e) {
        throw ParseError(std::string("malformed interval set: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw ParseError(std::string("invalid interval set: ") + e.what());
    }
}

Json to_json(const SartreConfig& cfg) {
    Json j;
    j["lambda"] = cfg.lambda;
    j["lambda_scale"] = cfg.scale == LambdaScale::Mean ? "mean" : "sum";
    j["trees"] = to_json(cfg.trees);
    j["solver_tol"] = cfg.solver.tol;
    j["solver_max_iter"] = cfg.solver.max_iter;
    return j;
}

Json to_json(const GraphMetrics& m) {
    Json j;
    j["shd"] = m.shd;
    j["sid"] = m.sid;
    j["precision"] = m.precision;
    j["recall"] = m.recall;
    j["f1"] = m.f1;
    j["num_edges_true"] = m.num_edges_true;
    j["num_edges_est"] = m.num_edges_est;
    return j;
}

Json to_json(const PiecewiseConstant& f) {
    Json j;
    j["boundaries"] = f.boundaries;
    j["levels"] = f.levels;
    j["lower_tail"] = f.lower_tail;
    j["upper_tail"] = f.upper_tail;
    return j;
}

Json model_to_json(const SartreModel& model) {
    Json j;
    j["config"] = to_json(model.config);
    Json intervals = Json::array();
    for (const auto& rset : model.intervals) {
        TreeConfig cfg = model.config.trees;
        cfg.seed = derive_seed(model.config.trees.seed, rset.var());
        intervals.push_back(to_json(rset, cfg));
    }
    j["intervals"] = std::move(intervals);
    Json targets = Json::array();
    for (const TargetFit& fit : model.fits) {
        if (fit.candidates.empty()) continue;
        Json t;
        t["target"] = fit.target + 1;
        t["intercept"] = fit.coef.intercept;
        Json groups = Json::array();
        for (std::size_t g = 0; g < fit.candidates.size(); ++g) {
            Json grp;
            grp["parent"] = fit.candidates[g] + 1;
            grp["active"] = fit.coef.active(g);
            const auto beta = fit.coef.group(g);
            grp["beta"] = std::vector<double>(beta.begin(), beta.end());
            groups.push_back(std::move(grp));
        }
        t["groups"] = std::move(groups);
        t["iterations"] = fit.report.iterations;
        t["objective"] = fit.report.objective;
        t["kkt_violation"] = fit.report.kkt_violation;
        t["converged"] = fit.report.converged;
        targets.push_back(std::move(t));
    }
    j["targets"] = std::move(targets);
    Json edges = Json::array();
    for (const Edge& e : model.graph.edges()) edges.push_back({e.from + 1, e.to + 1});
    j["edges"] = std::move(edges);
    return j;
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << contents;
    if (!out) throw IoError("write to " + path.string() + " failed");
}

std::string read_text_file(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string dataset_hash(const Dataset& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&](const void* p, std::size_t len) {
        const auto* bytes = static_cast<const unsigned char*>(p);
        for (std::size_t k = 0; k < len; ++k) {
            h ^= bytes[k];
            h *= 0x100000001b3ULL;
        }
    };
    const std::uint64_t dims[2] = {data.n(), data.d()};
    feed(dims, sizeof dims);
    feed(data.values().data(), sizeof(double) * data.n() * data.d());
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace sartre
