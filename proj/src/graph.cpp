#include "sartre/graph.hpp"

#include "sartre/error.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <random>
#include <string>

namespace sartre {

// ---------------------------------------------------------------------------
// Dag

Dag::Dag(std::size_t num_vars) : num_vars_(num_vars), adj_(num_vars * num_vars, 0) {}

Dag::Dag(std::size_t num_vars, std::span<const Edge> edges) : Dag(num_vars) {
    for (const Edge& e : edges) {
        check_var(e.from);
        check_var(e.to);
        if (e.from == e.to) {
            throw InvalidArgument("self-loop on variable " + std::to_string(e.from + 1));
        }
        auto& cell = adj_[index(e.from, e.to)];
        if (!cell) {
            cell = 1;
            ++num_edges_;
        }
    }
    if (!topological_sort(num_vars, edges)) {
        throw InvalidArgument("edge set contains a directed cycle");
    }
}

void Dag::check_var(Var v) const {
    if (v >= num_vars_) {
        throw InvalidArgument("variable index " + std::to_string(v + 1) + " out of range [1, " +
                              std::to_string(num_vars_) + "]");
    }
}

bool Dag::has_edge(Var from, Var to) const {
    check_var(from);
    check_var(to);
    return adj_[index(from, to)] != 0;
}

void Dag::add_edge(Var from, Var to) {
    check_var(from);
    check_var(to);
    if (from == to) {
        throw InvalidArgument("self-loop on variable " + std::to_string(from + 1));
    }
    if (adj_[index(from, to)]) return;
    if (reaches(to, from)) {
        throw InvalidArgument("edge " + std::to_string(from + 1) + "->" + std::to_string(to + 1) +
                              " would create a cycle");
    }
    adj_[index(from, to)] = 1;
    ++num_edges_;
}

void Dag::remove_edge(Var from, Var to) {
    check_var(from);
    check_var(to);
    auto& cell = adj_[index(from, to)];
    if (cell) {
        cell = 0;
        --num_edges_;
    }
}

std::vector<Var> Dag::parents(Var v) const {
    check_var(v);
    std::vector<Var> out;
    for (Var u = 0; u < num_vars_; ++u) {
        if (adj_[index(u, v)]) out.push_back(u);
    }
    return out;
}

std::vector<Var> Dag::children(Var v) const {
    check_var(v);
    std::vector<Var> out;
    for (Var u = 0; u < num_vars_; ++u) {
        if (adj_[index(v, u)]) out.push_back(u);
    }
    return out;
}

std::vector<Edge> Dag::edges() const {
    std::vector<Edge> out;
    out.reserve(num_edges_);
    for (Var a = 0; a < num_vars_; ++a) {
        for (Var b = 0; b < num_vars_; ++b) {
            if (adj_[index(a, b)]) out.push_back({a, b});
        }
    }
    return out;
}

std::vector<char> Dag::descendants(Var v) const {
    check_var(v);
    std::vector<char> seen(num_vars_, 0);
    std::vector<Var> stack{v};
    seen[v] = 1;
    while (!stack.empty()) {
        Var u = stack.back();
        stack.pop_back();
        for (Var w = 0; w < num_vars_; ++w) {
            if (adj_[index(u, w)] && !seen[w]) {
                seen[w] = 1;
                stack.push_back(w);
            }
        }
    }
    return seen;
}

std::vector<char> Dag::ancestors(Var v) const {
    check_var(v);
    std::vector<char> seen(num_vars_, 0);
    std::vector<Var> stack{v};
    seen[v] = 1;
    while (!stack.empty()) {
        Var u = stack.back();
        stack.pop_back();
        for (Var w = 0; w < num_vars_; ++w) {
            if (adj_[index(w, u)] && !seen[w]) {
                seen[w] = 1;
                stack.push_back(w);
            }
        }
    }
    return seen;
}

bool Dag::reaches(Var from, Var to) const { return descendants(from)[to] != 0; }

// ---------------------------------------------------------------------------
// TopologicalOrder

TopologicalOrder::TopologicalOrder(std::vector<Var> perm) : perm_(std::move(perm)), pos_(perm_.size()) {
    const std::size_t d = perm_.size();
    std::vector<char> seen(d, 0);
    for (std::size_t k = 0; k < d; ++k) {
        Var v = perm_[k];
        if (v >= d) {
            throw InvalidArgument("order entry " + std::to_string(v + 1) + " out of range [1, " +
                                  std::to_string(d) + "]");
        }
        if (seen[v]) throw InvalidArgument("order repeats variable " + std::to_string(v + 1));
        seen[v] = 1;
        pos_[v] = k;
    }
}

TopologicalOrder TopologicalOrder::identity(std::size_t d) {
    std::vector<Var> perm(d);
    std::iota(perm.begin(), perm.end(), Var{0});
    return TopologicalOrder(std::move(perm));
}

bool TopologicalOrder::consistent_with(const Dag& g) const {
    if (g.num_vars() != size()) return false;
    for (const Edge& e : g.edges()) {
        if (!precedes(e.from, e.to)) return false;
    }
    return true;
}

std::vector<Var> TopologicalOrder::predecessors(Var v) const {
    const std::size_t p = position(v);
    return {perm_.begin(), perm_.begin() + static_cast<std::ptrdiff_t>(p)};
}

std::optional<TopologicalOrder> topological_sort(std::size_t num_vars, std::span<const Edge> edges) {
    std::vector<std::vector<Var>> out(num_vars);
    std::vector<std::size_t> indeg(num_vars, 0);
    for (const Edge& e : edges) {
        out[e.from].push_back(e.to);
        ++indeg[e.to];
    }
    std::priority_queue<Var, std::vector<Var>, std::greater<>> ready;
    for (Var v = 0; v < num_vars; ++v) {
        if (indeg[v] == 0) ready.push(v);
    }
    std::vector<Var> perm;
    perm.reserve(num_vars);
    while (!ready.empty()) {
        Var v = ready.top();
        ready.pop();
        perm.push_back(v);
        for (Var w : out[v]) {
            if (--indeg[w] == 0) ready.push(w);
        }
    }
    if (perm.size() != num_vars) return std::nullopt;
    return TopologicalOrder(std::move(perm));
}

TopologicalOrder topological_sort(const Dag& g) {
    const auto edges = g.edges();
    return *topological_sort(g.num_vars(), edges);
}

// ---------------------------------------------------------------------------
// Generators

Dag gen_erdos_renyi(std::size_t d, double expected_edges, Seed seed) {
    if (d == 0) throw InvalidArgument("d must be positive");
    const double pairs = 0.5 * static_cast<double>(d) * static_cast<double>(d - 1);
    if (!(expected_edges >= 0.0) || expected_edges > pairs) {
        throw InvalidArgument("expected edge count " + std::to_string(expected_edges) +
                              " outside [0, " + std::to_string(pairs) + "]");
    }
    const double p = pairs > 0.0 ? expected_edges / pairs : 0.0;

    Rng rng(seed);
    std::vector<Var> perm(d);
    std::iota(perm.begin(), perm.end(), Var{0});
    std::shuffle(perm.begin(), perm.end(), rng);

    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<Edge> edges;
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = a + 1; b < d; ++b) {
            if (unif(rng) < p) edges.push_back({perm[a], perm[b]});
        }
    }
    return Dag(d, edges);
}

Dag gen_scale_free(std::size_t d, std::size_t m, Seed seed) {
    if (d == 0) throw InvalidArgument("d must be positive");
    if (m == 0) throw InvalidArgument("m must be at least 1");
    if (d > 1 && m >= d) {
        throw InvalidArgument("m = " + std::to_string(m) + " must be smaller than d = " + std::to_string(d));
    }
    Rng rng(seed);
    std::vector<double> degree(d, 0.0);
    std::vector<Edge> edges;
    std::vector<Var> candidates;
    std::vector<double> weights;
    for (Var node = 1; node < d; ++node) {
        candidates.resize(node);
        std::iota(candidates.begin(), candidates.end(), Var{0});
        const std::size_t picks = std::min(m, static_cast<std::size_t>(node));
        std::vector<Var> chosen;
        for (std::size_t k = 0; k < picks; ++k) {
            weights.resize(candidates.size());
            for (std::size_t c = 0; c < candidates.size(); ++c) weights[c] = degree[candidates[c]] + 1.0;
            std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
            const std::size_t at = pick(rng);
            chosen.push_back(candidates[at]);
            candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(at));
        }
        for (Var parent : chosen) {
            edges.push_back({parent, node});
            degree[parent] += 1.0;
            degree[node] += 1.0;
        }
    }
    return Dag(d, edges);
}

Dag full_dag_from_order(const TopologicalOrder& order) {
    std::vector<Edge> edges;
    const std::size_t d = order.size();
    edges.reserve(d * (d > 0 ? d - 1 : 0) / 2);
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = a + 1; b < d; ++b) edges.push_back({order[a], order[b]});
    }
    return Dag(d, edges);
}

// ---------------------------------------------------------------------------
// Metrics

namespace {

void require_same_size(const Dag& truth, const Dag& est) {
    if (truth.num_vars() != est.num_vars()) {
        throw DimensionMismatch("graphs have " + std::to_string(truth.num_vars()) + " and " +
                                std::to_string(est.num_vars()) + " variables");
    }
}

struct AdjacencyLists {
    std::vector<std::vector<Var>> parents;
    std::vector<std::vector<Var>> children;

    explicit AdjacencyLists(const Dag& g) : parents(g.num_vars()), children(g.num_vars()) {
        for (const Edge& e : g.edges()) {
            children[e.from].push_back(e.to);
            parents[e.to].push_back(e.from);
        }
    }
};

std::vector<char> reach(const std::vector<std::vector<Var>>& next, const std::vector<Var>& seeds,
                        std::size_t d) {
    std::vector<char> seen(d, 0);
    std::vector<Var> stack;
    for (Var s : seeds) {
        if (!seen[s]) {
            seen[s] = 1;
            stack.push_back(s);
        }
    }
    while (!stack.empty()) {
        Var u = stack.back();
        stack.pop_back();
        for (Var w : next[u]) {
            if (!seen[w]) {
                seen[w] = 1;
                stack.push_back(w);
            }
        }
    }
    return seen;
}

// Bayes-ball reachability. Edges source->c with skip_child[c] set are treated
// as absent.
std::vector<char> active_reach(const AdjacencyLists& adj, Var source, const std::vector<char>& given,
                               const std::vector<char>* skip_child) {
    const std::size_t d = adj.parents.size();
    std::vector<Var> given_nodes;
    for (Var v = 0; v < d; ++v) {
        if (given[v]) given_nodes.push_back(v);
    }
    // Nodes that are in `given` or have a descendant in it.
    const std::vector<char> opens_collider = reach(adj.parents, given_nodes, d);

    auto skipped = [&](Var from, Var to) {
        return skip_child && from == source && (*skip_child)[to];
    };

    // visited[2v] : reached v from a child (travelling up)
    // visited[2v+1] : reached v from a parent (travelling down)
    std::vector<char> visited(2 * d, 0);
    std::vector<char> reachable(d, 0);
    std::vector<std::pair<Var, bool>> stack{{source, true}};
    while (!stack.empty()) {
        auto [v, up] = stack.back();
        stack.pop_back();
        const std::size_t slot = 2 * v + (up ? 0 : 1);
        if (visited[slot]) continue;
        visited[slot] = 1;
        if (!given[v]) reachable[v] = 1;
        if (up) {
            if (given[v]) continue;
            for (Var p : adj.parents[v]) {
                if (!skipped(p, v)) stack.push_back({p, true});
            }
            for (Var c : adj.children[v]) {
                if (!skipped(v, c)) stack.push_back({c, false});
            }
        } else {
            if (!given[v]) {
                for (Var c : adj.children[v]) {
                    if (!skipped(v, c)) stack.push_back({c, false});
                }
            }
            if (opens_collider[v]) {
                for (Var p : adj.parents[v]) {
                    if (!skipped(p, v)) stack.push_back({p, true});
                }
            }
        }
    }
    reachable[source] = 1;
    return reachable;
}

}  // namespace

std::size_t shd(const Dag& truth, const Dag& est) {
    require_same_size(truth, est);
    const std::size_t d = truth.num_vars();
    std::size_t distance = 0;
    for (Var a = 0; a < d; ++a) {
        for (Var b = a + 1; b < d; ++b) {
            const bool t_ab = truth.has_edge(a, b), t_ba = truth.has_edge(b, a);
            const bool e_ab = est.has_edge(a, b), e_ba = est.has_edge(b, a);
            if (t_ab != e_ab || t_ba != e_ba) ++distance;
        }
    }
    return distance;
}

std::vector<char> sid_pair_errors(const Dag& truth, const Dag& est) {
    require_same_size(truth, est);
    const std::size_t d = truth.num_vars();
    const AdjacencyLists adj(truth);

    std::vector<std::vector<char>> ancestors(d), descendants(d);
    for (Var v = 0; v < d; ++v) {
        ancestors[v] = reach(adj.parents, {v}, d);
        descendants[v] = reach(adj.children, {v}, d);
    }

    std::vector<char> errors(d * d, 0);
    std::vector<char> on_causal_path(d);
    for (Var i = 0; i < d; ++i) {
        std::vector<char> adjust(d, 0);
        for (Var p : est.parents(i)) adjust[p] = 1;
        const auto& de_i = descendants[i];
        const std::vector<char> connected = active_reach(adj, i, adjust, nullptr);

        for (Var j = 0; j < d; ++j) {
            if (j == i) continue;
            bool error;
            if (adjust[j]) {
                // est claims no effect of i on j.
                error = de_i[j] != 0;
            } else if (!de_i[j]) {
                error = connected[j] != 0;
            } else {
                std::vector<Var> on_path;
                for (Var w = 0; w < d; ++w) {
                    on_causal_path[w] = (w != i && de_i[w] && ancestors[j][w]) ? 1 : 0;
                    if (on_causal_path[w]) on_path.push_back(w);
                }
                const std::vector<char> forbidden = reach(adj.children, on_path, d);
                bool hits_forbidden = false;
                for (Var v = 0; v < d && !hits_forbidden; ++v) hits_forbidden = adjust[v] && forbidden[v];
                if (hits_forbidden) {
                    error = true;
                } else {
                    // Proper back-door graph: drop the first edge of every causal path.
                    error = active_reach(adj, i, adjust, &on_causal_path)[j] != 0;
                }
            }
            errors[i * d + j] = error ? 1 : 0;
        }
    }
    return errors;
}

std::size_t sid(const Dag& truth, const Dag& est) {
    const auto errors = sid_pair_errors(truth, est);
    return static_cast<std::size_t>(std::count(errors.begin(), errors.end(), char{1}));
}

EdgeScores edge_prf(const Dag& truth, const Dag& est) {
    require_same_size(truth, est);
    std::size_t tp = 0;
    for (const Edge& e : est.edges()) {
        if (truth.has_edge(e.from, e.to)) ++tp;
    }
    EdgeScores s;
    s.precision = est.num_edges() ? static_cast<double>(tp) / static_cast<double>(est.num_edges()) : 1.0;
    s.recall = truth.num_edges() ? static_cast<double>(tp) / static_cast<double>(truth.num_edges()) : 1.0;
    const double denom = s.precision + s.recall;
    s.f1 = denom > 0.0 ? 2.0 * s.precision * s.recall / denom : 0.0;
    return s;
}

GraphMetrics evaluate(const Dag& truth, const Dag& est) {
    GraphMetrics m;
    m.shd = shd(truth, est);
    m.sid = sid(truth, est);
    const EdgeScores s = edge_prf(truth, est);
    m.precision = s.precision;
    m.recall = s.recall;
    m.f1 = s.f1;
    m.num_edges_true = truth.num_edges();
    m.num_edges_est = est.num_edges();
    return m;
}

std::vector<char> d_connected(const Dag& g, Var source, const std::vector<char>& given) {
    if (given.size() != g.num_vars()) throw DimensionMismatch("conditioning mask has wrong length");
    if (source >= g.num_vars()) throw InvalidArgument("source variable out of range");
    return active_reach(AdjacencyLists(g), source, given, nullptr);
}

bool d_separated(const Dag& g, Var a, Var b, std::span<const Var> z) {
    const std::size_t d = g.num_vars();
    if (a >= d || b >= d) throw InvalidArgument("variable out of range");
    if (a == b) throw InvalidArgument("d-separation queried between a variable and itself");
    std::vector<char> given(d, 0);
    for (Var v : z) {
        if (v >= d) throw InvalidArgument("conditioning variable out of range");
        if (v == a || v == b) throw InvalidArgument("conditioning set contains an endpoint");
        given[v] = 1;
    }
    return !d_connected(g, a, given)[b];
}

}  // namespace sartre
