#pragma once

// DAG representation, random DAG generators, and structural accuracy metrics.
//
// Variables are 0-based in memory. Files and user-facing output use 1-based
// indices (see io.hpp).

#include "sartre/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace sartre {

using Var = std::size_t;

/// Directed edge from -> to.
struct Edge {
    Var from;
    Var to;

    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

class TopologicalOrder;

/// Directed acyclic graph over a fixed number of variables. Acyclicity is
/// enforced on every mutation.
class Dag {
public:
    explicit Dag(std::size_t num_vars = 0);
    Dag(std::size_t num_vars, std::span<const Edge> edges);

    std::size_t num_vars() const noexcept { return num_vars_; }
    std::size_t num_edges() const noexcept { return num_edges_; }

    bool has_edge(Var from, Var to) const;
    bool adjacent(Var a, Var b) const { return has_edge(a, b) || has_edge(b, a); }

    /// Throws InvalidArgument on self-loops, out-of-range endpoints, or if the
    /// edge would close a cycle. Adding an existing edge is a no-op.
    void add_edge(Var from, Var to);
    void remove_edge(Var from, Var to);

    std::vector<Var> parents(Var v) const;
    std::vector<Var> children(Var v) const;

    /// Edges in lexicographic (from, to) order.
    std::vector<Edge> edges() const;

    /// Reflexive descendant set as a membership mask.
    std::vector<char> descendants(Var v) const;
    /// Reflexive ancestor set as a membership mask.
    std::vector<char> ancestors(Var v) const;

    bool reaches(Var from, Var to) const;

    friend bool operator==(const Dag& a, const Dag& b) {
        return a.num_vars_ == b.num_vars_ && a.adj_ == b.adj_;
    }

private:
    std::size_t index(Var from, Var to) const { return from * num_vars_ + to; }
    void check_var(Var v) const;

    std::size_t num_vars_;
    std::size_t num_edges_ = 0;
    std::vector<std::uint8_t> adj_;  // row-major, adj_[from*d + to]
};

/// A permutation of the variables, roots first.
class TopologicalOrder {
public:
    TopologicalOrder() = default;
    /// Throws InvalidArgument unless `perm` is a permutation of 0..size-1.
    explicit TopologicalOrder(std::vector<Var> perm);

    static TopologicalOrder identity(std::size_t d);

    std::size_t size() const noexcept { return perm_.size(); }
    Var operator[](std::size_t k) const { return perm_[k]; }
    const std::vector<Var>& sequence() const noexcept { return perm_; }
    auto begin() const { return perm_.begin(); }
    auto end() const { return perm_.end(); }

    /// Position of `v` in the order.
    std::size_t position(Var v) const { return pos_.at(v); }
    bool precedes(Var a, Var b) const { return pos_.at(a) < pos_.at(b); }

    /// Every edge of `g` points forward in this order.
    bool consistent_with(const Dag& g) const;

    /// Variables preceding `v` (candidate parents), in order.
    std::vector<Var> predecessors(Var v) const;

    friend bool operator==(const TopologicalOrder& a, const TopologicalOrder& b) {
        return a.perm_ == b.perm_;
    }

private:
    std::vector<Var> perm_;
    std::vector<std::size_t> pos_;
};

/// Kahn's algorithm with smallest-index tie breaking. nullopt if `num_vars`
/// and `edges` contain a cycle.
std::optional<TopologicalOrder> topological_sort(std::size_t num_vars, std::span<const Edge> edges);
TopologicalOrder topological_sort(const Dag& g);

/// Erdős–Rényi DAG: random permutation, then each forward pair is included
/// independently with probability expected_edges / C(d, 2).
Dag gen_erdos_renyi(std::size_t d, double expected_edges, Seed seed);

/// Preferential attachment. Node k (0-based, in insertion order) receives
/// min(m, k) parents among 0..k-1 chosen without replacement with weight
/// degree + 1.
Dag gen_scale_free(std::size_t d, std::size_t m, Seed seed);

/// The complete DAG induced by `order`.
Dag full_dag_from_order(const TopologicalOrder& order);

struct EdgeScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct GraphMetrics {
    std::size_t shd = 0;
    std::size_t sid = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t num_edges_true = 0;
    std::size_t num_edges_est = 0;
};

/// Structural Hamming distance; a reversed edge costs 1.
std::size_t shd(const Dag& truth, const Dag& est);

/// Structural intervention distance of `est` with respect to `truth`.
std::size_t sid(const Dag& truth, const Dag& est);

/// errors[i*d + j] is 1 iff the parent set of i in `est` fails to identify
/// p(x_j | do(x_i)) in `truth`. Diagonal entries are 0.
std::vector<char> sid_pair_errors(const Dag& truth, const Dag& est);

/// Precision/recall/F1 on directed edges. Empty estimate => precision 1;
/// empty truth => recall 1.
EdgeScores edge_prf(const Dag& truth, const Dag& est);

GraphMetrics evaluate(const Dag& truth, const Dag& est);

/// Nodes d-connected to `source` given `given` (Bayes-ball reachability).
/// `given` is a membership mask. `source` itself is included.
std::vector<char> d_connected(const Dag& g, Var source, const std::vector<char>& given);

/// True iff every path between a and b is blocked by z.
bool d_separated(const Dag& g, Var a, Var b, std::span<const Var> z);

}  // namespace sartre
