#pragma once

// Slow reference implementations used only by tests. They work on raw
// adjacency matrices and share no code with the library.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

using Adj = std::vector<std::vector<int>>;  // adj[a][b] == 1 iff a -> b

inline Adj empty_adj(std::size_t d) { return Adj(d, std::vector<int>(d, 0)); }

inline bool is_acyclic(const Adj& a) {
    const std::size_t d = a.size();
    std::vector<int> state(d, 0);  // 0 new, 1 on stack, 2 done
    std::function<bool(std::size_t)> visit = [&](std::size_t v) {
        state[v] = 1;
        for (std::size_t w = 0; w < d; ++w) {
            if (!a[v][w]) continue;
            if (state[w] == 1) return false;
            if (state[w] == 0 && !visit(w)) return false;
        }
        state[v] = 2;
        return true;
    };
    for (std::size_t v = 0; v < d; ++v) {
        if (state[v] == 0 && !visit(v)) return false;
    }
    return true;
}

/// Every DAG on d labelled nodes (d <= 4 is practical).
inline std::vector<Adj> all_dags(std::size_t d) {
    std::vector<std::pair<std::size_t, std::size_t>> slots;
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b)
            if (a != b) slots.emplace_back(a, b);
    std::vector<Adj> out;
    const std::uint64_t total = std::uint64_t{1} << slots.size();
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        Adj a = empty_adj(d);
        bool two_cycle = false;
        for (std::size_t k = 0; k < slots.size(); ++k) {
            if (mask >> k & 1U) {
                auto [x, y] = slots[k];
                if (a[y][x]) two_cycle = true;
                a[x][y] = 1;
            }
        }
        if (!two_cycle && is_acyclic(a)) out.push_back(a);
    }
    return out;
}

/// desc[v][w] == true iff w is reachable from v by a directed path (v included).
inline std::vector<std::vector<bool>> descendants(const Adj& a) {
    const std::size_t d = a.size();
    std::vector<std::vector<bool>> desc(d, std::vector<bool>(d, false));
    for (std::size_t v = 0; v < d; ++v) {
        std::vector<std::size_t> stack{v};
        desc[v][v] = true;
        while (!stack.empty()) {
            const std::size_t u = stack.back();
            stack.pop_back();
            for (std::size_t w = 0; w < d; ++w) {
                if (a[u][w] && !desc[v][w]) {
                    desc[v][w] = true;
                    stack.push_back(w);
                }
            }
        }
    }
    return desc;
}

/// All simple paths from s to t in the skeleton.
inline std::vector<std::vector<std::size_t>> simple_paths(const Adj& a, std::size_t s, std::size_t t) {
    const std::size_t d = a.size();
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> path{s};
    std::vector<bool> used(d, false);
    used[s] = true;
    std::function<void(std::size_t)> walk = [&](std::size_t u) {
        if (u == t) {
            out.push_back(path);
            return;
        }
        for (std::size_t w = 0; w < d; ++w) {
            if (used[w] || !(a[u][w] || a[w][u])) continue;
            used[w] = true;
            path.push_back(w);
            walk(w);
            path.pop_back();
            used[w] = false;
        }
    };
    walk(s);
    return out;
}

/// Path blocking rule: a path is open given z iff every non-collider is
/// outside z and every collider has itself or a descendant in z.
inline bool path_open(const Adj& a, const std::vector<std::size_t>& p, const std::vector<bool>& z,
                      const std::vector<std::vector<bool>>& desc) {
    for (std::size_t k = 1; k + 1 < p.size(); ++k) {
        const std::size_t prev = p[k - 1], v = p[k], next = p[k + 1];
        const bool collider = a[prev][v] && a[next][v];
        if (collider) {
            bool hit = false;
            for (std::size_t w = 0; w < a.size(); ++w) hit = hit || (desc[v][w] && z[w]);
            if (!hit) return false;
        } else if (z[v]) {
            return false;
        }
    }
    return true;
}

inline bool d_separated(const Adj& a, std::size_t s, std::size_t t, const std::vector<bool>& z) {
    const auto desc = descendants(a);
    for (const auto& p : simple_paths(a, s, t)) {
        if (path_open(a, p, z, desc)) return false;
    }
    return true;
}

inline bool directed_path(const Adj& a, const std::vector<std::size_t>& p) {
    for (std::size_t k = 0; k + 1 < p.size(); ++k) {
        if (!a[p[k]][p[k + 1]]) return false;
    }
    return true;
}

/// Whether adjusting for z (the estimated parents of i) mispredicts the
/// effect of intervening on i on j in the true graph `a`. If j is among the
/// adjusted variables the prediction is "no effect". Otherwise z must satisfy
/// the generalized adjustment criterion: no member descends from a node other
/// than i on a causal path i -> ... -> j, and every non-causal path from i to
/// j is blocked.
inline bool sid_pair_error(const Adj& a, std::size_t i, std::size_t j, const std::vector<bool>& z) {
    const auto desc = descendants(a);
    if (z[j]) return desc[i][j];
    const auto paths = simple_paths(a, i, j);
    std::vector<bool> forbidden(a.size(), false);
    for (const auto& p : paths) {
        if (!directed_path(a, p)) continue;
        for (std::size_t k = 1; k < p.size(); ++k)
            for (std::size_t w = 0; w < a.size(); ++w)
                if (desc[p[k]][w]) forbidden[w] = true;
    }
    for (std::size_t w = 0; w < a.size(); ++w) {
        if (z[w] && forbidden[w]) return true;
    }
    for (const auto& p : paths) {
        if (!directed_path(a, p) && path_open(a, p, z, desc)) return true;
    }
    return false;
}

/// Edge insertions, deletions and reversals (a reversal costs 1).
inline std::size_t shd(const Adj& t, const Adj& e) {
    std::size_t out = 0;
    for (std::size_t a = 0; a < t.size(); ++a)
        for (std::size_t b = a + 1; b < t.size(); ++b) {
            const int tt = t[a][b] ? 1 : t[b][a] ? 2 : 0;
            const int ee = e[a][b] ? 1 : e[b][a] ? 2 : 0;
            out += tt != ee;
        }
    return out;
}

}  // namespace oracle
