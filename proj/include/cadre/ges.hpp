#ifndef CADRE_GES_HPP
#define CADRE_GES_HPP

#include "cadre/cpdag.hpp"
#include "cadre/dataset.hpp"
#include "cadre/graph.hpp"
#include "cadre/score.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

namespace cadre {

struct SearchOptions {
    /// Largest candidate set (T for inserts, H for deletes) whose subsets are enumerated.
    /// Larger sets are truncated to their lowest-index members and a warning is emitted.
    std::size_t max_subset_candidates = 10;
    /// Smallest score improvement accepted; absorbs floating-point noise.
    double acceptance_threshold = 1e-10;
    /// Re-validates the CPDAG after every operator (slow).
    bool check_invariants = false;
    WarningSink warn;
};

enum class Phase { Forward, Backward };

struct InsertCandidate {
    NodeId x = -1;
    NodeId y = -1;
    std::vector<NodeId> t_subset;
    double score_delta = 0.0;
};

struct DeleteCandidate {
    NodeId x = -1;
    NodeId y = -1;
    std::vector<NodeId> h_subset;
    double score_delta = 0.0;
};

struct TraceStep {
    Phase phase;
    NodeId x;
    NodeId y;
    std::vector<NodeId> subset;
    double delta;
    double total_score;
};

struct SearchTrace {
    double initial_score = 0.0;
    std::vector<TraceStep> steps;
    bool subset_cap_hit = false;

    double final_score() const noexcept { return steps.empty() ? initial_score : steps.back().total_score; }
    std::size_t count(Phase phase) const {
        return static_cast<std::size_t>(std::count_if(steps.begin(), steps.end(),
                                                      [&](const TraceStep& s) { return s.phase == phase; }));
    }
};

struct GesResult {
    Cpdag graph;
    SearchTrace trace;
};

namespace detail {

inline bool is_clique(const Pdag& g, const std::vector<NodeId>& nodes) {
    for (std::size_t i = 0; i < nodes.size(); ++i)
        for (std::size_t j = i + 1; j < nodes.size(); ++j)
            if (!g.adjacent(nodes[i], nodes[j])) return false;
    return true;
}

/// True if some path from `from` to `to` follows only undirected edges and forward directed
/// edges while avoiding every node in `blocked`.
inline bool semi_directed_path_avoiding(const Pdag& g, NodeId from, NodeId to,
                                        const std::vector<NodeId>& blocked) {
    const int n = g.node_count();
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    for (NodeId b : blocked) seen[b] = 1;
    std::vector<NodeId> stack{from};
    seen[from] = 1;
    while (!stack.empty()) {
        const NodeId v = stack.back();
        stack.pop_back();
        for (NodeId w = 0; w < n; ++w) {
            if (seen[w]) continue;
            if (!g.has_directed(v, w) && !g.has_undirected(v, w)) continue;
            if (w == to) return true;
            seen[w] = 1;
            stack.push_back(w);
        }
    }
    return false;
}

inline std::vector<NodeId> merge_sorted(std::vector<NodeId> a, const std::vector<NodeId>& b) {
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
}

/// Subsets of `items` (sorted), encoded as masks. Visits every mask in [0, 2^k).
template <typename F>
void for_each_subset(const std::vector<NodeId>& items, F&& f) {
    const std::size_t k = items.size();
    std::vector<NodeId> subset;
    for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
        subset.clear();
        for (std::size_t i = 0; i < k; ++i)
            if (mask & (std::size_t{1} << i)) subset.push_back(items[i]);
        f(subset);
    }
}

inline bool key_less(NodeId x1, NodeId y1, const std::vector<NodeId>& s1, NodeId x2, NodeId y2,
                     const std::vector<NodeId>& s2) {
    if (x1 != x2) return x1 < x2;
    if (y1 != y2) return y1 < y2;
    return s1 < s2;
}

inline std::vector<NodeId> capped(std::vector<NodeId> candidates, const SearchOptions& opts,
                                  SearchTrace& trace, NodeId x, NodeId y) {
    if (candidates.size() > opts.max_subset_candidates) {
        if (!trace.subset_cap_hit && opts.warn)
            opts.warn("subset candidate set for pair (" + std::to_string(x) + "," + std::to_string(y) +
                      ") has " + std::to_string(candidates.size()) + " members; truncated to " +
                      std::to_string(opts.max_subset_candidates));
        trace.subset_cap_hit = true;
        candidates.resize(opts.max_subset_candidates);
    }
    return candidates;
}

inline void check_cpdag(const Pdag& g) {
    if (!is_cpdag(g)) throw std::logic_error("GES produced a graph that is not a CPDAG");
}

} // namespace detail

/// Best valid insert on `g`, or nullopt when none improves the score by more than the
/// acceptance threshold. Ties go to the lexicographically smallest (x, y, T).
template <LocalScorer S>
std::optional<InsertCandidate> best_insert(S& scorer, const Pdag& g, const SearchOptions& opts,
                                           SearchTrace& trace) {
    const int p = g.node_count();
    std::optional<InsertCandidate> best;
    std::vector<std::vector<NodeId>> parents(static_cast<std::size_t>(p)), neighbors(static_cast<std::size_t>(p));
    for (NodeId v = 0; v < p; ++v) {
        parents[v] = g.parents(v);
        neighbors[v] = g.neighbors(v);
    }
    for (NodeId x = 0; x < p; ++x) {
        for (NodeId y = 0; y < p; ++y) {
            if (x == y || g.adjacent(x, y)) continue;
            std::vector<NodeId> na, t_candidates;
            for (NodeId z : neighbors[y]) (g.adjacent(z, x) ? na : t_candidates).push_back(z);
            t_candidates = detail::capped(std::move(t_candidates), opts, trace, x, y);
            const auto base = detail::merge_sorted(parents[y], na);
            detail::for_each_subset(t_candidates, [&](const std::vector<NodeId>& t) {
                auto conditioning = detail::merge_sorted(base, t);
                auto with_x = detail::merge_sorted(conditioning, {x});
                const double delta = scorer.local_score(y, with_x) - scorer.local_score(y, conditioning);
                if (!(delta > opts.acceptance_threshold)) return;
                if (best && (delta < best->score_delta ||
                             (delta == best->score_delta &&
                              !detail::key_less(x, y, t, best->x, best->y, best->t_subset))))
                    return;
                const auto clique = detail::merge_sorted(na, t);
                if (!detail::is_clique(g, clique)) return;
                if (detail::semi_directed_path_avoiding(g, y, x, clique)) return;
                best = InsertCandidate{x, y, t, delta};
            });
        }
    }
    return best;
}

/// Best valid delete on `g`; same conventions as best_insert.
template <LocalScorer S>
std::optional<DeleteCandidate> best_delete(S& scorer, const Pdag& g, const SearchOptions& opts,
                                           SearchTrace& trace) {
    const int p = g.node_count();
    std::optional<DeleteCandidate> best;
    for (NodeId x = 0; x < p; ++x) {
        for (NodeId y = 0; y < p; ++y) {
            if (x == y) continue;
            if (!g.has_directed(x, y) && !g.has_undirected(x, y)) continue;
            std::vector<NodeId> na;
            for (NodeId z : g.neighbors(y))
                if (g.adjacent(z, x)) na.push_back(z);
            const auto h_candidates = detail::capped(na, opts, trace, x, y);
            auto pa_without_x = g.parents(y);
            std::erase(pa_without_x, x);
            detail::for_each_subset(h_candidates, [&](const std::vector<NodeId>& h) {
                std::vector<NodeId> remaining;
                std::set_difference(na.begin(), na.end(), h.begin(), h.end(), std::back_inserter(remaining));
                auto without = detail::merge_sorted(pa_without_x, remaining);
                auto with_x = detail::merge_sorted(without, {x});
                const double delta = scorer.local_score(y, without) - scorer.local_score(y, with_x);
                if (!(delta > opts.acceptance_threshold)) return;
                if (best && (delta < best->score_delta ||
                             (delta == best->score_delta &&
                              !detail::key_less(x, y, h, best->x, best->y, best->h_subset))))
                    return;
                if (!detail::is_clique(g, remaining)) return;
                best = DeleteCandidate{x, y, h, delta};
            });
        }
    }
    return best;
}

/// Adds x -> y, orients every t in T as t -> y, and re-completes.
inline Cpdag apply_insert(const Pdag& g, const InsertCandidate& op) {
    Pdag next = g;
    next.add_directed(op.x, op.y);
    for (NodeId t : op.t_subset) {
        next.remove_edge(t, op.y);
        next.add_directed(t, op.y);
    }
    return complete_pdag(next);
}

/// Removes the x-y edge, orients y -> h and (if undirected) x -> h for every h in H,
/// and re-completes.
inline Cpdag apply_delete(const Pdag& g, const DeleteCandidate& op) {
    Pdag next = g;
    next.remove_edge(op.x, op.y);
    for (NodeId h : op.h_subset) {
        next.remove_edge(op.y, h);
        next.add_directed(op.y, h);
        if (next.has_undirected(op.x, h)) {
            next.remove_edge(op.x, h);
            next.add_directed(op.x, h);
        }
    }
    return complete_pdag(next);
}

/// Greedily applies the best insert until none improves the score.
template <LocalScorer S>
Cpdag forward_phase(S& scorer, Cpdag start, SearchTrace& trace, const SearchOptions& opts = {}) {
    Cpdag current = std::move(start);
    while (auto op = best_insert(scorer, current.graph(), opts, trace)) {
        current = apply_insert(current.graph(), *op);
        if (opts.check_invariants) detail::check_cpdag(current.graph());
        trace.steps.push_back({Phase::Forward, op->x, op->y, op->t_subset, op->score_delta,
                               trace.final_score() + op->score_delta});
    }
    return current;
}

/// Greedily applies the best delete until none improves the score.
template <LocalScorer S>
Cpdag backward_phase(S& scorer, Cpdag start, SearchTrace& trace, const SearchOptions& opts = {}) {
    Cpdag current = std::move(start);
    while (auto op = best_delete(scorer, current.graph(), opts, trace)) {
        current = apply_delete(current.graph(), *op);
        if (opts.check_invariants) detail::check_cpdag(current.graph());
        trace.steps.push_back({Phase::Backward, op->x, op->y, op->h_subset, op->score_delta,
                               trace.final_score() + op->score_delta});
    }
    return current;
}

/// Empty graph's total score: every node scored with no parents.
template <LocalScorer S>
double empty_graph_score(S& scorer) {
    double total = 0.0;
    for (NodeId v = 0; v < scorer.variables(); ++v) total += scorer.local_score(v, std::span<const NodeId>{});
    return total;
}

/// Greedy Equivalence Search from the empty graph: one forward phase, then one backward phase.
template <LocalScorer S>
GesResult run_ges(S& scorer, std::vector<std::string> labels, const SearchOptions& opts = {}) {
    if (static_cast<int>(labels.size()) != scorer.variables())
        throw NodeSetMismatch("label count does not match the scorer's variable count");
    GesResult result;
    result.trace.initial_score = empty_graph_score(scorer);
    Cpdag empty = dag_to_cpdag(Dag(std::move(labels)));
    Cpdag forward = forward_phase(scorer, std::move(empty), result.trace, opts);
    result.graph = backward_phase(scorer, std::move(forward), result.trace, opts);
    return result;
}

/// Runs GES on a dataset with the BIC family matching its kind and a private score cache.
inline GesResult run_ges(const Dataset& data, const ScoreConfig& cfg, const SearchOptions& opts = {}) {
    if (data.kind() == DataKind::Continuous) {
        GaussianScore base(data, cfg, opts.warn);
        CachedScore cached(base);
        return run_ges(cached, data.labels(), opts);
    }
    DiscreteScore base(data, cfg);
    CachedScore cached(base);
    return run_ges(cached, data.labels(), opts);
}

} // namespace cadre

#endif // CADRE_GES_HPP
