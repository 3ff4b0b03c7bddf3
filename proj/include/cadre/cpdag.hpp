#ifndef CADRE_CPDAG_HPP
#define CADRE_CPDAG_HPP

#include "cadre/error.hpp"
#include "cadre/graph.hpp"

#include <algorithm>
#include <tuple>
#include <vector>

namespace cadre {

class Cpdag;
Cpdag dag_to_cpdag(const Dag& dag);

/// Completed PDAG: the unique representative of a Markov equivalence class.
/// Instances only come out of dag_to_cpdag / complete_pdag, or from_pdag after validation.
class Cpdag {
public:
    Cpdag() = default;

    /// Validates that `p` is already a completed pattern; throws GraphError otherwise.
    static Cpdag from_pdag(const Pdag& p);

    const Pdag& graph() const noexcept { return g_; }
    operator const Pdag&() const noexcept { return g_; } // NOLINT(google-explicit-constructor)

    int node_count() const noexcept { return g_.node_count(); }
    const std::vector<std::string>& labels() const noexcept { return g_.labels(); }
    PairRelation relation(NodePair p) const { return g_.relation(p); }
    std::size_t edge_count() const noexcept { return g_.edge_count(); }

    friend bool operator==(const Cpdag&, const Cpdag&) = default;

private:
    explicit Cpdag(Pdag g) : g_(std::move(g)) {}
    friend Cpdag dag_to_cpdag(const Dag& dag);

    Pdag g_;
};

inline PairRelation relation_of(const Cpdag& g, NodePair pair) { return g.relation(pair); }

/// Chickering's edge-labelling algorithm: order the edges, then mark each one compelled
/// or reversible. Compelled edges stay directed; reversible edges become undirected.
inline Cpdag dag_to_cpdag(const Dag& dag) {
    const int n = dag.node_count();
    const auto topo = dag.topological_order();
    std::vector<int> position(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) position[topo[i]] = i;

    // Edge order: sinks-of-order ascending; within a child, parents by descending position.
    std::vector<std::pair<NodeId, NodeId>> ordered;
    for (NodeId y : topo) {
        auto pa = dag.parents(y);
        std::sort(pa.begin(), pa.end(),
                  [&](NodeId a, NodeId b) { return position[a] > position[b]; });
        for (NodeId x : pa) ordered.emplace_back(x, y);
    }

    enum class Label : std::uint8_t { Unknown, Compelled, Reversible };
    std::vector<Label> label(static_cast<std::size_t>(n) * n, Label::Unknown);
    auto at = [&](NodeId a, NodeId b) -> Label& { return label[static_cast<std::size_t>(a) * n + b]; };

    for (auto [x, y] : ordered) {
        if (at(x, y) != Label::Unknown) continue;
        const auto parents_y = dag.parents(y);
        bool finished = false;
        for (NodeId w : dag.parents(x)) {
            if (at(w, x) != Label::Compelled) continue;
            if (!dag.has_edge(w, y)) {
                for (NodeId z : parents_y) at(z, y) = Label::Compelled;
                finished = true;
                break;
            }
            at(w, y) = Label::Compelled;
        }
        if (finished) continue;
        bool compelled = false;
        for (NodeId z : parents_y)
            if (z != x && !dag.has_edge(z, x)) {
                compelled = true;
                break;
            }
        const Label fill = compelled ? Label::Compelled : Label::Reversible;
        for (NodeId z : parents_y)
            if (at(z, y) == Label::Unknown) at(z, y) = fill;
    }

    Pdag out(dag.labels());
    for (auto [x, y] : dag.edges()) {
        if (at(x, y) == Label::Compelled) out.add_directed(x, y);
        else out.add_undirected(x, y);
    }
    return Cpdag(std::move(out));
}

/// Dor-Tarsi: repeatedly remove a node that is a sink among directed edges and whose
/// undirected neighbours are adjacent to all of its other adjacents, orienting those
/// undirected edges into it. The lowest-index eligible node is taken at every step.
inline Dag consistent_extension(const Pdag& pdag) {
    const int n = pdag.node_count();
    Dag dag(pdag.labels());
    std::vector<bool> alive(static_cast<std::size_t>(n), true);
    std::vector<std::pair<NodeId, NodeId>> edges = pdag.directed_edges();

    for (int removed = 0; removed < n; ++removed) {
        NodeId pick = -1;
        for (NodeId x = 0; x < n && pick < 0; ++x) {
            if (!alive[x]) continue;
            bool sink = true;
            for (NodeId c : pdag.children(x))
                if (alive[c]) {
                    sink = false;
                    break;
                }
            if (!sink) continue;
            std::vector<NodeId> adj;
            for (NodeId z : pdag.adjacents(x))
                if (alive[z]) adj.push_back(z);
            bool ok = true;
            for (NodeId y : pdag.neighbors(x)) {
                if (!alive[y]) continue;
                for (NodeId z : adj)
                    if (z != y && !pdag.adjacent(y, z)) {
                        ok = false;
                        break;
                    }
                if (!ok) break;
            }
            if (ok) pick = x;
        }
        if (pick < 0) throw NoConsistentExtension();
        for (NodeId y : pdag.neighbors(pick))
            if (alive[y]) edges.emplace_back(y, pick);
        alive[pick] = false;
    }
    std::sort(edges.begin(), edges.end());
    for (auto [from, to] : edges) dag.add_edge(from, to);
    return dag;
}

/// Completes a PDAG to the CPDAG of its equivalence class. Throws NoConsistentExtension.
inline Cpdag complete_pdag(const Pdag& pdag) { return dag_to_cpdag(consistent_extension(pdag)); }

inline bool is_cpdag(const Pdag& p) {
    try {
        return complete_pdag(p).graph() == p;
    } catch (const NoConsistentExtension&) {
        return false;
    } catch (const GraphError&) {
        return false;
    }
}

inline Cpdag Cpdag::from_pdag(const Pdag& p) {
    if (!is_cpdag(p)) throw GraphError("graph is not a completed PDAG");
    Cpdag c = complete_pdag(p);
    c.g_ = p; // keep the caller's labels
    return c;
}

/// Colliders a -> c <- b with a, b non-adjacent, as (a, c, b) with a < b, sorted.
inline std::vector<std::tuple<NodeId, NodeId, NodeId>> v_structures(const Dag& dag) {
    std::vector<std::tuple<NodeId, NodeId, NodeId>> out;
    for (NodeId c = 0; c < dag.node_count(); ++c) {
        const auto pa = dag.parents(c);
        for (std::size_t i = 0; i < pa.size(); ++i)
            for (std::size_t j = i + 1; j < pa.size(); ++j)
                if (!dag.adjacent(pa[i], pa[j])) out.emplace_back(pa[i], c, pa[j]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace cadre

#endif // CADRE_CPDAG_HPP
