#ifndef CADRE_METRICS_HPP
#define CADRE_METRICS_HPP

#include "cadre/cpdag.hpp"
#include "cadre/graph.hpp"

#include <cstddef>
#include <limits>

namespace cadre {

namespace detail {

inline void require_same_nodes(const Pdag& a, const Pdag& b) {
    if (a.node_count() != b.node_count() || a.labels() != b.labels())
        throw NodeSetMismatch("graphs have different node sets");
}

} // namespace detail

/// Structural Hamming distance: number of pairs whose relation differs. Any difference
/// (missing, extra, or differently oriented edge) costs exactly 1.
inline std::size_t shd(const Pdag& estimate, const Pdag& truth) {
    detail::require_same_nodes(estimate, truth);
    std::size_t distance = 0;
    for (auto p : all_pairs(truth.node_count()))
        distance += estimate.relation(p) != truth.relation(p);
    return distance;
}

struct Counts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    /// NaN when nothing was predicted.
    double precision() const noexcept {
        return tp + fp == 0 ? std::numeric_limits<double>::quiet_NaN()
                            : static_cast<double>(tp) / static_cast<double>(tp + fp);
    }
    /// NaN when the truth has nothing to recall.
    double recall() const noexcept {
        return tp + fn == 0 ? std::numeric_limits<double>::quiet_NaN()
                            : static_cast<double>(tp) / static_cast<double>(tp + fn);
    }
    friend bool operator==(const Counts&, const Counts&) = default;
};

struct ConfusionCounts {
    Counts adjacency;
    Counts arrowhead;
};

/// Adjacency counts compare skeletons. Arrowhead counts compare edge endpoints: A -> B
/// places one arrowhead at B; an undirected edge places none.
inline ConfusionCounts confusion_counts(const Pdag& estimate, const Pdag& truth) {
    detail::require_same_nodes(estimate, truth);
    ConfusionCounts c;
    auto heads = [](PairRelation r) {
        // {arrowhead at a, arrowhead at b}
        return std::pair<bool, bool>{r == PairRelation::BtoA, r == PairRelation::AtoB};
    };
    auto tally = [](Counts& counts, bool est, bool tru) {
        if (est && tru) ++counts.tp;
        else if (est) ++counts.fp;
        else if (tru) ++counts.fn;
    };
    for (auto p : all_pairs(truth.node_count())) {
        const auto re = estimate.relation(p);
        const auto rt = truth.relation(p);
        tally(c.adjacency, re != PairRelation::Absent, rt != PairRelation::Absent);
        const auto [ea, eb] = heads(re);
        const auto [ta, tb] = heads(rt);
        tally(c.arrowhead, ea, ta);
        tally(c.arrowhead, eb, tb);
    }
    return c;
}

} // namespace cadre

#endif // CADRE_METRICS_HPP
