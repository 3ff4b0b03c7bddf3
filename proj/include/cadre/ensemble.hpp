#ifndef CADRE_ENSEMBLE_HPP
#define CADRE_ENSEMBLE_HPP

#include "cadre/cpdag.hpp"
#include "cadre/error.hpp"
#include "cadre/graph.hpp"

#include <array>
#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace cadre {

/// Per-pair counts of each PairRelation across m graphs. Pairs are stored in all_pairs order.
class VoteTable {
public:
    using Counts = std::array<std::uint32_t, 4>;

    VoteTable() = default;
    explicit VoteTable(std::vector<std::string> labels)
        : labels_(std::move(labels)), counts_(pair_count(static_cast<int>(labels_.size())), Counts{}) {}

    const std::vector<std::string>& labels() const noexcept { return labels_; }
    int node_count() const noexcept { return static_cast<int>(labels_.size()); }
    std::size_t replicates() const noexcept { return m_; }
    std::size_t pairs() const noexcept { return counts_.size(); }

    void add(const Pdag& g) {
        if (g.labels() != labels_) throw NodeSetMismatch("graph node set differs from the vote table's");
        std::size_t i = 0;
        for (auto p : all_pairs(node_count())) ++counts_[i++][static_cast<std::size_t>(g.relation(p))];
        ++m_;
    }

    /// Associative merge of two partial tallies over the same node set.
    void merge(const VoteTable& other) {
        if (other.labels_ != labels_) throw NodeSetMismatch("vote tables have different node sets");
        for (std::size_t i = 0; i < counts_.size(); ++i)
            for (std::size_t r = 0; r < 4; ++r) counts_[i][r] += other.counts_[i][r];
        m_ += other.m_;
    }

    const Counts& counts(std::size_t pair_index) const { return counts_.at(pair_index); }
    std::uint32_t count(std::size_t pair_index, PairRelation r) const {
        return counts_.at(pair_index)[static_cast<std::size_t>(r)];
    }

    /// Position of {a, b} (a < b) in all_pairs order.
    std::size_t pair_index(NodePair p) const {
        const auto n = static_cast<std::size_t>(node_count());
        const auto a = static_cast<std::size_t>(p.a), b = static_cast<std::size_t>(p.b);
        if (p.a < 0 || p.a >= p.b || b >= n) throw std::out_of_range("invalid pair");
        return a * n - a * (a + 1) / 2 + (b - a - 1);
    }

    friend bool operator==(const VoteTable&, const VoteTable&) = default;

private:
    std::vector<std::string> labels_;
    std::vector<Counts> counts_;
    std::size_t m_ = 0;
};

template <typename G>
VoteTable tally_votes(std::span<const G> graphs, std::vector<std::string> labels) {
    if (graphs.empty()) throw std::invalid_argument("cannot tally an empty graph list");
    VoteTable votes(std::move(labels));
    for (const auto& g : graphs) votes.add(static_cast<const Pdag&>(g));
    return votes;
}

inline VoteTable tally_votes(const std::vector<Cpdag>& graphs, std::vector<std::string> labels) {
    return tally_votes(std::span<const Cpdag>(graphs), std::move(labels));
}

/// Preference order used to break ties between equal vote counts, most preferred first.
using TieBreak = std::array<PairRelation, 4>;
inline constexpr TieBreak kDefaultTieBreak = {PairRelation::Absent, PairRelation::Undirected,
                                              PairRelation::AtoB, PairRelation::BtoA};

/// Per-pair plurality vote. The result may contain cycles and need not be a pattern.
inline Pdag ensemble_graph(const VoteTable& votes, const TieBreak& tie_break = kDefaultTieBreak) {
    Pdag g(votes.labels());
    std::size_t i = 0;
    for (auto p : all_pairs(votes.node_count())) {
        const auto& c = votes.counts(i++);
        PairRelation winner = tie_break[0];
        for (PairRelation r : tie_break)
            if (c[static_cast<std::size_t>(r)] > c[static_cast<std::size_t>(winner)]) winner = r;
        g.set_relation(p, winner);
    }
    return g;
}

struct EnsembleValidity {
    bool acyclic = false;
    bool is_pattern = false;
};

/// Whether an ensemble graph happens to be acyclic (directed part) and a valid CPDAG.
inline EnsembleValidity validate_ensemble(const Pdag& g) {
    EnsembleValidity v;
    try {
        Dag d(g.labels());
        for (auto [from, to] : g.directed_edges()) d.add_edge(from, to);
        v.acyclic = true;
    } catch (const GraphError&) {
        v.acyclic = false;
    }
    v.is_pattern = v.acyclic && is_cpdag(g);
    return v;
}

struct ForecastEntry {
    NodePair pair;
    PairRelation relation;
    std::uint32_t votes;
    double proportion;
};

/// Proportion of votes for every (pair, relation) cell; pairs in all_pairs order, relations in
/// absent, a_to_b, b_to_a, undirected order.
struct ForecastTable {
    std::vector<std::string> labels;
    std::size_t replicates = 0;
    std::vector<ForecastEntry> entries;
};

inline ForecastTable forecast_table(const VoteTable& votes) {
    if (votes.replicates() == 0) throw std::invalid_argument("vote table is empty");
    ForecastTable table{votes.labels(), votes.replicates(), {}};
    table.entries.reserve(votes.pairs() * 4);
    const auto m = static_cast<double>(votes.replicates());
    std::size_t i = 0;
    for (auto p : all_pairs(votes.node_count())) {
        const auto& c = votes.counts(i++);
        for (PairRelation r : kAllRelations) {
            const auto k = c[static_cast<std::size_t>(r)];
            table.entries.push_back({p, r, k, static_cast<double>(k) / m});
        }
    }
    return table;
}

namespace detail {

inline std::string shortest(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

} // namespace detail

/// CSV columns: node_a,node_b,relation,votes,proportion.
inline void write_forecast_csv(std::ostream& os, const ForecastTable& t) {
    os << "node_a,node_b,relation,votes,proportion\n";
    for (const auto& e : t.entries)
        os << t.labels[e.pair.a] << ',' << t.labels[e.pair.b] << ',' << to_string(e.relation) << ','
           << e.votes << ',' << detail::shortest(e.proportion) << '\n';
}

/// Reads a forecast CSV against a known label order.
inline ForecastTable read_forecast_csv(std::istream& is, const std::vector<std::string>& labels) {
    std::string line;
    if (!std::getline(is, line) || detail::trim(line) != "node_a,node_b,relation,votes,proportion")
        throw ParseError("forecast csv: unexpected header");
    std::unordered_map<std::string, NodeId> index;
    for (std::size_t i = 0; i < labels.size(); ++i) index.emplace(labels[i], static_cast<NodeId>(i));
    ForecastTable t{labels, 0, {}};
    int line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        auto f = detail::split(detail::trim(line), ',');
        auto fail = [&](const std::string& what) {
            throw ParseError("forecast csv line " + std::to_string(line_no) + ": " + what);
        };
        if (f.size() != 5) fail("expected 5 fields");
        auto ia = index.find(f[0]), ib = index.find(f[1]);
        if (ia == index.end() || ib == index.end()) throw NodeSetMismatch("forecast csv names an unknown node");
        if (ia->second >= ib->second) fail("node_a must precede node_b");
        ForecastEntry e{{ia->second, ib->second}, parse_relation(f[2]), 0, 0.0};
        auto [p1, e1] = std::from_chars(f[3].data(), f[3].data() + f[3].size(), e.votes);
        auto [p2, e2] = std::from_chars(f[4].data(), f[4].data() + f[4].size(), e.proportion);
        if (e1 != std::errc() || e2 != std::errc() || !(e.proportion >= 0.0 && e.proportion <= 1.0))
            fail("bad votes or proportion");
        t.entries.push_back(e);
    }
    // Replicate count recovered from the first pair's vote total.
    for (const auto& e : t.entries)
        if (e.pair == t.entries.front().pair) t.replicates += e.votes;
    return t;
}

} // namespace cadre

#endif // CADRE_ENSEMBLE_HPP
