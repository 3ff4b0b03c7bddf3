#ifndef CADRE_GRAPH_HPP
#define CADRE_GRAPH_HPP

#include "cadre/error.hpp"

#include <algorithm>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace cadre {

using NodeId = int;

/// Relationship between an unordered pair {a, b} with a < b by node index.
enum class PairRelation : std::uint8_t { Absent = 0, AtoB = 1, BtoA = 2, Undirected = 3 };

inline constexpr PairRelation kAllRelations[] = {PairRelation::Absent, PairRelation::AtoB,
                                                 PairRelation::BtoA, PairRelation::Undirected};

constexpr std::string_view to_string(PairRelation r) noexcept {
    switch (r) {
    case PairRelation::Absent: return "absent";
    case PairRelation::AtoB: return "a_to_b";
    case PairRelation::BtoA: return "b_to_a";
    case PairRelation::Undirected: return "undirected";
    }
    return "absent";
}

inline PairRelation parse_relation(std::string_view s) {
    for (PairRelation r : kAllRelations) {
        if (to_string(r) == s) return r;
    }
    throw ParseError("unknown relation '" + std::string(s) + "'");
}

struct NodePair {
    NodeId a;
    NodeId b;
    friend bool operator==(const NodePair&, const NodePair&) = default;
    friend auto operator<=>(const NodePair&, const NodePair&) = default;
};

/// Number of unordered pairs on n nodes.
constexpr std::size_t pair_count(int n) noexcept {
    return n < 2 ? 0 : static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2;
}

/// All unordered pairs (a < b) in lexicographic order.
inline std::vector<NodePair> all_pairs(int n) {
    std::vector<NodePair> out;
    out.reserve(pair_count(n));
    for (NodeId a = 0; a < n; ++a)
        for (NodeId b = a + 1; b < n; ++b) out.push_back({a, b});
    return out;
}

inline std::vector<std::string> default_labels(int n) {
    std::vector<std::string> labels;
    labels.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) labels.push_back("X" + std::to_string(i + 1));
    return labels;
}

/// Partially directed graph over positional node ids. At most one relationship per pair;
/// cycles are allowed (ensemble graphs need not be acyclic).
class Pdag {
public:
    Pdag() = default;
    explicit Pdag(int n) : Pdag(default_labels(n)) {}
    explicit Pdag(std::vector<std::string> labels)
        : n_(static_cast<int>(labels.size())), labels_(std::move(labels)),
          marks_(static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_), Mark::None) {}

    int node_count() const noexcept { return n_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }

    void add_directed(NodeId from, NodeId to) {
        check_free_pair(from, to);
        mark(from, to) = Mark::Out;
        mark(to, from) = Mark::In;
    }

    void add_undirected(NodeId a, NodeId b) {
        check_free_pair(a, b);
        mark(a, b) = Mark::Both;
        mark(b, a) = Mark::Both;
    }

    void remove_edge(NodeId a, NodeId b) {
        check_node(a);
        check_node(b);
        mark(a, b) = Mark::None;
        mark(b, a) = Mark::None;
    }

    /// Replaces whatever relation the pair has. `pair.a < pair.b` is required.
    void set_relation(NodePair pair, PairRelation r) {
        check_pair(pair);
        remove_edge(pair.a, pair.b);
        switch (r) {
        case PairRelation::Absent: break;
        case PairRelation::AtoB: add_directed(pair.a, pair.b); break;
        case PairRelation::BtoA: add_directed(pair.b, pair.a); break;
        case PairRelation::Undirected: add_undirected(pair.a, pair.b); break;
        }
    }

    PairRelation relation(NodePair pair) const {
        check_pair(pair);
        switch (mark(pair.a, pair.b)) {
        case Mark::Out: return PairRelation::AtoB;
        case Mark::In: return PairRelation::BtoA;
        case Mark::Both: return PairRelation::Undirected;
        case Mark::None: break;
        }
        return PairRelation::Absent;
    }

    bool has_directed(NodeId from, NodeId to) const { return mark_checked(from, to) == Mark::Out; }
    bool has_undirected(NodeId a, NodeId b) const { return mark_checked(a, b) == Mark::Both; }
    bool adjacent(NodeId a, NodeId b) const { return mark_checked(a, b) != Mark::None; }

    /// Nodes x with x -> y.
    std::vector<NodeId> parents(NodeId y) const { return collect(y, Mark::In); }
    /// Nodes z with y -> z.
    std::vector<NodeId> children(NodeId y) const { return collect(y, Mark::Out); }
    /// Nodes z with y --- z.
    std::vector<NodeId> neighbors(NodeId y) const { return collect(y, Mark::Both); }

    std::vector<NodeId> adjacents(NodeId y) const {
        check_node(y);
        std::vector<NodeId> out;
        for (NodeId z = 0; z < n_; ++z)
            if (mark(y, z) != Mark::None) out.push_back(z);
        return out;
    }

    std::vector<std::pair<NodeId, NodeId>> directed_edges() const {
        std::vector<std::pair<NodeId, NodeId>> out;
        for (auto [a, b] : all_pairs(n_)) {
            if (mark(a, b) == Mark::Out) out.emplace_back(a, b);
            else if (mark(a, b) == Mark::In) out.emplace_back(b, a);
        }
        return out;
    }

    std::vector<NodePair> undirected_edges() const {
        std::vector<NodePair> out;
        for (auto p : all_pairs(n_))
            if (mark(p.a, p.b) == Mark::Both) out.push_back(p);
        return out;
    }

    std::size_t edge_count() const noexcept {
        std::size_t count = 0;
        for (NodeId a = 0; a < n_; ++a)
            for (NodeId b = a + 1; b < n_; ++b) count += mark(a, b) != Mark::None;
        return count;
    }

    friend bool operator==(const Pdag& x, const Pdag& y) {
        return x.n_ == y.n_ && x.marks_ == y.marks_;
    }

private:
    enum class Mark : std::uint8_t { None, Out, In, Both };

    Mark& mark(NodeId a, NodeId b) noexcept { return marks_[static_cast<std::size_t>(a) * n_ + b]; }
    Mark mark(NodeId a, NodeId b) const noexcept {
        return marks_[static_cast<std::size_t>(a) * n_ + b];
    }
    Mark mark_checked(NodeId a, NodeId b) const {
        check_node(a);
        check_node(b);
        return mark(a, b);
    }

    std::vector<NodeId> collect(NodeId y, Mark m) const {
        check_node(y);
        std::vector<NodeId> out;
        for (NodeId z = 0; z < n_; ++z)
            if (mark(y, z) == m) out.push_back(z);
        return out;
    }

    void check_node(NodeId v) const {
        if (v < 0 || v >= n_) throw std::out_of_range("invalid node index " + std::to_string(v));
    }
    void check_pair(NodePair p) const {
        check_node(p.a);
        check_node(p.b);
        if (p.a >= p.b) throw std::out_of_range("pair must satisfy a < b");
    }
    void check_free_pair(NodeId a, NodeId b) const {
        check_node(a);
        check_node(b);
        if (a == b) throw GraphError("self-loop on node " + std::to_string(a));
        if (mark(a, b) != Mark::None)
            throw GraphError("pair {" + std::to_string(a) + "," + std::to_string(b) +
                             "} already has an edge");
    }

    int n_ = 0;
    std::vector<std::string> labels_;
    std::vector<Mark> marks_;
};

/// Directed acyclic graph. add_edge rejects edges that would close a cycle.
class Dag {
public:
    Dag() = default;
    explicit Dag(int n) : g_(n) {}
    explicit Dag(std::vector<std::string> labels) : g_(std::move(labels)) {}

    static Dag from_pdag(const Pdag& p) {
        if (!p.undirected_edges().empty()) throw GraphError("graph has undirected edges");
        Dag d(p.labels());
        for (auto [from, to] : p.directed_edges()) d.add_edge(from, to);
        return d;
    }

    int node_count() const noexcept { return g_.node_count(); }
    const std::vector<std::string>& labels() const noexcept { return g_.labels(); }

    void add_edge(NodeId from, NodeId to) {
        if (from != to && from >= 0 && to >= 0 && from < node_count() && to < node_count() &&
            reaches(to, from))
            throw GraphError("edge " + std::to_string(from) + "->" + std::to_string(to) +
                             " creates a cycle");
        g_.add_directed(from, to);
    }

    void remove_edge(NodeId from, NodeId to) { g_.remove_edge(from, to); }

    bool has_edge(NodeId from, NodeId to) const { return g_.has_directed(from, to); }
    bool adjacent(NodeId a, NodeId b) const { return g_.adjacent(a, b); }
    std::vector<NodeId> parents(NodeId y) const { return g_.parents(y); }
    std::vector<NodeId> children(NodeId y) const { return g_.children(y); }
    std::vector<std::pair<NodeId, NodeId>> edges() const { return g_.directed_edges(); }
    std::size_t edge_count() const noexcept { return g_.edge_count(); }
    PairRelation relation(NodePair p) const { return g_.relation(p); }

    /// Kahn's algorithm, smallest available index first.
    std::vector<NodeId> topological_order() const {
        const int n = node_count();
        std::vector<int> indegree(static_cast<std::size_t>(n));
        for (NodeId v = 0; v < n; ++v) indegree[v] = static_cast<int>(g_.parents(v).size());
        std::vector<NodeId> order;
        order.reserve(static_cast<std::size_t>(n));
        std::vector<bool> done(static_cast<std::size_t>(n), false);
        for (int step = 0; step < n; ++step) {
            NodeId next = -1;
            for (NodeId v = 0; v < n; ++v)
                if (!done[v] && indegree[v] == 0) {
                    next = v;
                    break;
                }
            done[next] = true;
            order.push_back(next);
            for (NodeId c : g_.children(next)) --indegree[c];
        }
        return order;
    }

    /// True if a directed path from `from` to `to` exists (a node reaches itself).
    bool reaches(NodeId from, NodeId to) const {
        std::vector<bool> seen(static_cast<std::size_t>(node_count()), false);
        std::vector<NodeId> stack{from};
        seen[from] = true;
        while (!stack.empty()) {
            NodeId v = stack.back();
            stack.pop_back();
            if (v == to) return true;
            for (NodeId c : g_.children(v))
                if (!seen[c]) {
                    seen[c] = true;
                    stack.push_back(c);
                }
        }
        return false;
    }

    const Pdag& as_pdag() const noexcept { return g_; }

    friend bool operator==(const Dag&, const Dag&) = default;

private:
    Pdag g_;
};

inline PairRelation relation_of(const Pdag& g, NodePair pair) { return g.relation(pair); }
inline PairRelation relation_of(const Dag& g, NodePair pair) { return g.relation(pair); }

// ---------------------------------------------------------------------------
// Text format:
//   nodes: A,B,C
//   A --> B
//   B --- C
// Blank lines and lines starting with '#' are ignored.

inline void write_graph(std::ostream& os, const Pdag& g) {
    os << "nodes: ";
    for (std::size_t i = 0; i < g.labels().size(); ++i) {
        if (i) os << ',';
        os << g.labels()[i];
    }
    os << '\n';
    for (auto p : all_pairs(g.node_count())) {
        const auto& la = g.labels()[p.a];
        const auto& lb = g.labels()[p.b];
        switch (g.relation(p)) {
        case PairRelation::Absent: break;
        case PairRelation::AtoB: os << la << " --> " << lb << '\n'; break;
        case PairRelation::BtoA: os << lb << " --> " << la << '\n'; break;
        case PairRelation::Undirected: os << la << " --- " << lb << '\n'; break;
        }
    }
}

inline std::string to_text(const Pdag& g) {
    std::ostringstream os;
    write_graph(os, g);
    return os.str();
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.emplace_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

} // namespace detail

inline Pdag read_graph(std::istream& is) {
    std::string line;
    std::optional<Pdag> g;
    std::unordered_map<std::string, NodeId> index;
    int line_no = 0;
    auto fail = [&](const std::string& what) {
        throw ParseError("graph line " + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(is, line)) {
        ++line_no;
        auto text = detail::trim(line);
        if (text.empty() || text.front() == '#') continue;
        if (!g) {
            constexpr std::string_view prefix = "nodes:";
            if (text.substr(0, prefix.size()) != prefix) fail("expected 'nodes:' header");
            std::vector<std::string> labels;
            auto rest = detail::trim(text.substr(prefix.size()));
            if (!rest.empty()) {
                for (auto& l : detail::split(rest, ',')) {
                    auto t = std::string(detail::trim(l));
                    if (t.empty()) fail("empty node label");
                    if (!index.emplace(t, static_cast<NodeId>(labels.size())).second)
                        fail("duplicate node label '" + t + "'");
                    labels.push_back(std::move(t));
                }
            }
            g.emplace(std::move(labels));
            continue;
        }
        bool directed = true;
        auto pos = text.find(" --> ");
        if (pos == std::string_view::npos) {
            pos = text.find(" --- ");
            directed = false;
        }
        if (pos == std::string_view::npos) fail("expected 'A --> B' or 'A --- B'");
        auto lhs = std::string(detail::trim(text.substr(0, pos)));
        auto rhs = std::string(detail::trim(text.substr(pos + 5)));
        auto ia = index.find(lhs);
        auto ib = index.find(rhs);
        if (ia == index.end()) fail("unknown node '" + lhs + "'");
        if (ib == index.end()) fail("unknown node '" + rhs + "'");
        try {
            if (directed) g->add_directed(ia->second, ib->second);
            else g->add_undirected(ia->second, ib->second);
        } catch (const GraphError& e) {
            fail(e.what());
        }
    }
    if (!g) throw ParseError("graph text has no 'nodes:' header");
    return *std::move(g);
}

inline Pdag graph_from_text(std::string_view text) {
    std::istringstream is{std::string(text)};
    return read_graph(is);
}

} // namespace cadre

#endif // CADRE_GRAPH_HPP
