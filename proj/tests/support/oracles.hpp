// Brute-force reference implementations used only by tests. None of these call into the
// library's algorithms; they work from definitions.
#pragma once

#include "cadre/bif.hpp"
#include "cadre/dataset.hpp"
#include "cadre/evaluation.hpp"
#include "cadre/graph.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <optional>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace oracle {

// Adjacency-matrix DAG: m[i][j] = edge i -> j.
using Matrix = std::vector<std::vector<int>>;

inline bool acyclic(const Matrix& m) {
    const int n = static_cast<int>(m.size());
    std::vector<int> state(n, 0);
    std::function<bool(int)> visit = [&](int v) {
        state[v] = 1;
        for (int w = 0; w < n; ++w) {
            if (!m[v][w]) continue;
            if (state[w] == 1) return false;
            if (state[w] == 0 && !visit(w)) return false;
        }
        state[v] = 2;
        return true;
    };
    for (int v = 0; v < n; ++v)
        if (state[v] == 0 && !visit(v)) return false;
    return true;
}

// Every labeled DAG on n nodes, by assigning none / i->j / j->i to each pair.
inline std::vector<Matrix> all_dags(int n) {
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    std::size_t total = 1;
    for (std::size_t k = 0; k < pairs.size(); ++k) total *= 3;
    std::vector<Matrix> out;
    for (std::size_t code = 0; code < total; ++code) {
        Matrix m(n, std::vector<int>(n, 0));
        std::size_t c = code;
        for (auto [i, j] : pairs) {
            const auto t = c % 3;
            c /= 3;
            if (t == 1) m[i][j] = 1;
            if (t == 2) m[j][i] = 1;
        }
        if (acyclic(m)) out.push_back(std::move(m));
    }
    return out;
}

inline cadre::Dag to_dag(const Matrix& m) {
    cadre::Dag d(static_cast<int>(m.size()));
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m.size(); ++j)
            if (m[i][j]) d.add_edge(static_cast<int>(i), static_cast<int>(j));
    return d;
}

// Markov equivalence key: skeleton plus unshielded colliders.
using ClassKey = std::pair<std::set<std::pair<int, int>>, std::set<std::tuple<int, int, int>>>;

inline ClassKey class_key(const Matrix& m) {
    const int n = static_cast<int>(m.size());
    ClassKey key;
    auto adj = [&](int a, int b) { return m[a][b] || m[b][a]; };
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (adj(i, j)) key.first.emplace(i, j);
    for (int c = 0; c < n; ++c)
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                if (m[a][c] && m[b][c] && !adj(a, b)) key.second.emplace(a, c, b);
    return key;
}

// Every DAG orientation of a PDAG's undirected edges that is acyclic and adds no unshielded
// collider absent from the PDAG's directed part.
inline std::vector<Matrix> extensions(const cadre::Pdag& p) {
    const int n = p.node_count();
    Matrix base(n, std::vector<int>(n, 0));
    for (auto [a, b] : p.directed_edges()) base[a][b] = 1;
    const auto und = p.undirected_edges();
    std::vector<Matrix> out;
    for (std::size_t mask = 0; mask < (std::size_t{1} << und.size()); ++mask) {
        Matrix m = base;
        for (std::size_t k = 0; k < und.size(); ++k) {
            if (mask >> k & 1) m[und[k].b][und[k].a] = 1;
            else m[und[k].a][und[k].b] = 1;
        }
        if (!acyclic(m)) continue;
        // Colliders among directed edges of the PDAG must be exactly the extension's colliders.
        std::set<std::tuple<int, int, int>> pdag_colliders;
        for (int c = 0; c < n; ++c)
            for (int a = 0; a < n; ++a)
                for (int b = a + 1; b < n; ++b)
                    if (p.has_directed(a, c) && p.has_directed(b, c) && !p.adjacent(a, b))
                        pdag_colliders.emplace(a, c, b);
        if (class_key(m).second != pdag_colliders) continue;
        out.push_back(std::move(m));
    }
    return out;
}

// Least squares with intercept by normal equations and Gauss-Jordan elimination.
inline double rss(const cadre::Dataset& d, int child, const std::vector<int>& parents) {
    const std::size_t n = d.rows();
    const std::size_t k = parents.size() + 1;
    std::vector<std::vector<double>> a(k, std::vector<double>(k + 1, 0.0));
    auto regressor = [&](std::size_t c, std::size_t i) {
        return c == 0 ? 1.0 : d.column(parents[c - 1])[i];
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t r = 0; r < k; ++r) {
            for (std::size_t c = 0; c < k; ++c) a[r][c] += regressor(r, i) * regressor(c, i);
            a[r][k] += regressor(r, i) * d.column(child)[i];
        }
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < k; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        std::swap(a[c], a[piv]);
        for (std::size_t r = 0; r < k; ++r) {
            if (r == c) continue;
            const double f = a[r][c] / a[c][c];
            for (std::size_t cc = c; cc <= k; ++cc) a[r][cc] -= f * a[c][cc];
        }
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double fit = 0.0;
        for (std::size_t c = 0; c < k; ++c) fit += a[c][k] / a[c][c] * regressor(c, i);
        const double e = d.column(child)[i] - fit;
        sum += e * e;
    }
    return sum;
}

inline double gaussian_local(const cadre::Dataset& d, int child, const std::vector<int>& parents, double pd) {
    const double n = static_cast<double>(d.rows());
    return -n * std::log(rss(d, child, parents) / n) -
           pd * static_cast<double>(parents.size() + 1) * std::log(n);
}

// Multinomial BIC by counting contingency cells.
inline double discrete_local(const cadre::Dataset& d, int child, const std::vector<int>& parents, double pd) {
    std::map<std::vector<int>, std::map<int, double>> counts;
    for (std::size_t i = 0; i < d.rows(); ++i) {
        std::vector<int> cfg;
        for (int p : parents) cfg.push_back(d.codes(p)[i]);
        counts[cfg][d.codes(child)[i]] += 1.0;
    }
    double ll = 0.0;
    for (auto& [cfg, row] : counts) {
        double nj = 0.0;
        for (auto& [k, c] : row) nj += c;
        for (auto& [k, c] : row) ll += c * std::log(c / nj);
    }
    double q = 1.0;
    for (int p : parents) q *= static_cast<double>(d.cardinality(p));
    const double r = static_cast<double>(d.cardinality(child));
    return ll - pd / 2.0 * q * (r - 1.0) * std::log(static_cast<double>(d.rows()));
}

// Direct-summation Brier decomposition.
struct Murphy {
    double brier, reliability, resolution, uncertainty, corrected;
};

inline Murphy murphy(const std::vector<std::pair<double, int>>& set) {
    const double n = static_cast<double>(set.size());
    double brier = 0.0, obar = 0.0;
    std::map<double, std::vector<int>> groups;
    for (auto [f, o] : set) {
        brier += (f - o) * (f - o);
        obar += o;
        groups[f].push_back(o);
    }
    brier /= n;
    obar /= n;
    double rel = 0.0, res = 0.0, bias = 0.0;
    for (auto& [f, os] : groups) {
        const double nk = static_cast<double>(os.size());
        double ok = 0.0;
        for (int o : os) ok += o;
        ok /= nk;
        rel += nk * (f - ok) * (f - ok);
        res += nk * (ok - obar) * (ok - obar);
        if (os.size() > 1) bias += nk * ok * (1.0 - ok) / (nk - 1.0);
    }
    return {brier, rel / n, res / n, obar * (1.0 - obar), rel / n - bias / n};
}

// Exact marginals of a discrete network by variable elimination over the query's ancestors.
struct Factor {
    std::vector<int> vars;
    std::vector<std::size_t> card;
    std::vector<double> vals;

    std::size_t size() const {
        std::size_t s = 1;
        for (auto c : card) s *= c;
        return s;
    }
};

inline std::vector<std::size_t> decode(std::size_t idx, const std::vector<std::size_t>& card) {
    std::vector<std::size_t> a(card.size());
    for (std::size_t k = card.size(); k-- > 0;) {
        a[k] = idx % card[k];
        idx /= card[k];
    }
    return a;
}

inline std::size_t encode(const std::vector<std::size_t>& a, const std::vector<std::size_t>& card) {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < card.size(); ++k) idx = idx * card[k] + a[k];
    return idx;
}

inline Factor multiply(const Factor& f, const Factor& g) {
    Factor h;
    h.vars = f.vars;
    h.card = f.card;
    for (std::size_t k = 0; k < g.vars.size(); ++k)
        if (std::find(h.vars.begin(), h.vars.end(), g.vars[k]) == h.vars.end()) {
            h.vars.push_back(g.vars[k]);
            h.card.push_back(g.card[k]);
        }
    h.vals.resize(h.size());
    for (std::size_t idx = 0; idx < h.vals.size(); ++idx) {
        const auto a = decode(idx, h.card);
        auto project = [&](const Factor& src) {
            std::vector<std::size_t> b(src.vars.size());
            for (std::size_t k = 0; k < src.vars.size(); ++k)
                b[k] = a[std::find(h.vars.begin(), h.vars.end(), src.vars[k]) - h.vars.begin()];
            return src.vals[encode(b, src.card)];
        };
        h.vals[idx] = project(f) * project(g);
    }
    return h;
}

inline Factor sum_out(const Factor& f, int var) {
    const auto pos = static_cast<std::size_t>(std::find(f.vars.begin(), f.vars.end(), var) - f.vars.begin());
    Factor h;
    for (std::size_t k = 0; k < f.vars.size(); ++k)
        if (k != pos) {
            h.vars.push_back(f.vars[k]);
            h.card.push_back(f.card[k]);
        }
    h.vals.assign(h.size(), 0.0);
    for (std::size_t idx = 0; idx < f.vals.size(); ++idx) {
        auto a = decode(idx, f.card);
        a.erase(a.begin() + static_cast<std::ptrdiff_t>(pos));
        h.vals[encode(a, h.card)] += f.vals[idx];
    }
    return h;
}

inline std::vector<double> marginal(const cadre::DiscreteBn& bn, int query) {
    // Ancestors of the query (other nodes are barren and sum to one).
    std::set<int> keep{query};
    std::vector<int> stack{query};
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int p : bn.cpt_parents[v])
            if (keep.insert(p).second) stack.push_back(p);
    }
    std::vector<Factor> factors;
    for (int v : keep) {
        Factor f;
        f.vars = bn.cpt_parents[v];
        f.vars.push_back(v);
        for (int u : f.vars) f.card.push_back(bn.categories[u].size());
        f.vals = bn.cpts[v];
        factors.push_back(std::move(f));
    }
    std::set<int> remaining(keep);
    remaining.erase(query);
    while (!remaining.empty()) {
        // Greedy: eliminate the variable whose combined factor is smallest.
        int best = -1;
        std::size_t best_size = 0;
        for (int v : remaining) {
            std::set<int> scope;
            for (auto& f : factors)
                if (std::find(f.vars.begin(), f.vars.end(), v) != f.vars.end()) scope.insert(f.vars.begin(), f.vars.end());
            std::size_t s = 1;
            for (int u : scope) s *= bn.categories[u].size();
            if (best < 0 || s < best_size) best = v, best_size = s;
        }
        remaining.erase(best);
        std::vector<Factor> rest;
        std::optional<Factor> prod;
        for (auto& f : factors) {
            if (std::find(f.vars.begin(), f.vars.end(), best) == f.vars.end()) rest.push_back(std::move(f));
            else prod = prod ? multiply(*prod, f) : f;
        }
        rest.push_back(sum_out(*prod, best));
        factors = std::move(rest);
    }
    Factor all = factors.front();
    for (std::size_t k = 1; k < factors.size(); ++k) all = multiply(all, factors[k]);
    std::vector<double> out(bn.categories[query].size(), 0.0);
    for (std::size_t idx = 0; idx < all.vals.size(); ++idx) {
        const auto a = decode(idx, all.card);
        const auto pos = std::find(all.vars.begin(), all.vars.end(), query) - all.vars.begin();
        out[a[pos]] += all.vals[idx];
    }
    double z = 0.0;
    for (double v : out) z += v;
    for (double& v : out) v /= z;
    return out;
}

inline std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

} // namespace oracle
