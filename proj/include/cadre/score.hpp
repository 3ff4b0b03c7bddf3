#ifndef CADRE_SCORE_HPP
#define CADRE_SCORE_HPP

#include "cadre/dataset.hpp"
#include "cadre/error.hpp"
#include "cadre/graph.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cadre {

struct ScoreConfig {
    /// Multiplier on the BIC complexity term.
    double penalty_discount = 2.0;

    void validate() const {
        if (!(penalty_discount > 0.0)) throw std::invalid_argument("penalty discount must be positive");
    }
};

using WarningSink = std::function<void(std::string_view)>;

/// Anything GES can maximize: a decomposable score queried one family at a time.
template <typename S>
concept LocalScorer = requires(S& s, NodeId child, std::span<const NodeId> parents) {
    { s.local_score(child, parents) } -> std::convertible_to<double>;
    { s.variables() } -> std::convertible_to<int>;
};

namespace detail {

inline std::vector<NodeId> canonical_parents(NodeId child, std::span<const NodeId> parents, int p) {
    if (child < 0 || child >= p) throw std::out_of_range("invalid child index");
    std::vector<NodeId> sorted(parents.begin(), parents.end());
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (sorted[i] < 0 || sorted[i] >= p) throw std::out_of_range("invalid parent index");
        if (sorted[i] == child) throw std::invalid_argument("child cannot be its own parent");
        if (i && sorted[i] == sorted[i - 1]) throw std::invalid_argument("duplicate parent");
    }
    return sorted;
}

} // namespace detail

/// Gaussian BIC local score from the MLE covariance matrix (computed once):
///   -n ln(RSS/n) - d (|parents| + 1) ln n
/// where RSS is the residual sum of squares of the regression of the child on its parents
/// plus an intercept. This is twice the maximized log-likelihood minus d k ln n, with the
/// constant n (1 + ln 2 pi) dropped. Higher is better.
class GaussianScore {
public:
    static constexpr double kVarianceFloor = 1e-12;

    GaussianScore(const Dataset& data, ScoreConfig cfg, WarningSink warn = {})
        : n_(data.rows()), cfg_(cfg), warn_(std::move(warn)) {
        cfg_.validate();
        if (data.kind() != DataKind::Continuous)
            throw std::invalid_argument("Gaussian score needs continuous data");
        const int p = data.columns();
        const Eigen::Map<const Eigen::MatrixXd> x(data.column(0).data(), static_cast<Eigen::Index>(n_), p);
        const Eigen::RowVectorXd mean = x.colwise().mean();
        const Eigen::MatrixXd centered = x.rowwise() - mean;
        cov_ = (centered.transpose() * centered) / static_cast<double>(n_);
        log_n_ = std::log(static_cast<double>(n_));
    }

    int variables() const noexcept { return static_cast<int>(cov_.rows()); }
    std::size_t samples() const noexcept { return n_; }
    const Eigen::MatrixXd& covariance() const noexcept { return cov_; }
    std::size_t degenerate_count() const noexcept { return degenerate_; }

    /// Residual variance (RSS / n) of child on parents. Throws SingularRegression.
    double residual_variance(NodeId child, std::span<const NodeId> parents) const {
        const auto pa = detail::canonical_parents(child, parents, variables());
        const auto k = static_cast<Eigen::Index>(pa.size());
        if (n_ <= pa.size() + 1)
            throw SingularRegression("regression of node " + std::to_string(child) + " on " +
                                     std::to_string(pa.size()) + " parents needs more than " +
                                     std::to_string(pa.size() + 1) + " rows");
        const double syy = cov_(child, child);
        if (k == 0) return syy;
        Eigen::MatrixXd sxx(k, k);
        Eigen::VectorXd sxy(k);
        for (Eigen::Index i = 0; i < k; ++i) {
            sxy(i) = cov_(pa[i], child);
            for (Eigen::Index j = 0; j < k; ++j) sxx(i, j) = cov_(pa[i], pa[j]);
        }
        Eigen::LLT<Eigen::MatrixXd> llt(sxx);
        bool singular = llt.info() != Eigen::Success;
        if (!singular) {
            const Eigen::MatrixXd l = llt.matrixL();
            for (Eigen::Index j = 0; j < k; ++j)
                if (!(sxx(j, j) > 0.0) || l(j, j) * l(j, j) <= 1e-12 * sxx(j, j)) singular = true;
        }
        if (singular)
            throw SingularRegression("parent covariance of node " + std::to_string(child) +
                                     " is rank-deficient (collinear columns)");
        const Eigen::VectorXd z = llt.matrixL().solve(sxy);
        return syy - z.squaredNorm();
    }

    double local_score(NodeId child, std::span<const NodeId> parents) {
        double rss_n = residual_variance(child, parents);
        if (!(rss_n >= kVarianceFloor)) {
            ++degenerate_;
            if (warn_)
                warn_("degenerate residual variance for node " + std::to_string(child) +
                      "; floored at 1e-12");
            rss_n = kVarianceFloor;
        }
        const auto k = static_cast<double>(parents.size());
        return -static_cast<double>(n_) * std::log(rss_n) - cfg_.penalty_discount * (k + 1.0) * log_n_;
    }

private:
    std::size_t n_;
    ScoreConfig cfg_;
    WarningSink warn_;
    Eigen::MatrixXd cov_;
    double log_n_ = 0.0;
    std::size_t degenerate_ = 0;
};

/// Multinomial BIC local score:
///   sum_{j,k} N_jk ln(N_jk / N_j) - (d / 2) q (r - 1) ln n
/// r is the child's cardinality and q the product of the parents' cardinalities, both taken
/// from the dataset's category lists. Higher is better.
class DiscreteScore {
public:
    DiscreteScore(const Dataset& data, ScoreConfig cfg) : data_(&data), cfg_(cfg) {
        cfg_.validate();
        if (data.kind() != DataKind::Categorical)
            throw std::invalid_argument("discrete score needs categorical data");
        log_n_ = std::log(static_cast<double>(data.rows()));
    }

    int variables() const noexcept { return data_->columns(); }

    double log_likelihood(NodeId child, std::span<const NodeId> parents) const {
        const auto pa = detail::canonical_parents(child, parents, variables());
        const std::size_t n = data_->rows();
        const std::size_t r = data_->cardinality(child);
        const std::size_t q = config_count(pa);
        std::vector<std::uint64_t> config(n, 0);
        for (NodeId p : pa) {
            const auto codes = data_->codes(p);
            const std::size_t card = data_->cardinality(p);
            for (std::size_t i = 0; i < n; ++i) config[i] = config[i] * card + codes[i];
        }
        const auto child_codes = data_->codes(child);
        double ll = 0.0;
        auto add_row = [&](auto& counts_of, auto& totals_of) {
            for (std::size_t i = 0; i < n; ++i) {
                ++counts_of(config[i] * r + child_codes[i]);
                ++totals_of(config[i]);
            }
        };
        if (q * r <= (std::size_t{1} << 22)) {
            std::vector<std::uint32_t> counts(q * r, 0), totals(q, 0);
            auto c = [&](std::uint64_t i) -> std::uint32_t& { return counts[i]; };
            auto t = [&](std::uint64_t i) -> std::uint32_t& { return totals[i]; };
            add_row(c, t);
            for (std::size_t j = 0; j < q; ++j) {
                if (totals[j] == 0) continue;
                const double nj = totals[j];
                for (std::size_t k = 0; k < r; ++k) {
                    const double njk = counts[j * r + k];
                    if (njk > 0) ll += njk * std::log(njk / nj);
                }
            }
        } else {
            std::unordered_map<std::uint64_t, std::uint32_t> counts, totals;
            auto c = [&](std::uint64_t i) -> std::uint32_t& { return counts[i]; };
            auto t = [&](std::uint64_t i) -> std::uint32_t& { return totals[i]; };
            add_row(c, t);
            // Iterate in key order so the floating-point sum is deterministic.
            std::vector<std::pair<std::uint64_t, std::uint32_t>> cells(counts.begin(), counts.end());
            std::sort(cells.begin(), cells.end());
            for (auto [key, njk] : cells) {
                const double nj = totals.at(key / r);
                ll += njk * std::log(njk / nj);
            }
        }
        return ll;
    }

    double local_score(NodeId child, std::span<const NodeId> parents) const {
        const auto pa = detail::canonical_parents(child, parents, variables());
        const double r = static_cast<double>(data_->cardinality(child));
        const double q = static_cast<double>(config_count(pa));
        return log_likelihood(child, pa) - 0.5 * cfg_.penalty_discount * q * (r - 1.0) * log_n_;
    }

private:
    std::size_t config_count(const std::vector<NodeId>& pa) const {
        std::size_t q = 1;
        for (NodeId p : pa) {
            const std::size_t card = data_->cardinality(p);
            if (q > std::numeric_limits<std::uint64_t>::max() / 64 / card)
                throw std::overflow_error("parent configuration count overflows");
            q *= card;
        }
        return q;
    }

    const Dataset* data_;
    ScoreConfig cfg_;
    double log_n_ = 0.0;
};

/// Memoizes local scores by (child, sorted parent set). Single writer.
template <LocalScorer S>
class CachedScore {
public:
    explicit CachedScore(S& inner) : inner_(&inner) {}

    int variables() const { return inner_->variables(); }

    double local_score(NodeId child, std::span<const NodeId> parents) {
        Key key;
        key.reserve(parents.size() + 1);
        key.push_back(child);
        key.insert(key.end(), parents.begin(), parents.end());
        std::sort(key.begin() + 1, key.end());
        if (auto it = cache_.find(key); it != cache_.end()) {
            ++hits_;
            return it->second;
        }
        ++misses_;
        const double value = inner_->local_score(child, std::span<const NodeId>(key).subspan(1));
        cache_.emplace(std::move(key), value);
        return value;
    }

    std::size_t hits() const noexcept { return hits_; }
    std::size_t misses() const noexcept { return misses_; }
    std::size_t size() const noexcept { return cache_.size(); }

private:
    using Key = std::vector<NodeId>;
    struct KeyHash {
        std::size_t operator()(const Key& k) const noexcept {
            std::uint64_t h = 0xCBF29CE484222325ULL;
            for (NodeId v : k) {
                h ^= static_cast<std::uint64_t>(v) + 0x9E3779B97F4A7C15ULL;
                h *= 0x100000001B3ULL;
            }
            return static_cast<std::size_t>(h);
        }
    };

    S* inner_;
    std::unordered_map<Key, double, KeyHash> cache_;
    std::size_t hits_ = 0;
    std::size_t misses_ = 0;
};

/// Sum of local scores over all nodes of a DAG.
template <LocalScorer S>
double total_score(S& scorer, const Dag& dag) {
    double total = 0.0;
    for (NodeId v = 0; v < dag.node_count(); ++v) {
        const auto pa = dag.parents(v);
        total += scorer.local_score(v, pa);
    }
    return total;
}

} // namespace cadre

#endif // CADRE_SCORE_HPP
