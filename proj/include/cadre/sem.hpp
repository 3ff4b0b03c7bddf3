#ifndef CADRE_SEM_HPP
#define CADRE_SEM_HPP

#include "cadre/dataset.hpp"
#include "cadre/error.hpp"
#include "cadre/graph.hpp"
#include "cadre/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <vector>

namespace cadre {

struct RandomDagSpec {
    int num_nodes = 100;
    int num_edges = 100;
    std::uint64_t seed = 0;
};

/// Uniform over [neg_low, neg_high] U [pos_low, pos_high], half the mass on each interval.
struct SplitUniform {
    double neg_low = -1.5;
    double neg_high = -0.5;
    double pos_low = 0.5;
    double pos_high = 1.5;

    void validate() const {
        if (!(neg_low < neg_high && neg_high <= 0.0 && 0.0 <= pos_low && pos_low < pos_high))
            throw std::invalid_argument("SplitUniform requires neg_low < neg_high <= 0 <= pos_low < pos_high");
    }

    double draw(Rng& rng) const {
        return rng.uniform() < 0.5 ? rng.uniform(neg_low, neg_high) : rng.uniform(pos_low, pos_high);
    }
};

struct LinearSem {
    Dag dag;
    std::map<std::pair<NodeId, NodeId>, double> edge_weights;
    std::vector<double> noise_variances;

    /// W(i, j) = weight of i -> j.
    Eigen::MatrixXd weight_matrix() const {
        const int p = dag.node_count();
        Eigen::MatrixXd w = Eigen::MatrixXd::Zero(p, p);
        for (auto& [edge, weight] : edge_weights) w(edge.first, edge.second) = weight;
        return w;
    }

    /// Population covariance (I - W)^{-T} D (I - W)^{-1} for row-vector samples x = x W + e.
    Eigen::MatrixXd implied_covariance() const {
        const int p = dag.node_count();
        const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(p, p) - weight_matrix();
        const Eigen::MatrixXd inv = a.inverse();
        Eigen::VectorXd d(p);
        for (int i = 0; i < p; ++i) d(i) = noise_variances[static_cast<std::size_t>(i)];
        return inv.transpose() * d.asDiagonal() * inv;
    }
};

/// Random forward DAG: a uniformly random node ordering, then `num_edges` distinct
/// forward pairs drawn uniformly without replacement.
inline Dag random_forward_dag(const RandomDagSpec& spec, std::vector<std::string> labels = {}) {
    if (spec.num_nodes < 1) throw std::invalid_argument("num_nodes must be positive");
    if (spec.num_edges < 0 || static_cast<std::size_t>(spec.num_edges) > pair_count(spec.num_nodes))
        throw InfeasibleEdgeCount("cannot place " + std::to_string(spec.num_edges) + " edges on " +
                                  std::to_string(spec.num_nodes) + " nodes");
    if (labels.empty()) labels = default_labels(spec.num_nodes);
    if (static_cast<int>(labels.size()) != spec.num_nodes)
        throw std::invalid_argument("label count does not match num_nodes");

    Rng rng(derive_seed(spec.seed, "random-forward-dag"));
    std::vector<NodeId> order(static_cast<std::size_t>(spec.num_nodes));
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span<NodeId>(order));

    // Positional pairs (i < j) in the drawn order; partial Fisher-Yates picks the edges.
    auto pairs = all_pairs(spec.num_nodes);
    Dag dag(std::move(labels));
    for (int k = 0; k < spec.num_edges; ++k) {
        const auto pick = k + static_cast<std::size_t>(rng.below(pairs.size() - k));
        std::swap(pairs[k], pairs[pick]);
        dag.add_edge(order[pairs[k].a], order[pairs[k].b]);
    }
    return dag;
}

inline LinearSem draw_sem_parameters(const Dag& dag, const SplitUniform& weights, double var_low,
                                     double var_high, std::uint64_t seed) {
    weights.validate();
    if (!(0.0 < var_low && var_low < var_high))
        throw std::invalid_argument("variance bounds must satisfy 0 < low < high");
    LinearSem sem{dag, {}, {}};
    Rng weight_rng(derive_seed(seed, "edge-weights"));
    for (auto edge : dag.edges()) sem.edge_weights[edge] = weights.draw(weight_rng);
    Rng var_rng(derive_seed(seed, "noise-variances"));
    sem.noise_variances.resize(static_cast<std::size_t>(dag.node_count()));
    for (auto& v : sem.noise_variances) v = var_rng.uniform(var_low, var_high);
    return sem;
}

/// i.i.d. rows; each variable is the weighted sum of its parents plus N(0, variance) noise,
/// generated in topological order.
inline Dataset simulate_sem(const LinearSem& sem, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample size must be at least 1");
    const int p = sem.dag.node_count();
    std::vector<double> values(n * static_cast<std::size_t>(p));
    Rng rng(derive_seed(seed, "sem-noise"));
    for (NodeId v : sem.dag.topological_order()) {
        const double sd = std::sqrt(sem.noise_variances[static_cast<std::size_t>(v)]);
        double* col = values.data() + static_cast<std::size_t>(v) * n;
        for (std::size_t i = 0; i < n; ++i) col[i] = sd * rng.normal();
        for (NodeId parent : sem.dag.parents(v)) {
            const double w = sem.edge_weights.at({parent, v});
            const double* pc = values.data() + static_cast<std::size_t>(parent) * n;
            for (std::size_t i = 0; i < n; ++i) col[i] += w * pc[i];
        }
    }
    return Dataset::continuous(sem.dag.labels(), n, std::move(values));
}

} // namespace cadre

#endif // CADRE_SEM_HPP
