#include "cadre/bif.hpp"
#include "cadre/ges.hpp"
#include "cadre/sem.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace cadre;

namespace {

Dataset columns(std::vector<std::vector<double>> cols) {
    const std::size_t n = cols.front().size();
    std::vector<double> v;
    for (auto& c : cols) v.insert(v.end(), c.begin(), c.end());
    return Dataset::continuous(default_labels(static_cast<int>(cols.size())), n, std::move(v));
}

double best_dag_score(GaussianScore& s, int p) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& m : oracle::all_dags(p)) best = std::max(best, total_score(s, oracle::to_dag(m)));
    return best;
}

} // namespace

TEST(RunGes, IndependentColumnsGiveEmptyGraph) {
    Rng rng(1);
    std::vector<double> a(1000), b(1000);
    for (auto& v : a) v = rng.normal();
    for (auto& v : b) v = rng.normal();
    const auto r = run_ges(columns({a, b}), {2.0});
    EXPECT_EQ(r.graph.edge_count(), 0u);
    EXPECT_TRUE(r.trace.steps.empty());
}

TEST(RunGes, StrongDependenceGivesOneUndirectedEdge) {
    Rng rng(2);
    std::vector<double> x(1000), y(1000);
    for (std::size_t i = 0; i < 1000; ++i) {
        x[i] = rng.normal();
        y[i] = x[i] + 0.1 * rng.normal();
    }
    const auto data = columns({x, y});
    const auto r = run_ges(data, {2.0});
    EXPECT_EQ(relation_of(r.graph, {0, 1}), PairRelation::Undirected);
    GaussianScore s(data, {2.0});
    EXPECT_NEAR(r.trace.final_score(), best_dag_score(s, 2), 1e-9);
}

TEST(RunGes, ColliderIsRecovered) {
    Rng rng(3);
    const std::size_t n = 2000;
    std::vector<double> a(n), b(n), c(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = rng.normal();
        b[i] = rng.normal();
        c[i] = a[i] + b[i] + 0.5 * rng.normal();
    }
    const auto data = columns({a, b, c});
    const auto r = run_ges(data, {2.0});
    Pdag expected(3);
    expected.add_directed(0, 2);
    expected.add_directed(1, 2);
    EXPECT_EQ(r.graph.graph(), expected);
    GaussianScore s(data, {2.0});
    EXPECT_NEAR(r.trace.final_score(), best_dag_score(s, 3), 1e-9);
}

TEST(RunGes, TraceIsStrictlyIncreasingAndConsistent) {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const auto dag = random_forward_dag({10, 12, seed});
        const auto data = simulate_sem(draw_sem_parameters(dag, SplitUniform{}, 1, 3, seed), 400, seed);
        SearchOptions opts;
        opts.check_invariants = true;
        const auto r = run_ges(data, {2.0}, opts);
        double prev = r.trace.initial_score;
        bool backward = false;
        for (const auto& step : r.trace.steps) {
            EXPECT_GT(step.delta, 1e-10);
            EXPECT_NEAR(step.total_score, prev + step.delta, 1e-9 * std::abs(prev));
            EXPECT_GT(step.total_score, prev);
            if (step.phase == Phase::Backward) backward = true;
            else EXPECT_FALSE(backward) << "insert after a delete";
            prev = step.total_score;
        }
        // The reported score equals the score of any consistent extension.
        GaussianScore s(data, {2.0});
        const double direct = total_score(s, consistent_extension(r.graph.graph()));
        EXPECT_NEAR(r.trace.final_score(), direct, 1e-8 * std::abs(direct));
        EXPECT_TRUE(is_cpdag(r.graph.graph()));
    }
}

TEST(RunGes, Deterministic) {
    const auto dag = random_forward_dag({12, 15, 9});
    const auto data = simulate_sem(draw_sem_parameters(dag, SplitUniform{}, 1, 3, 9), 300, 9);
    const auto a = run_ges(data, {2.0});
    const auto b = run_ges(data, {2.0});
    EXPECT_EQ(a.graph.graph(), b.graph.graph());
    ASSERT_EQ(a.trace.steps.size(), b.trace.steps.size());
    for (std::size_t i = 0; i < a.trace.steps.size(); ++i) {
        EXPECT_EQ(a.trace.steps[i].x, b.trace.steps[i].x);
        EXPECT_EQ(a.trace.steps[i].y, b.trace.steps[i].y);
        EXPECT_EQ(a.trace.steps[i].subset, b.trace.steps[i].subset);
        EXPECT_EQ(a.trace.steps[i].delta, b.trace.steps[i].delta);
    }
}

TEST(RunGes, SmallInstancesReachTheBruteForceOptimum) {
    int optimal = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto dag = random_forward_dag({3, static_cast<int>(seed % 4), seed});
        const auto data = simulate_sem(draw_sem_parameters(dag, SplitUniform{}, 1, 3, seed), 500, seed);
        GaussianScore s(data, {2.0});
        const double best = best_dag_score(s, 3);
        const auto r = run_ges(data, {2.0});
        EXPECT_LE(r.trace.final_score(), best + 1e-9 * std::abs(best));
        optimal += std::abs(r.trace.final_score() - best) <= 1e-9 * std::abs(best);
    }
    EXPECT_GE(optimal, 18);
}

TEST(Phases, ForwardOnlyAddsBackwardOnlyRemoves) {
    const auto dag = random_forward_dag({8, 10, 4});
    const auto data = simulate_sem(draw_sem_parameters(dag, SplitUniform{}, 1, 3, 4), 500, 4);
    GaussianScore s(data, {2.0});
    SearchTrace trace;
    trace.initial_score = empty_graph_score(s);
    const auto fwd = forward_phase(s, dag_to_cpdag(Dag(data.labels())), trace);
    EXPECT_EQ(trace.count(Phase::Backward), 0u);
    EXPECT_EQ(fwd.edge_count(), trace.count(Phase::Forward));
    // No improving insert remains.
    EXPECT_FALSE(best_insert(s, fwd.graph(), SearchOptions{}, trace).has_value());
    const auto edges_before = fwd.edge_count();
    const auto bwd = backward_phase(s, fwd, trace);
    EXPECT_EQ(bwd.edge_count(), edges_before - trace.count(Phase::Backward));
    EXPECT_FALSE(best_delete(s, bwd.graph(), SearchOptions{}, trace).has_value());
}

TEST(Phases, BackwardFromCompleteGraphPrunes) {
    // Starting backward search from the complete pattern recovers a sparse graph on chain data.
    Rng rng(5);
    const std::size_t n = 1000;
    std::vector<double> a(n), b(n), c(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = rng.normal();
        b[i] = a[i] + rng.normal();
        c[i] = b[i] + rng.normal();
    }
    const auto data = columns({a, b, c});
    GaussianScore s(data, {2.0});
    Dag full(3);
    full.add_edge(0, 1);
    full.add_edge(1, 2);
    full.add_edge(0, 2);
    SearchTrace trace;
    trace.initial_score = total_score(s, full);
    const auto out = backward_phase(s, dag_to_cpdag(full), trace);
    EXPECT_EQ(out.edge_count(), 2u);
    EXPECT_EQ(relation_of(out, {0, 2}), PairRelation::Absent);
}

TEST(Operators, InsertValidityAgainstEnumeration) {
    // Every applied insert yields a graph whose extensions score exactly the trace total.
    for (std::uint64_t seed = 11; seed <= 16; ++seed) {
        const auto dag = random_forward_dag({5, 6, seed});
        const auto data = simulate_sem(draw_sem_parameters(dag, SplitUniform{}, 1, 3, seed), 300, seed);
        GaussianScore s(data, {2.0});
        SearchTrace trace;
        trace.initial_score = empty_graph_score(s);
        Cpdag g = dag_to_cpdag(Dag(data.labels()));
        while (auto op = best_insert(s, g.graph(), SearchOptions{}, trace)) {
            g = apply_insert(g.graph(), *op);
            trace.steps.push_back({Phase::Forward, op->x, op->y, op->t_subset, op->score_delta,
                                   trace.final_score() + op->score_delta});
            EXPECT_TRUE(g.graph().adjacent(op->x, op->y));
            for (const auto& m : oracle::extensions(g.graph()))
                EXPECT_NEAR(total_score(s, oracle::to_dag(m)), trace.final_score(), 1e-8 * std::abs(trace.final_score()));
        }
    }
}

TEST(SubsetCap, TruncatesAndWarns) {
    const auto dag = random_forward_dag({8, 20, 3});
    const auto data = simulate_sem(draw_sem_parameters(dag, SplitUniform{}, 1, 3, 3), 500, 3);
    int warnings = 0;
    SearchOptions opts;
    opts.max_subset_candidates = 0;
    opts.warn = [&](std::string_view) { ++warnings; };
    const auto r = run_ges(data, {2.0}, opts);
    EXPECT_TRUE(r.trace.subset_cap_hit);
    EXPECT_GT(warnings, 0);
    EXPECT_TRUE(is_cpdag(r.graph.graph()));
    for (const auto& step : r.trace.steps) EXPECT_TRUE(step.subset.empty());
}

TEST(RunGes, CategoricalData) {
    const auto bn = parse_bif(oracle::read_file(CADRE_DATA_DIR "/models/child.bif"));
    const auto data = sample_bn(bn, 2000, 4);
    SearchOptions opts;
    opts.check_invariants = true;
    const auto r = run_ges(data, {2.0}, opts);
    EXPECT_TRUE(is_cpdag(r.graph.graph()));
    EXPECT_GT(r.graph.edge_count(), 10u);
    DiscreteScore s(data, {2.0});
    EXPECT_NEAR(r.trace.final_score(), total_score(s, consistent_extension(r.graph.graph())),
                1e-8 * std::abs(r.trace.final_score()));
}
