#include "cadre/evaluation.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace cadre;

namespace {

ForecastOutcomeSet random_set(Rng& rng) {
    const std::size_t n = 1 + rng.below(300);
    const std::size_t m = 1 + rng.below(20);
    ForecastOutcomeSet s(n);
    for (auto& r : s) {
        r.forecast = static_cast<double>(rng.below(m + 1)) / static_cast<double>(m);
        r.outcome = rng.uniform() < (rng.uniform() < 0.5 ? r.forecast : rng.uniform());
    }
    return s;
}

std::vector<std::pair<double, int>> plain(const ForecastOutcomeSet& s) {
    std::vector<std::pair<double, int>> out;
    for (auto [f, o] : s) out.emplace_back(f, o ? 1 : 0);
    return out;
}

ForecastTable table_for(const Pdag& g, const std::vector<std::array<double, 4>>& rows) {
    ForecastTable t{g.labels(), 10, {}};
    std::size_t i = 0;
    for (auto p : all_pairs(g.node_count())) {
        for (std::size_t r = 0; r < 4; ++r)
            t.entries.push_back({p, kAllRelations[r], static_cast<std::uint32_t>(rows[i][r] * 10), rows[i][r]});
        ++i;
    }
    return t;
}

} // namespace

TEST(OutcomesFromTruth, CpdagReference) {
    Dag truth(2);
    truth.add_edge(0, 1);
    const auto t = table_for(Pdag(2), {{0.0, 0.2, 0.0, 0.8}});
    const auto o = outcomes_from_truth(t, truth);
    ASSERT_EQ(o.size(), 4u);
    EXPECT_EQ(o[3].forecast, 0.8);
    EXPECT_TRUE(o[3].outcome);
    EXPECT_EQ(o[1].forecast, 0.2);
    EXPECT_FALSE(o[1].outcome);
    // In DAG mode the directed cell is the event.
    const auto od = outcomes_from_truth(t, truth, TruthMode::Dag);
    EXPECT_TRUE(od[1].outcome);
    EXPECT_FALSE(od[3].outcome);
}

TEST(OutcomesFromTruth, OneEventPerPair) {
    Dag truth(3);
    truth.add_edge(0, 2);
    truth.add_edge(1, 2);
    const auto t = table_for(Pdag(3), {{0.25, 0.25, 0.25, 0.25}, {0.25, 0.25, 0.25, 0.25}, {0.25, 0.25, 0.25, 0.25}});
    const auto o = outcomes_from_truth(t, truth);
    EXPECT_EQ(o.size(), 12u);
    EXPECT_EQ(std::count_if(o.begin(), o.end(), [](auto r) { return r.outcome; }), 3);
    const auto pos = outcomes_from_truth(t, truth, TruthMode::Cpdag, true);
    EXPECT_EQ(pos.size(), 9u);
    EXPECT_EQ(std::count_if(pos.begin(), pos.end(), [](auto r) { return r.outcome; }), 2);
}

TEST(OutcomesFromTruth, NodeMismatch) {
    const auto t = table_for(Pdag(2), {{1, 0, 0, 0}});
    EXPECT_THROW(outcomes_from_truth(t, Dag(3)), NodeSetMismatch);
}

TEST(BrierScore, Examples) {
    EXPECT_EQ(brier_score(ForecastOutcomeSet{{1.0, true}, {0.0, false}}), 0.0);
    EXPECT_DOUBLE_EQ(brier_score(ForecastOutcomeSet{{0.5, true}, {0.5, false}, {0.5, true}, {0.5, false}}), 0.25);
    EXPECT_EQ(brier_score(ForecastOutcomeSet{{1.0, false}, {1.0, false}}), 1.0);
    EXPECT_ANY_THROW(brier_score(ForecastOutcomeSet{}));
}

TEST(Murphy, PerfectForecasts) {
    const auto d = murphy_decomposition(ForecastOutcomeSet{{1.0, true}, {0.0, false}, {1.0, true}});
    EXPECT_EQ(d.reliability, 0.0);
    EXPECT_EQ(d.brier, 0.0);
}

TEST(Murphy, SingleGroupCorrection) {
    const auto d = murphy_decomposition(ForecastOutcomeSet{{0.5, true}, {0.5, false}, {0.5, true}, {0.5, false}});
    EXPECT_NEAR(d.reliability, 0.0, 1e-15);
    EXPECT_NEAR(d.reliability_corrected, -1.0 / 12.0, 1e-15);
}

TEST(Murphy, TwoGroupsMatchDirectSummation) {
    const ForecastOutcomeSet s{{0.2, false}, {0.2, false}, {0.2, true}, {0.2, false},
                               {0.9, true},  {0.9, true},  {0.9, true}, {0.9, false}};
    const auto d = murphy_decomposition(s);
    const auto o = oracle::murphy(plain(s));
    EXPECT_NEAR(d.brier, o.brier, 1e-12);
    EXPECT_NEAR(d.reliability, o.reliability, 1e-12);
    EXPECT_NEAR(d.resolution, o.resolution, 1e-12);
    EXPECT_NEAR(d.uncertainty, o.uncertainty, 1e-12);
    EXPECT_NEAR(d.reliability_corrected, o.corrected, 1e-12);
    // Hand values: groups obar 0.25 and 0.75, overall 0.5.
    EXPECT_NEAR(d.reliability, (4 * 0.05 * 0.05 + 4 * 0.15 * 0.15) / 8, 1e-12);
    EXPECT_NEAR(d.resolution, 0.0625, 1e-12);
    EXPECT_NEAR(d.uncertainty, 0.25, 1e-12);
    EXPECT_NEAR(d.reliability_corrected, d.reliability - (2 * 4 * 0.1875 / 3) / 8, 1e-12);
}

TEST(Murphy, RandomSetsMatchOracleAndIdentity) {
    Rng rng(11);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto s = random_set(rng);
        const auto d = murphy_decomposition(s);
        const auto o = oracle::murphy(plain(s));
        ASSERT_NEAR(d.brier, brier_score(s), 1e-12);
        ASSERT_NEAR(d.brier, o.brier, 1e-12);
        ASSERT_NEAR(d.reliability, o.reliability, 1e-12);
        ASSERT_NEAR(d.resolution, o.resolution, 1e-12);
        ASSERT_NEAR(d.reliability_corrected, o.corrected, 1e-12);
        ASSERT_NEAR(d.brier, d.reliability - d.resolution + d.uncertainty, 1e-12);
        ASSERT_LE(d.reliability_corrected, d.reliability);
        ASSERT_GE(d.reliability, 0.0);
        ASSERT_GE(d.uncertainty, 0.0);
        ASSERT_LE(d.uncertainty, 0.25);
    }
}

TEST(Murphy, PermutationInvariant) {
    Rng rng(12);
    auto s = random_set(rng);
    const auto a = murphy_decomposition(s);
    rng.shuffle(std::span<ForecastOutcome>(s));
    const auto b = murphy_decomposition(s);
    EXPECT_NEAR(a.brier, b.brier, 1e-15);
    EXPECT_NEAR(a.reliability, b.reliability, 1e-15);
    EXPECT_NEAR(a.resolution, b.resolution, 1e-15);
    EXPECT_NEAR(brier_score(s), a.brier, 1e-12);
}

TEST(Murphy, MergingGroupsWithEqualFrequencyKeepsReliability) {
    // Two sets sharing forecast 0.3 and observed frequency 0.5: pooled reliability is the
    // count-weighted sum of the parts.
    ForecastOutcomeSet a, b;
    for (int i = 0; i < 10; ++i) a.push_back({0.3, i % 2 == 0});
    for (int i = 0; i < 4; ++i) b.push_back({0.3, i < 2});
    auto both = a;
    both.insert(both.end(), b.begin(), b.end());
    const double ra = murphy_decomposition(a).reliability, rb = murphy_decomposition(b).reliability;
    EXPECT_NEAR(murphy_decomposition(both).reliability, (10 * ra + 4 * rb) / 14, 1e-15);
    EXPECT_EQ(murphy_decomposition(both).distinct_forecasts(), 1u);
}

TEST(ForecastGroups, MergeMatchesConcatenation) {
    Rng rng(13);
    const auto a = random_set(rng), b = random_set(rng);
    ForecastGroups ga(a), gb(b);
    ga.merge(gb);
    auto both = a;
    both.insert(both.end(), b.begin(), b.end());
    const auto x = murphy_decomposition(ga), y = murphy_decomposition(both);
    EXPECT_NEAR(x.brier, y.brier, 1e-12);
    EXPECT_NEAR(x.reliability_corrected, y.reliability_corrected, 1e-12);
    EXPECT_EQ(ga.total(), both.size());
}

TEST(Calibration, PerfectZeroOne) {
    const ForecastOutcomeSet s{{0.0, false}, {1.0, true}, {1.0, true}};
    const auto c = calibration_curve(s, 10);
    ASSERT_EQ(c.bins.size(), 10u);
    EXPECT_EQ(c.bins[0].count, 1u);
    EXPECT_EQ(c.bins[9].count, 2u);
    EXPECT_EQ(c.bins[0].mean_forecast, c.bins[0].observed_frequency);
    EXPECT_EQ(c.bins[9].mean_forecast, c.bins[9].observed_frequency);
    for (int i = 1; i < 9; ++i) {
        EXPECT_EQ(c.bins[i].count, 0u);
        EXPECT_TRUE(std::isnan(c.bins[i].mean_forecast));
    }
}

TEST(Calibration, ConstantForecast) {
    const ForecastOutcomeSet s(7, {0.55, true});
    const auto c = calibration_curve(s, 10);
    EXPECT_EQ(c.bins[5].count, 7u);
    EXPECT_DOUBLE_EQ(c.bins[5].low, 0.5);
    EXPECT_DOUBLE_EQ(c.bins[5].high, 0.6);
}

TEST(Calibration, BinEdges) {
    EXPECT_EQ(calibration_bin(0.0, 10), 0u);
    EXPECT_EQ(calibration_bin(0.1, 10), 0u);
    EXPECT_EQ(calibration_bin(0.1000001, 10), 1u);
    EXPECT_EQ(calibration_bin(0.3, 10), 2u);
    EXPECT_EQ(calibration_bin(0.7, 10), 6u);
    EXPECT_EQ(calibration_bin(1.0, 10), 9u);
    EXPECT_EQ(calibration_bin(0.5, 1), 0u);
}

TEST(Calibration, MatchesDirectBinning) {
    Rng rng(14);
    for (int trial = 0; trial < 50; ++trial) {
        // Forecasts a/m; bin k is the smallest with a * bins <= (k + 1) * m, in integers.
        const std::size_t m = 1 + rng.below(30), bins = 1 + rng.below(12), n = 1 + rng.below(200);
        ForecastOutcomeSet s;
        std::vector<double> sum_f(bins, 0), sum_o(bins, 0), count(bins, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t a = rng.below(m + 1);
            const double f = static_cast<double>(a) / static_cast<double>(m);
            const bool o = rng.uniform() < f;
            s.push_back({f, o});
            std::size_t k = 0;
            while (a * bins > (k + 1) * m) ++k;
            sum_f[k] += f;
            sum_o[k] += o;
            count[k] += 1;
        }
        const auto c = calibration_curve(s, bins);
        std::size_t total = 0;
        for (std::size_t k = 0; k < bins; ++k) {
            total += c.bins[k].count;
            ASSERT_EQ(c.bins[k].count, static_cast<std::size_t>(count[k])) << "m=" << m << " bins=" << bins;
            if (count[k] > 0) {
                ASSERT_NEAR(c.bins[k].mean_forecast, sum_f[k] / count[k], 1e-12);
                ASSERT_NEAR(c.bins[k].observed_frequency, sum_o[k] / count[k], 1e-12);
            }
        }
        ASSERT_EQ(total, s.size());
    }
}
