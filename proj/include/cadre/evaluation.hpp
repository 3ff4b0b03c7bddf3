#ifndef CADRE_EVALUATION_HPP
#define CADRE_EVALUATION_HPP

#include "cadre/cpdag.hpp"
#include "cadre/ensemble.hpp"
#include "cadre/error.hpp"
#include "cadre/graph.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <string_view>
#include <vector>

namespace cadre {

struct ForecastOutcome {
    double forecast;
    bool outcome;
};

using ForecastOutcomeSet = std::vector<ForecastOutcome>;

enum class TruthMode { Cpdag, Dag };

inline TruthMode parse_truth_mode(std::string_view s) {
    if (s == "cpdag") return TruthMode::Cpdag;
    if (s == "dag") return TruthMode::Dag;
    throw std::invalid_argument("compare mode must be 'cpdag' or 'dag'");
}

/// Reference graph for scoring: the truth's CPDAG (default) or the DAG itself.
inline Pdag reference_graph(const Dag& truth, TruthMode mode) {
    return mode == TruthMode::Cpdag ? dag_to_cpdag(truth).graph() : truth.as_pdag();
}

/// One record per (pair, relation) entry: outcome 1 iff the reference graph has exactly that
/// relation on the pair. `positive_only` drops the Absent cells.
inline ForecastOutcomeSet outcomes_from_truth(const ForecastTable& forecasts, const Dag& truth,
                                              TruthMode mode = TruthMode::Cpdag,
                                              bool positive_only = false) {
    if (forecasts.labels != truth.labels()) throw NodeSetMismatch("forecast table and truth differ in nodes");
    const Pdag reference = reference_graph(truth, mode);
    ForecastOutcomeSet out;
    out.reserve(forecasts.entries.size());
    for (const auto& e : forecasts.entries) {
        if (positive_only && e.relation == PairRelation::Absent) continue;
        out.push_back({e.proportion, reference.relation(e.pair) == e.relation});
    }
    return out;
}

inline double brier_score(std::span<const ForecastOutcome> set) {
    if (set.empty()) throw std::invalid_argument("Brier score of an empty set");
    double sum = 0.0;
    for (auto [f, o] : set) {
        const double e = f - (o ? 1.0 : 0.0);
        sum += e * e;
    }
    return sum / static_cast<double>(set.size());
}

/// Records sharing one exact forecast value.
struct ForecastGroup {
    double forecast = 0.0;
    std::size_t count = 0;
    std::size_t events = 0;

    double observed() const noexcept { return static_cast<double>(events) / static_cast<double>(count); }
};

/// Sufficient statistics for the decomposition: records grouped by distinct forecast value.
/// Groups from different sets merge by addition.
class ForecastGroups {
public:
    ForecastGroups() = default;
    explicit ForecastGroups(std::span<const ForecastOutcome> set) {
        for (auto [f, o] : set) add(f, o);
    }

    void add(double forecast, bool outcome, std::size_t times = 1) {
        if (!(forecast >= 0.0 && forecast <= 1.0)) throw std::invalid_argument("forecast outside [0, 1]");
        auto& g = groups_[forecast];
        g.forecast = forecast;
        g.count += times;
        g.events += outcome ? times : 0;
    }

    void add_group(const ForecastGroup& g) {
        if (!(g.forecast >= 0.0 && g.forecast <= 1.0) || g.events > g.count)
            throw std::invalid_argument("invalid forecast group");
        auto& mine = groups_[g.forecast];
        mine.forecast = g.forecast;
        mine.count += g.count;
        mine.events += g.events;
    }

    void merge(const ForecastGroups& other) {
        for (const auto& [f, g] : other.groups_) add_group(g);
    }

    std::vector<ForecastGroup> groups() const {
        std::vector<ForecastGroup> out;
        out.reserve(groups_.size());
        for (const auto& [f, g] : groups_) out.push_back(g);
        return out;
    }

    std::size_t total() const noexcept {
        std::size_t n = 0;
        for (const auto& [f, g] : groups_) n += g.count;
        return n;
    }

    bool empty() const noexcept { return groups_.empty(); }

private:
    std::map<double, ForecastGroup> groups_;
};

struct BrierDecomposition {
    double brier = 0.0;
    double reliability = 0.0;
    double resolution = 0.0;
    double uncertainty = 0.0;
    /// Reliability minus its small-group bias (may be negative).
    double reliability_corrected = 0.0;
    std::size_t n = 0;
    std::vector<ForecastGroup> groups;

    std::size_t distinct_forecasts() const noexcept { return groups.size(); }
};

/// Murphy decomposition over exact distinct forecasts, with the bias-corrected reliability
///   REL - (1/n) sum_k n_k obar_k (1 - obar_k) / (n_k - 1)
/// whose n_k = 1 terms are taken as 0.
inline BrierDecomposition murphy_decomposition(const ForecastGroups& stats) {
    if (stats.empty()) throw std::invalid_argument("decomposition of an empty set");
    BrierDecomposition d;
    d.groups = stats.groups();
    std::size_t events = 0;
    for (const auto& g : d.groups) {
        d.n += g.count;
        events += g.events;
    }
    const double n = static_cast<double>(d.n);
    const double obar = static_cast<double>(events) / n;
    double brier = 0.0, rel = 0.0, res = 0.0, bias = 0.0;
    for (const auto& g : d.groups) {
        const double nk = static_cast<double>(g.count);
        const double ok = g.observed();
        const double f = g.forecast;
        // Sum over the group of (f - o)^2 = n_k f^2 - 2 f e_k + e_k.
        brier += nk * f * f - 2.0 * f * static_cast<double>(g.events) + static_cast<double>(g.events);
        rel += nk * (f - ok) * (f - ok);
        res += nk * (ok - obar) * (ok - obar);
        if (g.count > 1) bias += nk * ok * (1.0 - ok) / (nk - 1.0);
    }
    d.brier = brier / n;
    d.reliability = rel / n;
    d.resolution = res / n;
    d.uncertainty = obar * (1.0 - obar);
    d.reliability_corrected = d.reliability - bias / n;
    return d;
}

inline BrierDecomposition murphy_decomposition(std::span<const ForecastOutcome> set) {
    if (set.empty()) throw std::invalid_argument("decomposition of an empty set");
    return murphy_decomposition(ForecastGroups(set));
}

struct CalibrationBin {
    double low = 0.0;
    double high = 0.0;
    std::size_t count = 0;
    /// NaN for empty bins.
    double mean_forecast = std::numeric_limits<double>::quiet_NaN();
    double observed_frequency = std::numeric_limits<double>::quiet_NaN();
};

struct CalibrationCurve {
    std::vector<CalibrationBin> bins;
};

/// Bin of `f` among `bins` equal-width bins: [0, 1/b], (1/b, 2/b], ..., ((b-1)/b, 1].
inline std::size_t calibration_bin(double f, std::size_t bins) {
    const auto b = static_cast<double>(bins);
    auto i = static_cast<std::ptrdiff_t>(std::ceil(f * b)) - 1;
    const auto last = static_cast<std::ptrdiff_t>(bins) - 1;
    i = std::clamp<std::ptrdiff_t>(i, 0, last);
    while (i > 0 && f <= static_cast<double>(i) / b) --i;
    while (i < last && f > static_cast<double>(i + 1) / b) ++i;
    return static_cast<std::size_t>(i);
}

inline CalibrationCurve calibration_curve(const ForecastGroups& stats, std::size_t bins) {
    if (bins < 1) throw std::invalid_argument("calibration needs at least one bin");
    CalibrationCurve curve;
    curve.bins.resize(bins);
    std::vector<double> sum_f(bins, 0.0);
    std::vector<std::size_t> events(bins, 0);
    for (std::size_t i = 0; i < bins; ++i) {
        curve.bins[i].low = static_cast<double>(i) / static_cast<double>(bins);
        curve.bins[i].high = static_cast<double>(i + 1) / static_cast<double>(bins);
    }
    for (const auto& g : stats.groups()) {
        const auto i = calibration_bin(g.forecast, bins);
        curve.bins[i].count += g.count;
        sum_f[i] += g.forecast * static_cast<double>(g.count);
        events[i] += g.events;
    }
    for (std::size_t i = 0; i < bins; ++i) {
        auto& bin = curve.bins[i];
        if (bin.count == 0) continue;
        bin.mean_forecast = sum_f[i] / static_cast<double>(bin.count);
        bin.observed_frequency = static_cast<double>(events[i]) / static_cast<double>(bin.count);
    }
    return curve;
}

inline CalibrationCurve calibration_curve(std::span<const ForecastOutcome> set, std::size_t bins) {
    return calibration_curve(ForecastGroups(set), bins);
}

} // namespace cadre

#endif // CADRE_EVALUATION_HPP
