#ifndef CADRE_RESAMPLE_HPP
#define CADRE_RESAMPLE_HPP

#include "cadre/dataset.hpp"
#include "cadre/error.hpp"
#include "cadre/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

namespace cadre {

enum class ResampleMethod { Bootstrap, Jackknife };

constexpr std::string_view to_string(ResampleMethod m) noexcept {
    return m == ResampleMethod::Bootstrap ? "bootstrap" : "jackknife";
}

inline ResampleMethod parse_resample_method(std::string_view s) {
    if (s == "bootstrap") return ResampleMethod::Bootstrap;
    if (s == "jackknife") return ResampleMethod::Jackknife;
    throw std::invalid_argument("unknown resampling method '" + std::string(s) + "'");
}

struct ResamplePlan {
    ResampleMethod method = ResampleMethod::Bootstrap;
    std::size_t replicates = 200;
    /// Fraction of rows kept by the delete-d jackknife (d = n - round(fraction * n)).
    double jackknife_fraction = 0.9;
    std::uint64_t seed = 0;

    void validate() const {
        if (replicates < 1) throw std::invalid_argument("replicate count must be at least 1");
        if (!(jackknife_fraction > 0.0 && jackknife_fraction <= 1.0))
            throw std::invalid_argument("jackknife fraction must lie in (0, 1]");
    }
};

struct ReplicateIndex {
    std::size_t replicate = 0;
    std::vector<std::size_t> rows;
};

/// n i.i.d. uniform draws from [0, n).
inline ReplicateIndex bootstrap_indices(std::size_t n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("sample size must be at least 1");
    ReplicateIndex idx;
    idx.rows.resize(n);
    for (auto& r : idx.rows) r = static_cast<std::size_t>(rng.below(n));
    return idx;
}

/// Size of a jackknife replicate: fraction * n rounded half up.
inline std::size_t jackknife_size(std::size_t n, double fraction) {
    return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 0.5));
}

/// Uniformly random subset of size round(fraction * n), sorted ascending.
inline ReplicateIndex jackknife_indices(std::size_t n, double fraction, Rng& rng) {
    const std::size_t k = jackknife_size(n, fraction);
    if (k == 0)
        throw EmptyReplicate("jackknife replicate of " + std::to_string(n) + " rows at fraction " +
                             std::to_string(fraction) + " is empty");
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(all[i], all[j]);
    }
    all.resize(k);
    std::sort(all.begin(), all.end());
    return ReplicateIndex{0, std::move(all)};
}

/// Replicate `id` of a plan. Each replicate owns the substream derive_seed(plan.seed, id),
/// so replicates can be generated in any order or concurrently.
inline ReplicateIndex replicate_indices(const ResamplePlan& plan, std::size_t n, std::size_t id) {
    plan.validate();
    Rng rng(derive_seed(plan.seed, "replicate", static_cast<std::uint64_t>(id)));
    ReplicateIndex idx = plan.method == ResampleMethod::Bootstrap
                             ? bootstrap_indices(n, rng)
                             : jackknife_indices(n, plan.jackknife_fraction, rng);
    idx.replicate = id;
    return idx;
}

inline std::vector<ReplicateIndex> plan_replicates(const ResamplePlan& plan, std::size_t n) {
    std::vector<ReplicateIndex> out;
    out.reserve(plan.replicates);
    for (std::size_t id = 0; id < plan.replicates; ++id) out.push_back(replicate_indices(plan, n, id));
    return out;
}

inline Dataset materialize(const Dataset& data, const ReplicateIndex& idx) {
    return data.select_rows(idx.rows);
}

} // namespace cadre

#endif // CADRE_RESAMPLE_HPP
