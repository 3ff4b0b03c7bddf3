#ifndef CADRE_PIPELINE_HPP
#define CADRE_PIPELINE_HPP

#include "cadre/ensemble.hpp"
#include "cadre/ges.hpp"
#include "cadre/parallel.hpp"
#include "cadre/resample.hpp"

#include <mutex>
#include <vector>

namespace cadre {

struct ResampledSearch {
    VoteTable votes;
    /// Filled only when requested.
    std::vector<Cpdag> graphs;
};

/// Runs GES on every replicate of `plan` and tallies the outputs. Replicates may run
/// concurrently; per-worker tallies are merged by count addition, so the result does not
/// depend on `workers`.
inline ResampledSearch resampled_ges(const Dataset& data, const ResamplePlan& plan, const ScoreConfig& cfg,
                                     const SearchOptions& opts = {}, unsigned workers = 1,
                                     bool keep_graphs = false) {
    plan.validate();
    ResampledSearch out{VoteTable(data.labels()), {}};
    if (keep_graphs) out.graphs.resize(plan.replicates);
    std::mutex merge_mutex;
    parallel_for(plan.replicates, workers, [&](std::size_t id) {
        const auto idx = replicate_indices(plan, data.rows(), id);
        auto result = run_ges(materialize(data, idx), cfg, opts);
        std::lock_guard lock(merge_mutex);
        out.votes.add(result.graph);
        if (keep_graphs) out.graphs[id] = std::move(result.graph);
    });
    return out;
}

} // namespace cadre

#endif // CADRE_PIPELINE_HPP
