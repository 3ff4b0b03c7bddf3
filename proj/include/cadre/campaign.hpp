#ifndef CADRE_CAMPAIGN_HPP
#define CADRE_CAMPAIGN_HPP

#include "cadre/bif.hpp"
#include "cadre/ensemble.hpp"
#include "cadre/evaluation.hpp"
#include "cadre/ges.hpp"
#include "cadre/metrics.hpp"
#include "cadre/parallel.hpp"
#include "cadre/pipeline.hpp"
#include "cadre/resample.hpp"
#include "cadre/sem.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace cadre {

enum class StudyKind { LinearGaussian, ExpertBif };

inline std::string_view to_string(StudyKind k) noexcept {
    return k == StudyKind::LinearGaussian ? "linear-gaussian" : "expert-bif";
}

/// Raw GES on the full data, or GES over bootstrap / jackknife replicates.
enum class RunMethod { Ges, Bootstrap, Jackknife };

inline std::string_view to_string(RunMethod m) noexcept {
    switch (m) {
    case RunMethod::Ges: return "ges";
    case RunMethod::Bootstrap: return "bootstrap";
    case RunMethod::Jackknife: return "jackknife";
    }
    return "ges";
}

inline RunMethod parse_run_method(std::string_view s) {
    if (s == "ges" || s == "none") return RunMethod::Ges;
    if (s == "bootstrap") return RunMethod::Bootstrap;
    if (s == "jackknife") return RunMethod::Jackknife;
    throw ConfigError("unknown method '" + std::string(s) + "' (expected ges, bootstrap or jackknife)");
}

struct CampaignConfig {
    StudyKind study = StudyKind::LinearGaussian;
    std::string model_path;
    int nodes = 100;
    int edges = 100;
    SplitUniform edge_weights{};
    double noise_variance_low = 1.0;
    double noise_variance_high = 3.0;
    std::vector<std::size_t> sample_sizes{100, 200, 300, 400, 500, 600, 700, 800, 900, 1000};
    std::size_t repetitions = 500;
    std::vector<RunMethod> methods{RunMethod::Ges, RunMethod::Bootstrap, RunMethod::Jackknife};
    std::size_t replicates = 200;
    double jackknife_fraction = 0.9;
    double penalty_discount = 2.0;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    std::string output_dir = "campaign-out";
    std::size_t calibration_bins = 10;
    TruthMode compare = TruthMode::Cpdag;
    bool positive_only = false;
    bool write_replicate_indices = false;

    void validate() const {
        if (study == StudyKind::ExpertBif && model_path.empty())
            throw ConfigError("expert-bif study needs model_path");
        if (study == StudyKind::LinearGaussian) {
            if (nodes < 1) throw ConfigError("nodes must be positive");
            if (edges < 0 || static_cast<std::size_t>(edges) > pair_count(nodes))
                throw ConfigError("edges must lie in [0, nodes (nodes - 1) / 2]");
        }
        if (sample_sizes.empty()) throw ConfigError("sample_sizes must not be empty");
        for (std::size_t i = 0; i < sample_sizes.size(); ++i) {
            if (sample_sizes[i] < 2) throw ConfigError("sample sizes must be at least 2");
            if (i && sample_sizes[i] <= sample_sizes[i - 1])
                throw ConfigError("sample_sizes must be strictly increasing");
        }
        if (repetitions < 1) throw ConfigError("repetitions must be positive");
        if (methods.empty()) throw ConfigError("methods must not be empty");
        if (std::set<RunMethod>(methods.begin(), methods.end()).size() != methods.size())
            throw ConfigError("methods must not repeat");
        if (replicates < 1) throw ConfigError("replicates must be positive");
        if (!(jackknife_fraction > 0.0 && jackknife_fraction <= 1.0))
            throw ConfigError("jackknife_fraction must lie in (0, 1]");
        if (!(penalty_discount > 0.0)) throw ConfigError("penalty_discount must be positive");
        if (workers < 1) throw ConfigError("workers must be positive");
        if (calibration_bins < 1) throw ConfigError("calibration_bins must be positive");
        if (!(0.0 < noise_variance_low && noise_variance_low < noise_variance_high))
            throw ConfigError("noise_variance range must satisfy 0 < low < high");
        try {
            edge_weights.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
};

/// Parses the JSON config format (comments allowed). Unknown keys are errors.
inline CampaignConfig parse_campaign_config(std::string_view text) {
    using nlohmann::json;
    json j;
    try {
        j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    static const std::set<std::string> known = {
        "study", "model_path", "nodes", "edges", "edge_weights", "noise_variance", "sample_sizes",
        "repetitions", "methods", "replicates", "jackknife_fraction", "penalty_discount", "seed",
        "workers", "output_dir", "calibration_bins", "compare", "positive_only", "write_replicate_indices"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key())) throw ConfigError("unknown config key '" + it.key() + "'");

    CampaignConfig c;
    try {
        if (j.contains("study")) {
            const auto s = j["study"].get<std::string>();
            if (s == "linear-gaussian") c.study = StudyKind::LinearGaussian;
            else if (s == "expert-bif") c.study = StudyKind::ExpertBif;
            else throw ConfigError("study must be 'linear-gaussian' or 'expert-bif'");
        }
        c.repetitions = c.study == StudyKind::LinearGaussian ? 500 : 100;
        if (j.contains("model_path")) c.model_path = j["model_path"].get<std::string>();
        if (j.contains("nodes")) c.nodes = j["nodes"].get<int>();
        if (j.contains("edges")) c.edges = j["edges"].get<int>();
        if (j.contains("edge_weights")) {
            const auto w = j["edge_weights"].get<std::vector<double>>();
            if (w.size() != 4) throw ConfigError("edge_weights needs [neg_low, neg_high, pos_low, pos_high]");
            c.edge_weights = {w[0], w[1], w[2], w[3]};
        }
        if (j.contains("noise_variance")) {
            const auto v = j["noise_variance"].get<std::vector<double>>();
            if (v.size() != 2) throw ConfigError("noise_variance needs [low, high]");
            c.noise_variance_low = v[0];
            c.noise_variance_high = v[1];
        }
        if (j.contains("sample_sizes")) c.sample_sizes = j["sample_sizes"].get<std::vector<std::size_t>>();
        if (j.contains("repetitions")) c.repetitions = j["repetitions"].get<std::size_t>();
        if (j.contains("methods")) {
            c.methods.clear();
            for (const auto& m : j["methods"]) c.methods.push_back(parse_run_method(m.get<std::string>()));
        }
        if (j.contains("replicates")) c.replicates = j["replicates"].get<std::size_t>();
        if (j.contains("jackknife_fraction")) c.jackknife_fraction = j["jackknife_fraction"].get<double>();
        if (j.contains("penalty_discount")) c.penalty_discount = j["penalty_discount"].get<double>();
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("workers")) c.workers = j["workers"].get<unsigned>();
        if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
        if (j.contains("calibration_bins")) c.calibration_bins = j["calibration_bins"].get<std::size_t>();
        if (j.contains("compare")) c.compare = parse_truth_mode(j["compare"].get<std::string>());
        if (j.contains("positive_only")) c.positive_only = j["positive_only"].get<bool>();
        if (j.contains("write_replicate_indices"))
            c.write_replicate_indices = j["write_replicate_indices"].get<bool>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config has a value of the wrong type: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    c.validate();
    return c;
}

struct RunRecord {
    StudyKind study = StudyKind::LinearGaussian;
    std::size_t sample_size = 0;
    std::size_t repetition = 0;
    RunMethod method = RunMethod::Ges;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    std::size_t replicates = 0;
    std::size_t shd = 0;
    ConfusionCounts confusion;
    BrierDecomposition forecast;
    ForecastGroups groups;
    bool ensemble_acyclic = true;
    double wall_ms = 0.0;
};

struct CampaignResult {
    std::vector<RunRecord> records;
    std::size_t failures = 0;
};

namespace detail {

inline std::string fmt(double v) {
    if (std::isnan(v)) return "NA";
    return shortest(v);
}

inline std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

struct RunKey {
    std::size_t size_index;
    std::size_t repetition;
    std::size_t method_index;
};

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    // Write to a temporary sibling, then rename into place.
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw Error("cannot write " + tmp);
        os << content;
        if (!os) throw Error("failed writing " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

} // namespace detail

inline constexpr const char* kRunsHeader =
    "study,sample_size,repetition,method,seed,status,replicates,shd,adj_tp,adj_fp,adj_fn,adj_precision,"
    "adj_recall,arrow_tp,arrow_fp,arrow_fn,arrow_precision,arrow_recall,brier,reliability,"
    "reliability_corrected,resolution,uncertainty,ensemble_acyclic,wall_ms,error";

inline constexpr const char* kSummaryHeader =
    "sample_size,method,runs,failures,shd,adj_precision,adj_recall,arrow_precision,arrow_recall,brier,"
    "reliability,reliability_corrected,resolution,uncertainty,pooled_brier,pooled_reliability,"
    "pooled_reliability_corrected,pooled_resolution,pooled_uncertainty";

inline constexpr const char* kCalibrationHeader =
    "sample_size,method,bin_low,bin_high,count,mean_forecast,observed_freq";

/// Executes one (size, repetition, method) run. Model and data depend only on (seed, size,
/// repetition), so every method sees the same matched pair.
inline RunRecord execute_run(const CampaignConfig& cfg, const DiscreteBn* bn, std::size_t sample_size,
                             std::size_t repetition, RunMethod method,
                             const std::filesystem::path& replicate_dir = {}) {
    RunRecord rec;
    rec.study = cfg.study;
    rec.sample_size = sample_size;
    rec.repetition = repetition;
    rec.method = method;
    rec.seed = derive_seed(cfg.seed, "run", sample_size, repetition, to_string(method));
    const auto start = std::chrono::steady_clock::now();
    try {
        const auto model_seed = derive_seed(cfg.seed, "model", sample_size, repetition);
        const auto data_seed = derive_seed(cfg.seed, "data", sample_size, repetition);
        Dag truth;
        Dataset data;
        if (cfg.study == StudyKind::LinearGaussian) {
            truth = random_forward_dag({cfg.nodes, cfg.edges, model_seed});
            const auto sem = draw_sem_parameters(truth, cfg.edge_weights, cfg.noise_variance_low,
                                                 cfg.noise_variance_high, model_seed);
            data = simulate_sem(sem, sample_size, data_seed);
        } else {
            truth = bn->dag;
            data = sample_bn(*bn, sample_size, data_seed);
        }
        const ScoreConfig score_cfg{cfg.penalty_discount};
        const Pdag reference = reference_graph(truth, cfg.compare);

        VoteTable votes(data.labels());
        Pdag estimate;
        if (method == RunMethod::Ges) {
            auto result = run_ges(data, score_cfg);
            votes.add(result.graph);
            estimate = result.graph.graph();
        } else {
            ResamplePlan plan{method == RunMethod::Bootstrap ? ResampleMethod::Bootstrap : ResampleMethod::Jackknife,
                              cfg.replicates, cfg.jackknife_fraction, derive_seed(rec.seed, "resample")};
            if (!replicate_dir.empty()) {
                std::filesystem::create_directories(replicate_dir);
                for (std::size_t id = 0; id < plan.replicates; ++id) {
                    const auto idx = replicate_indices(plan, data.rows(), id);
                    std::ostringstream os;
                    os << "row\n";
                    for (auto r : idx.rows) os << r << '\n';
                    std::ostringstream name;
                    name << "replicate_" << std::setw(4) << std::setfill('0') << id << ".csv";
                    detail::write_text_file(replicate_dir / name.str(), os.str());
                }
            }
            votes = resampled_ges(data, plan, score_cfg).votes;
            estimate = ensemble_graph(votes);
            rec.ensemble_acyclic = validate_ensemble(estimate).acyclic;
        }
        rec.replicates = votes.replicates();
        rec.shd = shd(estimate, reference);
        rec.confusion = confusion_counts(estimate, reference);
        const auto table = forecast_table(votes);
        const auto outcomes = outcomes_from_truth(table, truth, cfg.compare, cfg.positive_only);
        rec.groups = ForecastGroups(outcomes);
        rec.forecast = murphy_decomposition(rec.groups);
        rec.ok = true;
    } catch (const std::exception& e) {
        rec.ok = false;
        rec.error = e.what();
    }
    rec.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

inline std::string format_runs_csv(const std::vector<RunRecord>& records) {
    std::ostringstream os;
    os << kRunsHeader << '\n';
    for (const auto& r : records) {
        os << to_string(r.study) << ',' << r.sample_size << ',' << r.repetition << ',' << to_string(r.method)
           << ',' << r.seed << ',' << (r.ok ? "ok" : "failed") << ',';
        if (r.ok) {
            const auto& a = r.confusion.adjacency;
            const auto& h = r.confusion.arrowhead;
            const auto& f = r.forecast;
            os << r.replicates << ',' << r.shd << ',' << a.tp << ',' << a.fp << ',' << a.fn << ','
               << detail::fmt(a.precision()) << ',' << detail::fmt(a.recall()) << ',' << h.tp << ',' << h.fp
               << ',' << h.fn << ',' << detail::fmt(h.precision()) << ',' << detail::fmt(h.recall()) << ','
               << detail::fmt(f.brier) << ',' << detail::fmt(f.reliability) << ','
               << detail::fmt(f.reliability_corrected) << ',' << detail::fmt(f.resolution) << ','
               << detail::fmt(f.uncertainty) << ',' << (r.ensemble_acyclic ? 1 : 0) << ',';
        } else {
            os << ",,,,,,,,,,,,,,,,,,";
        }
        os << detail::fmt(r.wall_ms) << ',' << detail::sanitize(r.error) << '\n';
    }
    return os.str();
}

/// Mean of the finite values; NaN when there are none.
inline double finite_mean(const std::vector<double>& values) {
    double sum = 0.0;
    std::size_t n = 0;
    for (double v : values)
        if (std::isfinite(v)) {
            sum += v;
            ++n;
        }
    return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

/// Records for one (size, method) cell in repetition order.
inline std::vector<const RunRecord*> cell_records(const std::vector<RunRecord>& records, std::size_t size,
                                                  RunMethod method) {
    std::vector<const RunRecord*> out;
    for (const auto& r : records)
        if (r.sample_size == size && r.method == method) out.push_back(&r);
    std::sort(out.begin(), out.end(),
              [](const RunRecord* a, const RunRecord* b) { return a->repetition < b->repetition; });
    return out;
}

inline std::string format_summary_csv(const CampaignConfig& cfg, const std::vector<RunRecord>& records) {
    std::ostringstream os;
    os << kSummaryHeader << '\n';
    for (auto size : cfg.sample_sizes) {
        for (auto method : cfg.methods) {
            const auto cell = cell_records(records, size, method);
            std::size_t runs = 0, failures = 0;
            std::vector<double> cols[10];
            ForecastGroups pooled;
            for (const auto* r : cell) {
                if (!r->ok) {
                    ++failures;
                    continue;
                }
                ++runs;
                cols[0].push_back(static_cast<double>(r->shd));
                cols[1].push_back(r->confusion.adjacency.precision());
                cols[2].push_back(r->confusion.adjacency.recall());
                cols[3].push_back(r->confusion.arrowhead.precision());
                cols[4].push_back(r->confusion.arrowhead.recall());
                cols[5].push_back(r->forecast.brier);
                cols[6].push_back(r->forecast.reliability);
                cols[7].push_back(r->forecast.reliability_corrected);
                cols[8].push_back(r->forecast.resolution);
                cols[9].push_back(r->forecast.uncertainty);
                pooled.merge(r->groups);
            }
            os << size << ',' << to_string(method) << ',' << runs << ',' << failures;
            for (const auto& c : cols) os << ',' << detail::fmt(finite_mean(c));
            if (pooled.empty()) {
                os << ",NA,NA,NA,NA,NA";
            } else {
                const auto d = murphy_decomposition(pooled);
                os << ',' << detail::fmt(d.brier) << ',' << detail::fmt(d.reliability) << ','
                   << detail::fmt(d.reliability_corrected) << ',' << detail::fmt(d.resolution) << ','
                   << detail::fmt(d.uncertainty);
            }
            os << '\n';
        }
    }
    return os.str();
}

inline std::string format_calibration_csv(const CampaignConfig& cfg, const std::vector<RunRecord>& records) {
    std::ostringstream os;
    os << kCalibrationHeader << '\n';
    for (auto size : cfg.sample_sizes) {
        for (auto method : cfg.methods) {
            ForecastGroups pooled;
            for (const auto* r : cell_records(records, size, method))
                if (r->ok) pooled.merge(r->groups);
            if (pooled.empty()) continue;
            for (const auto& bin : calibration_curve(pooled, cfg.calibration_bins).bins)
                os << size << ',' << to_string(method) << ',' << detail::fmt(bin.low) << ','
                   << detail::fmt(bin.high) << ',' << bin.count << ',' << detail::fmt(bin.mean_forecast) << ','
                   << detail::fmt(bin.observed_frequency) << '\n';
        }
    }
    return os.str();
}

/// Runs every (size, repetition, method) combination and writes runs.csv, summary.csv and
/// calibration.csv into the output directory. Output bytes depend only on the config and
/// seed (runs.csv also records wall time).
inline CampaignResult run_campaign(const CampaignConfig& cfg) {
    cfg.validate();
    std::optional<DiscreteBn> bn;
    if (cfg.study == StudyKind::ExpertBif) {
        std::ifstream is(cfg.model_path, std::ios::binary);
        if (!is) throw ConfigError("cannot open model file '" + cfg.model_path + "'");
        std::stringstream buffer;
        buffer << is.rdbuf();
        bn = parse_bif(buffer.str());
    }
    const std::filesystem::path out_dir(cfg.output_dir);
    std::filesystem::create_directories(out_dir);

    std::vector<detail::RunKey> keys;
    for (std::size_t s = 0; s < cfg.sample_sizes.size(); ++s)
        for (std::size_t rep = 0; rep < cfg.repetitions; ++rep)
            for (std::size_t m = 0; m < cfg.methods.size(); ++m) keys.push_back({s, rep, m});

    CampaignResult result;
    result.records.resize(keys.size());
    parallel_for(keys.size(), cfg.workers, [&](std::size_t i) {
        const auto& k = keys[i];
        const auto size = cfg.sample_sizes[k.size_index];
        const auto method = cfg.methods[k.method_index];
        std::filesystem::path replicate_dir;
        if (cfg.write_replicate_indices && method != RunMethod::Ges)
            replicate_dir = out_dir / "replicates" /
                            ("n" + std::to_string(size) + "_rep" + std::to_string(k.repetition) + "_" +
                             std::string(to_string(method)));
        result.records[i] = execute_run(cfg, bn ? &*bn : nullptr, size, k.repetition, method, replicate_dir);
    });
    for (const auto& r : result.records) result.failures += r.ok ? 0 : 1;

    detail::write_text_file(out_dir / "runs.csv", format_runs_csv(result.records));
    detail::write_text_file(out_dir / "summary.csv", format_summary_csv(cfg, result.records));
    detail::write_text_file(out_dir / "calibration.csv", format_calibration_csv(cfg, result.records));
    return result;
}

// ---------------------------------------------------------------------------
// Plot data: tidy long-format CSVs derived from a finished campaign directory.

struct PlotDataFiles {
    std::size_t runs = 0;
    std::vector<std::filesystem::path> files;
};

inline PlotDataFiles emit_plot_data(const std::filesystem::path& dir, std::filesystem::path out = {}) {
    if (out.empty()) out = dir;
    const auto runs_path = dir / "runs.csv";
    std::ifstream runs(runs_path);
    if (!runs) throw Error("no run records: '" + runs_path.string() + "' not found");
    std::string line;
    if (!std::getline(runs, line) || line != kRunsHeader)
        throw ParseError("'" + runs_path.string() + "' has an unexpected header");
    const auto header = detail::split(kRunsHeader, ',');
    auto col = [&](std::string_view name) {
        return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
    };

    const std::vector<std::pair<std::string, std::vector<std::string>>> families = {
        {"plot_shd.csv", {"shd", "adj_precision", "adj_recall", "arrow_precision", "arrow_recall"}},
        {"plot_brier.csv", {"brier"}},
        {"plot_reliability.csv", {"reliability", "reliability_corrected"}},
    };
    std::vector<std::ostringstream> streams(families.size());
    for (auto& s : streams) s << "sample_size,method,metric,value\n";

    PlotDataFiles result;
    std::vector<std::string> corrupt;
    int line_no = 1;
    while (std::getline(runs, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = detail::split(line, ',');
        const std::string id = f.size() >= 4 ? f[0] + "/n" + f[1] + "/rep" + f[2] + "/" + f[3]
                                             : "line " + std::to_string(line_no);
        if (f.size() != header.size()) {
            corrupt.push_back(id);
            continue;
        }
        if (f[col("status")] != "ok") continue;
        bool bad = false;
        for (const auto& [file, metrics] : families)
            for (const auto& m : metrics) {
                const auto& v = f[col(m)];
                double parsed = 0;
                if (v != "NA" && std::from_chars(v.data(), v.data() + v.size(), parsed).ec != std::errc())
                    bad = true;
            }
        if (bad) {
            corrupt.push_back(id);
            continue;
        }
        ++result.runs;
        for (std::size_t k = 0; k < families.size(); ++k)
            for (const auto& m : families[k].second)
                streams[k] << f[col("sample_size")] << ',' << f[col("method")] << ',' << m << ','
                           << f[col(m)] << '\n';
    }
    if (!corrupt.empty()) {
        std::string ids;
        for (const auto& c : corrupt) ids += (ids.empty() ? "" : ", ") + c;
        throw ParseError("corrupt run records: " + ids);
    }
    if (result.runs == 0) throw Error("no run records in '" + runs_path.string() + "'");

    std::filesystem::create_directories(out);
    for (std::size_t k = 0; k < families.size(); ++k) {
        const auto path = out / families[k].first;
        detail::write_text_file(path, streams[k].str());
        result.files.push_back(path);
    }

    // Calibration scatter: non-empty bins.
    std::ifstream cal(dir / "calibration.csv");
    if (!cal) throw Error("no calibration records in '" + dir.string() + "'");
    if (!std::getline(cal, line) || line != kCalibrationHeader)
        throw ParseError("calibration.csv has an unexpected header");
    std::ostringstream scatter;
    scatter << "sample_size,method,mean_forecast,observed_freq,count\n";
    line_no = 1;
    while (std::getline(cal, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = detail::split(line, ',');
        if (f.size() != 7) throw ParseError("calibration.csv line " + std::to_string(line_no) + " is corrupt");
        if (f[4] == "0") continue;
        scatter << f[0] << ',' << f[1] << ',' << f[5] << ',' << f[6] << ',' << f[4] << '\n';
    }
    const auto scatter_path = out / "plot_calibration.csv";
    detail::write_text_file(scatter_path, scatter.str());
    result.files.push_back(scatter_path);
    return result;
}

} // namespace cadre

#endif // CADRE_CAMPAIGN_HPP
