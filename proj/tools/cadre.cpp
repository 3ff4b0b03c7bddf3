// cadre: resampled GES causal discovery and forecast evaluation.

#include "cadre/cadre.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace cadre;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open '" + path + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write '" + path.string() + "'");
    return os;
}

DataKind parse_kind(const std::string& s) {
    if (s == "continuous") return DataKind::Continuous;
    if (s == "categorical") return DataKind::Categorical;
    throw CLI::ValidationError("--kind", "must be continuous or categorical");
}

Dataset load_data(const std::string& path, const std::string& kind, const std::string& bif_path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open '" + path + "'");
    std::optional<std::vector<std::vector<std::string>>> cats;
    if (!bif_path.empty()) cats = parse_bif(slurp(bif_path)).categories;
    return read_csv(is, parse_kind(kind), cats);
}

void warn(std::string_view msg) { std::cerr << "warning: " << msg << '\n'; }

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cadre: resampled causal discovery (GES + BIC) with forecast calibration"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Simulate a dataset from a random linear SEM or a BIF network");
    std::string sim_bif, sim_out = "sim-out";
    int sim_nodes = 20, sim_edges = 20;
    std::size_t sim_n = 500;
    std::uint64_t sim_seed = 1;
    sim->add_option("--bif", sim_bif, "BIF network to sample (default: random linear Gaussian SEM)");
    sim->add_option("--nodes", sim_nodes, "Nodes of the random DAG")->check(CLI::PositiveNumber);
    sim->add_option("--edges", sim_edges, "Edges of the random DAG")->check(CLI::NonNegativeNumber);
    sim->add_option("--n", sim_n, "Sample size")->check(CLI::PositiveNumber);
    sim->add_option("--seed", sim_seed, "Seed");
    sim->add_option("--out", sim_out, "Output directory (data.csv, truth.graph)");

    // search
    auto* search = app.add_subcommand("search", "Run GES on a CSV dataset");
    std::string search_data, search_kind = "continuous", search_out = "ges.graph", search_trace, search_bif;
    double search_penalty = 2.0;
    search->add_option("--data", search_data, "Input CSV")->required();
    search->add_option("--kind", search_kind, "continuous or categorical");
    search->add_option("--penalty", search_penalty, "Penalty discount")->check(CLI::PositiveNumber);
    search->add_option("--categories-from", search_bif, "BIF file supplying category lists");
    search->add_option("--out", search_out, "Output graph file");
    search->add_option("--trace", search_trace, "Write the operator trace as CSV");

    // resample
    auto* resample = app.add_subcommand("resample", "Write bootstrap or jackknife replicate indices");
    std::string rs_data, rs_method = "bootstrap", rs_out = "replicates";
    std::size_t rs_m = 200;
    double rs_fraction = 0.9;
    std::uint64_t rs_seed = 1;
    resample->add_option("--data", rs_data, "Input CSV (only its row count is used)")->required();
    resample->add_option("--method", rs_method, "bootstrap or jackknife");
    resample->add_option("--m", rs_m, "Replicates")->check(CLI::PositiveNumber);
    resample->add_option("--fraction", rs_fraction, "Jackknife keep fraction");
    resample->add_option("--seed", rs_seed, "Seed");
    resample->add_option("--out", rs_out, "Output directory");

    // ensemble
    auto* ens = app.add_subcommand("ensemble", "Resampled GES: ensemble graph and forecast table");
    std::string en_data, en_kind = "continuous", en_method = "bootstrap", en_out = "ensemble-out", en_bif;
    std::size_t en_m = 200;
    double en_fraction = 0.9, en_penalty = 2.0;
    std::uint64_t en_seed = 1;
    unsigned en_workers = 1;
    ens->add_option("--data", en_data, "Input CSV")->required();
    ens->add_option("--kind", en_kind, "continuous or categorical");
    ens->add_option("--categories-from", en_bif, "BIF file supplying category lists");
    ens->add_option("--method", en_method, "bootstrap or jackknife");
    ens->add_option("--m", en_m, "Replicates")->check(CLI::PositiveNumber);
    ens->add_option("--fraction", en_fraction, "Jackknife keep fraction");
    ens->add_option("--penalty", en_penalty, "Penalty discount")->check(CLI::PositiveNumber);
    ens->add_option("--seed", en_seed, "Seed");
    ens->add_option("--workers", en_workers, "Worker threads")->check(CLI::PositiveNumber);
    ens->add_option("--out", en_out, "Output directory (ensemble.graph, forecast.csv)");

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "Score a forecast table (and optionally a graph) against a true DAG");
    std::string ev_forecast, ev_truth, ev_estimate, ev_compare = "cpdag", ev_out = "eval-out";
    bool ev_positive_only = false;
    std::size_t ev_bins = 10;
    eval->add_option("--forecast", ev_forecast, "Forecast CSV")->required();
    eval->add_option("--truth", ev_truth, "True DAG (graph text format)")->required();
    eval->add_option("--estimate", ev_estimate, "Estimated graph for SHD / precision / recall");
    eval->add_option("--compare", ev_compare, "cpdag or dag");
    eval->add_flag("--positive-only", ev_positive_only, "Drop 'absent' cells from forecast scoring");
    eval->add_option("--bins", ev_bins, "Calibration bins")->check(CLI::PositiveNumber);
    eval->add_option("--out", ev_out, "Output directory (metrics.csv, calibration.csv)");

    // campaign
    auto* camp = app.add_subcommand("campaign", "Run a simulation campaign from a config file");
    std::string cp_config, cp_out;
    std::optional<std::uint64_t> cp_seed;
    std::optional<unsigned> cp_workers;
    camp->add_option("--config", cp_config, "Campaign config (JSON with comments)")->required();
    camp->add_option("--seed", cp_seed, "Override the master seed");
    camp->add_option("--workers", cp_workers, "Override the worker count")->check(CLI::PositiveNumber);
    camp->add_option("--out", cp_out, "Override the output directory");

    // plot-data
    auto* plot = app.add_subcommand("plot-data", "Emit tidy plot CSVs from a campaign directory");
    std::string pd_dir, pd_out;
    plot->add_option("--dir", pd_dir, "Campaign output directory")->required();
    plot->add_option("--out", pd_out, "Output directory (default: --dir)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim) {
            const fs::path out(sim_out);
            Dataset data;
            Dag truth;
            if (!sim_bif.empty()) {
                const auto bn = parse_bif(slurp(sim_bif));
                truth = bn.dag;
                data = sample_bn(bn, sim_n, sim_seed);
            } else {
                truth = random_forward_dag({sim_nodes, sim_edges, derive_seed(sim_seed, "model")});
                const auto sem = draw_sem_parameters(truth, SplitUniform{}, 1.0, 3.0, derive_seed(sim_seed, "model"));
                data = simulate_sem(sem, sim_n, derive_seed(sim_seed, "data"));
            }
            auto data_os = open_out(out / "data.csv");
            write_csv(data_os, data);
            auto graph_os = open_out(out / "truth.graph");
            write_graph(graph_os, truth.as_pdag());
            std::cout << "wrote " << data.rows() << " rows x " << data.columns() << " columns to " << out << '\n';
        } else if (*search) {
            const auto data = load_data(search_data, search_kind, search_bif);
            SearchOptions opts;
            opts.warn = warn;
            const auto result = run_ges(data, ScoreConfig{search_penalty}, opts);
            auto os = open_out(search_out);
            write_graph(os, result.graph);
            if (!search_trace.empty()) {
                auto ts = open_out(search_trace);
                ts << "step,phase,x,y,subset,delta,total_score\n";
                std::size_t i = 0;
                for (const auto& s : result.trace.steps) {
                    ts << ++i << ',' << (s.phase == Phase::Forward ? "forward" : "backward") << ','
                       << data.labels()[s.x] << ',' << data.labels()[s.y] << ',';
                    for (std::size_t k = 0; k < s.subset.size(); ++k)
                        ts << (k ? ";" : "") << data.labels()[s.subset[k]];
                    ts << ',' << detail::shortest(s.delta) << ',' << detail::shortest(s.total_score) << '\n';
                }
            }
            std::cout << "GES: " << result.graph.edge_count() << " edges, score "
                      << detail::shortest(result.trace.final_score()) << ", "
                      << result.trace.count(Phase::Forward) << " inserts, "
                      << result.trace.count(Phase::Backward) << " deletes\n";
        } else if (*resample) {
            std::ifstream is(rs_data);
            if (!is) throw Error("cannot open '" + rs_data + "'");
            const auto data = read_csv(is, DataKind::Categorical);
            const ResamplePlan plan{parse_resample_method(rs_method), rs_m, rs_fraction, rs_seed};
            const fs::path out(rs_out);
            fs::create_directories(out);
            for (std::size_t id = 0; id < plan.replicates; ++id) {
                const auto idx = replicate_indices(plan, data.rows(), id);
                std::ostringstream name;
                name << "replicate_" << std::setw(4) << std::setfill('0') << id << ".csv";
                auto os = open_out(out / name.str());
                os << "row\n";
                for (auto r : idx.rows) os << r << '\n';
            }
            std::cout << "wrote " << plan.replicates << " replicate index files to " << out << '\n';
        } else if (*ens) {
            const auto data = load_data(en_data, en_kind, en_bif);
            const ResamplePlan plan{parse_resample_method(en_method), en_m, en_fraction, en_seed};
            SearchOptions opts;
            opts.warn = warn;
            const auto result = resampled_ges(data, plan, ScoreConfig{en_penalty}, opts, en_workers);
            const auto graph = ensemble_graph(result.votes);
            const fs::path out(en_out);
            auto gs = open_out(out / "ensemble.graph");
            write_graph(gs, graph);
            auto fs_ = open_out(out / "forecast.csv");
            write_forecast_csv(fs_, forecast_table(result.votes));
            const auto validity = validate_ensemble(graph);
            std::cout << "ensemble of " << result.votes.replicates() << " replicates: " << graph.edge_count()
                      << " edges, acyclic=" << validity.acyclic << ", pattern=" << validity.is_pattern << '\n';
        } else if (*eval) {
            const auto truth_pdag = graph_from_text(slurp(ev_truth));
            const auto truth = Dag::from_pdag(truth_pdag);
            std::ifstream fis(ev_forecast);
            if (!fis) throw Error("cannot open '" + ev_forecast + "'");
            const auto table = read_forecast_csv(fis, truth.labels());
            const auto mode = parse_truth_mode(ev_compare);
            const auto outcomes = outcomes_from_truth(table, truth, mode, ev_positive_only);
            const auto d = murphy_decomposition(outcomes);
            std::string structural = "NA,NA,NA,NA,NA";
            if (!ev_estimate.empty()) {
                const auto est = graph_from_text(slurp(ev_estimate));
                const auto ref = reference_graph(truth, mode);
                const auto c = confusion_counts(est, ref);
                structural = std::to_string(shd(est, ref)) + ',' + detail::fmt(c.adjacency.precision()) + ',' +
                             detail::fmt(c.adjacency.recall()) + ',' + detail::fmt(c.arrowhead.precision()) + ',' +
                             detail::fmt(c.arrowhead.recall());
            }
            const fs::path out(ev_out);
            auto ms = open_out(out / "metrics.csv");
            ms << "shd,adj_precision,adj_recall,arrow_precision,arrow_recall,brier,reliability,"
                  "reliability_corrected,resolution,uncertainty\n"
               << structural << ',' << detail::fmt(d.brier) << ',' << detail::fmt(d.reliability) << ','
               << detail::fmt(d.reliability_corrected) << ',' << detail::fmt(d.resolution) << ','
               << detail::fmt(d.uncertainty) << '\n';
            auto cs = open_out(out / "calibration.csv");
            cs << "bin_low,bin_high,count,mean_forecast,observed_freq\n";
            for (const auto& b : calibration_curve(outcomes, ev_bins).bins)
                cs << detail::fmt(b.low) << ',' << detail::fmt(b.high) << ',' << b.count << ','
                   << detail::fmt(b.mean_forecast) << ',' << detail::fmt(b.observed_frequency) << '\n';
            std::cout << "brier " << detail::fmt(d.brier) << ", reliability (corrected) "
                      << detail::fmt(d.reliability_corrected) << '\n';
        } else if (*camp) {
            auto cfg = parse_campaign_config(slurp(cp_config));
            if (cp_seed) cfg.seed = *cp_seed;
            if (cp_workers) cfg.workers = *cp_workers;
            if (!cp_out.empty()) cfg.output_dir = cp_out;
            const auto result = run_campaign(cfg);
            std::cout << result.records.size() << " runs, " << result.failures << " failures; results in "
                      << cfg.output_dir << '\n';
            for (const auto& r : result.records)
                if (!r.ok)
                    std::cerr << "failed: n=" << r.sample_size << " rep=" << r.repetition << " "
                              << to_string(r.method) << ": " << r.error << '\n';
            return result.failures == 0 ? 0 : 1;
        } else if (*plot) {
            const auto files = emit_plot_data(pd_dir, pd_out);
            std::cout << "plot data for " << files.runs << " runs:";
            for (const auto& f : files.files) std::cout << ' ' << f.string();
            std::cout << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
