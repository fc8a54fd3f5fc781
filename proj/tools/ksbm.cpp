#include "ksbm/clustering.hpp"
#include "ksbm/config.hpp"
#include "ksbm/dynamics.hpp"
#include "ksbm/figures.hpp"
#include "ksbm/io.hpp"
#include "ksbm/pipeline.hpp"
#include "ksbm/signatures.hpp"
#include "ksbm/spikes.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <numbers>

namespace fs = std::filesystem;
using namespace ksbm;

namespace {

enum Exit { ok = 0, failure = 1, config_error = 2, numerical_failure = 3 };

struct ConfigFlags {
    std::string preset;
    std::string file;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::string out;

    void attach(CLI::App* app, bool with_file = true) {
        app->add_option("--preset", preset, "standard, collapsed, noisy, large, hierarchical, stochastic, custom");
        if (with_file) app->add_option("--config", file, "key = value config file");
        app->add_option("--set", overrides, "override one key, e.g. --set graph.kappa=50");
        app->add_option("--seed", seed, "RNG seed");
        app->add_option("--out", out, "output directory");
    }

    ExperimentConfig resolve() const {
        ExperimentConfig cfg = file.empty() ? ExperimentConfig{} : load_config(file);
        if (!preset.empty()) {
            if (!file.empty()) throw ConfigError("use either --preset or a config file's model key");
            cfg = make_preset(preset_from_string(preset));
        }
        for (const auto& o : overrides) apply_override(cfg, o);
        if (seed) cfg.seed = *seed;
        if (!out.empty()) cfg.output = out;
        cfg.validate();
        return cfg;
    }
};

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

int cmd_simulate(const ConfigFlags& flags) {
    const ExperimentConfig cfg = flags.resolve();
    const KsbmParams params = build_params(cfg);
    print_warnings(params.graph.warnings);
    const KsbmSystem sys = realize(params);
    const TimeGrid grid = TimeGrid::uniform(cfg.T, cfg.steps, cfg.output_steps);
    const Trajectory traj = cfg.b > 0.0 ? integrate_stochastic(sys, grid) : integrate_full(sys, grid);
    const fs::path dir = cfg.output;
    io::write_graph(dir / "graph.csv", params.graph);
    io::write_trajectory(dir / "trajectory.csv", traj);
    io::Table omegas{{"node", "omega"}, {}};
    for (Index i = 0; i < sys.omega.size(); ++i) omegas.rows.push_back({double(i), sys.omega(i)});
    io::write_table(dir / "omegas.csv", omegas);
    io::write_json(dir / "manifest.json", {{"config", to_json(cfg)}});
    std::cout << "wrote " << traj.samples() << " samples of " << traj.oscillators()
              << " oscillators to " << dir.string() << '\n';
    return ok;
}

struct SignatureFlags {
    std::string trajectory;
    std::string transform = "sin";
    std::string statistic = "lead";
    std::optional<double> t_trans, t_ss, horizon;
    int level = 0;
    std::string out = "ksbm-signatures";
};

int cmd_signatures(const SignatureFlags& f) {
    const Path path = transform(to_path(io::read_trajectory(f.trajectory)),
                                transform_from_string(f.transform));
    const Statistic stat = statistic_from_string(f.statistic);
    const fs::path dir = f.out;
    auto emit = [&](const std::string& regime, const Window& w, const Matrix& M) {
        const fs::path file = dir / (regime + "_" + to_string(stat) + "_" + f.transform + ".csv");
        io::write_matrix(file, M);
        io::write_json(io::sidecar(file), {{"transform", f.transform},
                                           {"statistic", to_string(stat)},
                                           {"regime", regime},
                                           {"window", {{"begin", w.begin}, {"end", w.end}}},
                                           {"base", "window start"}});
    };
    const double t0 = path.times(0), t1 = path.times(path.samples() - 1);
    if (!f.t_trans) {
        std::cerr << "warning: no --t-trans given; using the full window\n";
        emit("full", {t0, t1}, compute_statistic(path, stat));
    } else {
        const double horizon = f.horizon ? *f.horizon : (f.t_ss ? t1 - *f.t_ss : t1 - t0);
        const RegimeMatrices rm = regime_split(path, {*f.t_trans, f.t_ss}, horizon, stat);
        emit("clusterization", rm.clusterization, rm.C);
        emit("transient", rm.transient, rm.TR);
        if (rm.SS) emit("steady", *rm.steady, *rm.SS);
    }
    if (f.level > 0) {
        const Signature S = signature(path, f.level);
        io::Json j{{"dim", S.dim}, {"level", S.level}, {"levels", S.levels}};
        io::write_json(dir / "signature.json", j);
    }
    std::cout << "wrote matrices to " << dir.string() << '\n';
    return ok;
}

struct ClusterFlags {
    std::string matrix;
    std::string method = "sce";
    std::string vector_mode = "row_and_column";
    std::string linkage = "average";
    std::string truth;
    double stabilizer = 0.0;
    int k = 0;
    int prune = 0;
    std::uint64_t seed = 0;
    std::string out = "ksbm-cluster";
};

int cmd_cluster(const ClusterFlags& f) {
    const Matrix B = io::read_matrix(f.matrix);
    const VectorMode mode = vector_mode_from_string(f.vector_mode);
    const ClusterMethod method = cluster_method_from_string(f.method);
    if (method != ClusterMethod::sce && f.k < 1) throw ConfigError("--k is required for baselines");
    CommunityEstimate est;
    const Matrix D = distance_matrix(B, mode);
    switch (method) {
        case ClusterMethod::sce: {
            SceOptions opts;
            opts.mode = mode;
            opts.stabilizer = f.stabilizer;
            est = sce_with_distances(B, D, opts);
            if (f.prune > 0 && est.k() > f.prune) est = prune(est, D, f.prune);
            break;
        }
        case ClusterMethod::kmeans:
            est.labels = kmeans_cluster(representative_vectors(B, mode), f.k, f.seed);
            break;
        case ClusterMethod::hierarchical:
            est.labels = hierarchical_cluster(D, linkage_from_string(f.linkage), f.k);
            break;
    }
    const BlockScore s = block_clustering(B, est.assignment(), f.stabilizer);
    const int k = est.assignment().count;
    io::Json report{{"h", s.h}, {"d", s.d}};
    report["g"] = s.infinite ? io::Json("inf") : io::Json(s.g);
    report["g_normalized"] = s.infinite ? io::Json("inf") : io::Json(s.g / k);
    report["k"] = k;
    if (!f.truth.empty()) report["agreement"] = agreement(io::read_labels(f.truth), est.labels);
    const fs::path dir = f.out;
    io::write_labels(dir / "labels.csv", est.labels);
    io::write_json(dir / "scores.json", report);
    std::cout << report.dump() << '\n';
    return ok;
}

int cmd_pipeline(const ConfigFlags& flags, const std::vector<std::string>& files) {
    std::vector<ExperimentConfig> configs;
    if (files.size() > 1) {
        for (const auto& file : files) {
            ConfigFlags one = flags;
            one.file = file;
            one.out.clear();
            configs.push_back(one.resolve());
        }
        if (!flags.out.empty())
            for (auto& c : configs) c.output = (fs::path(flags.out) / fs::path(c.output).filename()).string();
    } else {
        ConfigFlags one = flags;
        if (files.size() == 1) one.file = files.front();
        configs.push_back(one.resolve());
    }
    const auto results = run_batch(configs);
    for (const auto& r : results) {
        print_warnings(r.warnings);
        std::cout << r.config.output << ": t_trans=" << (r.t_trans ? io::format_number(*r.t_trans) : "none")
                  << " t_ss=" << (r.t_ss ? io::format_number(*r.t_ss) : "none") << '\n';
        for (const auto& e : r.estimates)
            std::cout << "  " << e.name() << " k=" << e.estimate.k()
                      << " agreement=" << io::format_number(e.agreement) << '\n';
    }
    return ok;
}

struct SpikeFlags {
    std::string spikes;
    std::string trials;
    std::vector<int> units;
    double dt = 0.002;
    double tau = 0.040;
    std::string out = "spikes.csv";
};

int cmd_ingest(const SpikeFlags& f) {
    SpikeIngestConfig cfg;
    cfg.dt = f.dt;
    cfg.tau = f.tau;
    cfg.trials = read_trials(f.trials);
    if (!f.units.empty()) cfg.units = f.units;
    const SpikeSeries s = ingest_spikes(read_spikes(f.spikes), cfg);
    io::Table t{{"t"}, {}};
    for (int u : s.units) t.header.push_back("unit_" + std::to_string(u));
    for (int k = 0; k < s.path.samples(); ++k) {
        std::vector<double> row{s.path.times(k)};
        for (int c = 0; c < s.path.dim(); ++c) row.push_back(s.path.values(k, c));
        t.rows.push_back(std::move(row));
    }
    io::write_table(f.out, t);
    std::cout << "wrote " << s.path.samples() << " bins of " << s.units.size() << " units to "
              << f.out << '\n';
    return ok;
}

int cmd_figures(const std::string& bundle, const std::string& out) {
    const FigureSummary s = emit_figures(bundle, out);
    print_warnings(s.warnings);
    std::cout << "wrote " << s.files.size() << " figure files to " << out << '\n';
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kuramoto stochastic block model toolkit"};
    app.require_subcommand(1);

    ConfigFlags sim_flags, pipe_flags;
    auto* sim = app.add_subcommand("simulate", "integrate a KSBM and write its trajectory");
    sim_flags.attach(sim);

    SignatureFlags sig;
    auto* sigcmd = app.add_subcommand("signatures", "regime-split lead or covariance matrices");
    sigcmd->add_option("--trajectory", sig.trajectory, "trajectory CSV")->required();
    sigcmd->add_option("--transform", sig.transform, "identity or sin");
    sigcmd->add_option("--stat", sig.statistic, "lead or cov");
    sigcmd->add_option("--t-trans", sig.t_trans, "transition time (s)");
    sigcmd->add_option("--t-ss", sig.t_ss, "steady-state time (s)");
    sigcmd->add_option("--ss-horizon", sig.horizon, "steady-state window length (s)");
    sigcmd->add_option("--level", sig.level, "also write the full signature up to this level");
    sigcmd->add_option("--out", sig.out, "output directory");

    ClusterFlags cl;
    auto* clcmd = app.add_subcommand("cluster", "estimate communities from a matrix");
    clcmd->add_option("--matrix", cl.matrix, "matrix CSV")->required();
    clcmd->add_option("--method", cl.method, "sce, kmeans or hierarchical");
    clcmd->add_option("--vector-mode", cl.vector_mode, "row_and_column or column");
    clcmd->add_option("--linkage", cl.linkage, "single, average or complete");
    clcmd->add_option("--stabilizer", cl.stabilizer, "additive term in g = d / (h + s)");
    clcmd->add_option("--k", cl.k, "community count for baselines");
    clcmd->add_option("--prune", cl.prune, "merge SCE communities down to this count");
    clcmd->add_option("--truth", cl.truth, "labels CSV to score against");
    clcmd->add_option("--seed", cl.seed, "k-means seed");
    clcmd->add_option("--out", cl.out, "output directory");

    std::vector<std::string> pipe_files;
    auto* pipe = app.add_subcommand("pipeline", "run experiments end to end");
    pipe_flags.attach(pipe, false);
    pipe->add_option("--config", pipe_files, "config files; several run as a parallel batch");

    SpikeFlags sp;
    auto* spcmd = app.add_subcommand("ingest-spikes", "bin and filter spike trains");
    spcmd->add_option("--spikes", sp.spikes, "CSV with unit_id, trial_id, spike_time_s")->required();
    spcmd->add_option("--trials", sp.trials, "CSV with trial_id, start_s, end_s")->required();
    spcmd->add_option("--units", sp.units, "unit ids in output order");
    spcmd->add_option("--dt", sp.dt, "bin width (s)");
    spcmd->add_option("--tau", sp.tau, "filter time constant (s)");
    spcmd->add_option("--out", sp.out, "output CSV");

    std::string bundle, fig_out = "figures";
    auto* figcmd = app.add_subcommand("figures", "heatmaps and curve data from a pipeline bundle");
    figcmd->add_option("--bundle", bundle, "pipeline output directory")->required();
    figcmd->add_option("--out", fig_out, "figure directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    try {
        if (*sim) return cmd_simulate(sim_flags);
        if (*sigcmd) return cmd_signatures(sig);
        if (*clcmd) return cmd_cluster(cl);
        if (*pipe) return cmd_pipeline(pipe_flags, pipe_files);
        if (*spcmd) return cmd_ingest(sp);
        if (*figcmd) return cmd_figures(bundle, fig_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const ParameterError& e) {
        std::cerr << "invalid parameter: " << e.what() << '\n';
        return config_error;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return config_error;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return numerical_failure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return failure;
    }
    return failure;
}
