#include "ksbm/pipeline.hpp"

#include "ksbm/io.hpp"

#include <chrono>
#include <ctime>
#include <future>
#include <limits>
#include <numbers>
#include <set>

namespace ksbm {

namespace {

constexpr const char* kVersion = "1.0.0";

template <class F>
auto stage(const std::string& name, F&& f) {
    const std::string tag = name + ": ";
    try {
        return f();
    } catch (const IntegrationDiverged& e) {
        throw IntegrationDiverged(tag + e.what(), e.last_valid_time);
    } catch (const ParameterError& e) {
        throw ParameterError(tag + e.what());
    } catch (const CapacityError& e) {
        throw CapacityError(tag + e.what());
    } catch (const NoLockingError& e) {
        throw NoLockingError(tag + e.what());
    } catch (const DegenerateClustering& e) {
        throw DegenerateClustering(tag + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError(tag + e.what());
    } catch (const DataError& e) {
        throw DataError(tag + e.what());
    } catch (const Error& e) {
        throw Error(tag + e.what());
    }
}

// Node of each community with the smallest summed distance to its members.
std::vector<int> medoids_of(const std::vector<int>& labels, const Matrix& D) {
    const auto members = CommunityAssignment::from_labels(labels).members();
    std::vector<int> out;
    for (const auto& group : members) {
        int best = group.front();
        double best_cost = std::numeric_limits<double>::infinity();
        for (int i : group) {
            double cost = 0.0;
            for (int j : group) cost += D(i, j);
            if (cost < best_cost) {
                best_cost = cost;
                best = i;
            }
        }
        out.push_back(best);
    }
    return out;
}

void cluster_matrix(const ExperimentConfig& cfg, const CouplingGraph& g, RegimeEstimate& est) {
    const Matrix& B = est.matrix;
    const int K = cfg.clusters > 0 ? cfg.clusters : g.communities.count;
    est.truth_score = block_clustering(B, g.communities, cfg.stabilizer);
    CommunityEstimate e;
    switch (cfg.method) {
        case ClusterMethod::sce: {
            const Matrix D = distance_matrix(B, cfg.vector_mode);
            SceOptions opts;
            opts.mode = cfg.vector_mode;
            opts.stabilizer = cfg.stabilizer;
            e = sce_with_distances(B, D, opts);
            if (cfg.prune > 0 && e.k() > cfg.prune) e = prune(e, D, cfg.prune);
            break;
        }
        case ClusterMethod::kmeans:
            e.labels = kmeans_cluster(representative_vectors(B, cfg.vector_mode), K, cfg.seed);
            break;
        case ClusterMethod::hierarchical:
            e.labels = hierarchical_cluster(distance_matrix(B, cfg.vector_mode), cfg.linkage, K);
            break;
    }
    if (e.medoids.empty()) e.medoids = medoids_of(e.labels, distance_matrix(B, cfg.vector_mode));
    est.estimate_score = block_clustering(B, e.assignment(), cfg.stabilizer);
    if (cfg.method != ClusterMethod::sce || cfg.prune > 0)
        e.score = est.estimate_score.g / std::max(e.k(), 1);
    est.agreement = agreement(g.communities, e.labels);
    if (g.coarse) est.coarse_agreement = agreement(*g.coarse, e.labels);
    est.estimate = std::move(e);
}

io::Json window_json(const Window& w) { return {{"begin", w.begin}, {"end", w.end}}; }

io::Json score_json(const BlockScore& s) {
    io::Json j{{"h", s.h}, {"d", s.d}, {"n_used", s.n_used}};
    if (s.infinite)
        j["g"] = "inf";
    else
        j["g"] = s.g;
    return j;
}

}  // namespace

std::string RegimeEstimate::name() const {
    return regime + "_" + to_string(statistic) + "_" + to_string(transform);
}

const RegimeEstimate* ExperimentResult::find(const std::string& regime, Transform f,
                                             Statistic s) const {
    for (const auto& e : estimates)
        if (e.regime == regime && e.transform == f && e.statistic == s) return &e;
    return nullptr;
}

CouplingGraph build_graph(const ExperimentConfig& cfg) {
    if (cfg.hierarchical()) return generate_hierarchical(cfg.hierarchy(), cfg.kappa, cfg.seed);
    return generate_assortative(cfg.n, cfg.m, cfg.kappa, cfg.seed);
}

KsbmParams build_params(const ExperimentConfig& cfg) {
    KsbmParams p;
    p.graph = build_graph(cfg);
    p.mu = cfg.mu_vector();
    p.sigma = cfg.sigma;
    p.seed = cfg.seed;
    p.brownian_b = cfg.b;
    return p;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    stage("config", [&] { cfg.validate(); return 0; });
    ExperimentResult res;
    res.config = cfg;

    const KsbmParams params = stage("graph", [&] { return build_params(cfg); });
    res.graph = params.graph;
    for (const auto& w : res.graph.warnings) res.warnings.push_back("graph: " + w);

    const TimeGrid grid = stage("dynamics", [&] {
        return TimeGrid::uniform(cfg.T, cfg.steps, cfg.output_steps);
    });
    const KsbmSystem sys = stage("dynamics", [&] { return realize(params); });
    res.omegas = sys.omega;

    Trajectory deterministic;
    stage("dynamics", [&] {
        if (cfg.b > 0.0) {
            res.trajectory = integrate_stochastic(sys, grid);
            KsbmSystem companion = sys;
            companion.b = 0.0;
            deterministic = integrate_full(companion, grid);
        } else {
            res.trajectory = integrate_full(sys, grid);
            deterministic = res.trajectory;
        }
        return 0;
    });

    stage("regimes", [&] {
        const auto& g = res.graph.communities;
        const Trajectory aligned = align_phase_branches(res.trajectory, g);
        res.stats = community_stats(aligned, g);
        res.empirical_t_trans = empirical_transition_time(res.trajectory, g, cfg.m);
        const double V0 = std::numbers::pi * std::numbers::pi / 3.0;
        res.variance =
            integrate_variance_dominated_identical(cfg.kappa, cfg.n, V0, cfg.T / cfg.steps, cfg.T);
        switch (cfg.regime) {
            case RegimePolicy::analytic: {
                res.t_trans = transition_time(res.variance, cfg.m);
                res.t_ss = detect_steady_state(deterministic, cfg.ss_tol, cfg.ss_window);
                break;
            }
            case RegimePolicy::manual:
                res.t_trans = cfg.t_trans;
                res.t_ss = cfg.t_ss;
                break;
            case RegimePolicy::full_window:
                break;
        }
        if (res.t_trans && !(*res.t_trans > 0.0 && *res.t_trans < cfg.T)) {
            res.warnings.push_back("regimes: transition time outside the simulated window");
            res.t_trans.reset();
        }
        if (cfg.regime != RegimePolicy::full_window && !res.t_trans)
            res.warnings.push_back(
                "regimes: no transition time found; using full-window matrices");
        if (res.t_trans && res.t_ss && !(*res.t_ss > *res.t_trans)) {
            res.warnings.push_back("regimes: steady state precedes the transition; ignoring t_ss");
            res.t_ss.reset();
        }
        return 0;
    });

    const Path base = stage("signatures", [&] { return to_path(res.trajectory); });
    for (Transform f : cfg.transforms) {
        const Path path = transform(base, f);
        for (Statistic s : cfg.statistics) {
            std::vector<RegimeEstimate> batch;
            stage("signatures", [&] {
                auto add = [&](const char* regime, Window w, Matrix M) {
                    RegimeEstimate e;
                    e.regime = regime;
                    e.transform = f;
                    e.statistic = s;
                    e.window = w;
                    e.matrix = std::move(M);
                    batch.push_back(std::move(e));
                };
                if (!res.t_trans) {
                    add("full", {path.times(0), path.times(path.samples() - 1)},
                        compute_statistic(path, s));
                    return 0;
                }
                const double end = path.times(path.samples() - 1);
                const double horizon =
                    cfg.ss_horizon ? *cfg.ss_horizon : (res.t_ss ? end - *res.t_ss : end - path.times(0));
                RegimeMatrices rm =
                    regime_split(path, RegimeBoundaries{*res.t_trans, res.t_ss}, horizon, s);
                add("clusterization", rm.clusterization, std::move(rm.C));
                add("transient", rm.transient, std::move(rm.TR));
                if (rm.SS) add("steady", *rm.steady, std::move(*rm.SS));
                return 0;
            });
            stage("clustering", [&] {
                for (auto& e : batch) cluster_matrix(cfg, res.graph, e);
                return 0;
            });
            for (auto& e : batch) res.estimates.push_back(std::move(e));
        }
    }
    return res;
}

void write_bundle(const ExperimentResult& res, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const auto& cfg = res.config;

    io::Json manifest;
    manifest["version"] = kVersion;
    manifest["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                        std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION);
    manifest["config"] = to_json(cfg);
    manifest["seeds"] = {{"user", cfg.seed},
                         {"streams",
                          {{"graph", static_cast<int>(Stream::graph)},
                           {"frequencies", static_cast<int>(Stream::frequencies)},
                           {"initial_phases", static_cast<int>(Stream::initial_phases)},
                           {"brownian", static_cast<int>(Stream::brownian)},
                           {"kmeans", static_cast<int>(Stream::kmeans)}}}};
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    manifest["created"] = stamp;
    io::write_json(dir / "manifest.json", manifest);

    io::write_graph(dir / "graph.csv", res.graph);
    io::write_trajectory(dir / "trajectory.csv", res.trajectory);

    io::Table omegas{{"node", "omega"}, {}};
    for (Index i = 0; i < res.omegas.size(); ++i) omegas.rows.push_back({double(i), res.omegas(i)});
    io::write_table(dir / "omegas.csv", omegas);

    io::Table variance{{"t", "V"}, {}};
    for (Index k = 0; k < res.variance.times.size(); ++k)
        variance.rows.push_back({res.variance.times(k), res.variance.values(k)});
    io::write_table(dir / "variance.csv", variance);

    io::Table means{{"t"}, {}}, vars{{"t"}, {}};
    for (Index r = 0; r < res.stats.means.cols(); ++r) {
        means.header.push_back("mean_" + std::to_string(r));
        vars.header.push_back("var_" + std::to_string(r));
    }
    for (Index k = 0; k < res.stats.means.rows(); ++k) {
        std::vector<double> a{res.trajectory.times(k)}, b{res.trajectory.times(k)};
        for (Index r = 0; r < res.stats.means.cols(); ++r) {
            a.push_back(res.stats.means(k, r));
            b.push_back(res.stats.variances(k, r));
        }
        means.rows.push_back(std::move(a));
        vars.rows.push_back(std::move(b));
    }
    io::write_table(dir / "community_means.csv", means);
    io::write_table(dir / "community_variances.csv", vars);

    io::Json report;
    report["model"] = to_string(cfg.model);
    report["seed"] = cfg.seed;
    report["t_trans"] = res.t_trans ? io::Json(*res.t_trans) : io::Json(nullptr);
    report["t_ss"] = res.t_ss ? io::Json(*res.t_ss) : io::Json(nullptr);
    report["empirical_t_trans"] =
        res.empirical_t_trans ? io::Json(*res.empirical_t_trans) : io::Json(nullptr);
    report["warnings"] = res.warnings;
    report["results"] = io::Json::array();
    io::write_labels(dir / "labels" / "truth.csv", res.graph.communities.labels);
    if (res.graph.coarse) io::write_labels(dir / "labels" / "truth_coarse.csv", res.graph.coarse->labels);
    for (const auto& e : res.estimates) {
        const fs::path mfile = dir / "matrices" / (e.name() + ".csv");
        io::write_matrix(mfile, e.matrix);
        io::write_json(io::sidecar(mfile), {{"transform", to_string(e.transform)},
                                            {"statistic", to_string(e.statistic)},
                                            {"regime", e.regime},
                                            {"window", window_json(e.window)},
                                            {"base", "window start"}});
        io::write_labels(dir / "labels" / (e.name() + ".csv"), e.estimate.labels);
        io::Json r;
        r["regime"] = e.regime;
        r["transform"] = to_string(e.transform);
        r["statistic"] = to_string(e.statistic);
        r["window"] = window_json(e.window);
        const io::Json est = score_json(e.estimate_score);
        r["h"] = est["h"];
        r["d"] = est["d"];
        r["g"] = est["g"];
        r["g_normalized"] = e.estimate.score;
        r["k"] = e.estimate.k();
        r["agreement"] = e.agreement;
        if (e.coarse_agreement) r["coarse_agreement"] = *e.coarse_agreement;
        r["truth"] = score_json(e.truth_score);
        report["results"].push_back(std::move(r));
    }
    io::write_json(dir / "report.json", report);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    ExperimentResult res = run_experiment(cfg);
    stage("output", [&] { write_bundle(res, dir); return 0; });
    return res;
}

std::vector<ExperimentResult> run_batch(const std::vector<ExperimentConfig>& configs, bool write) {
    if (write) {
        std::set<std::filesystem::path> dirs;
        for (const auto& c : configs)
            if (!dirs.insert(std::filesystem::weakly_canonical(c.output)).second)
                throw ConfigError("batch experiments need distinct output directories");
    }
    std::vector<std::future<ExperimentResult>> jobs;
    jobs.reserve(configs.size());
    for (const auto& c : configs)
        jobs.push_back(std::async(std::launch::async, [&c, write] {
            return write ? run_experiment(c, c.output) : run_experiment(c);
        }));
    std::vector<ExperimentResult> out;
    out.reserve(jobs.size());
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

}  // namespace ksbm
