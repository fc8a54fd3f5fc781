#pragma once

#include "ksbm/clustering.hpp"
#include "ksbm/config.hpp"
#include "ksbm/dynamics.hpp"
#include "ksbm/graphgen.hpp"
#include "ksbm/signatures.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ksbm {

// Regime names: clusterization, transient, steady, full.
struct RegimeEstimate {
    std::string regime;
    Transform transform = Transform::sin;
    Statistic statistic = Statistic::lead;
    Window window;
    Matrix matrix;
    BlockScore truth_score;     // under the true fine partition
    BlockScore estimate_score;  // under the estimated partition
    CommunityEstimate estimate;
    double agreement = 0.0;
    std::optional<double> coarse_agreement;  // hierarchical graphs only

    std::string name() const;
};

struct ExperimentResult {
    ExperimentConfig config;
    CouplingGraph graph;
    Vector omegas;
    Trajectory trajectory;
    VarianceCurve variance;       // dominated identical Gaussian model from pi^2/3
    CommunityStats stats;         // of the branch-aligned trajectory
    std::optional<double> t_trans;
    std::optional<double> t_ss;
    std::optional<double> empirical_t_trans;
    std::vector<RegimeEstimate> estimates;
    std::vector<std::string> warnings;

    const RegimeEstimate* find(const std::string& regime, Transform f, Statistic s) const;
};

// Errors keep their type; the message gains a "<stage>: " prefix.
ExperimentResult run_experiment(const ExperimentConfig& cfg);
void write_bundle(const ExperimentResult& result, const std::filesystem::path& dir);
ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& dir);

// Each config writes into its own `output` directory; directories must differ.
std::vector<ExperimentResult> run_batch(const std::vector<ExperimentConfig>& configs,
                                        bool write = true);

// Graph of the config's kind, seeded with cfg.seed.
CouplingGraph build_graph(const ExperimentConfig& cfg);
KsbmParams build_params(const ExperimentConfig& cfg);

}  // namespace ksbm
