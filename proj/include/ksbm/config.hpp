#pragma once

#include "ksbm/clustering.hpp"
#include "ksbm/graphgen.hpp"
#include "ksbm/signatures.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ksbm {

enum class Preset { standard, collapsed, noisy, large, hierarchical, stochastic, custom };
enum class RegimePolicy { analytic, manual, full_window };
enum class ClusterMethod { sce, kmeans, hierarchical };

std::string to_string(Preset p);
Preset preset_from_string(const std::string& s);
std::string to_string(RegimePolicy p);
RegimePolicy regime_policy_from_string(const std::string& s);
std::string to_string(ClusterMethod c);
ClusterMethod cluster_method_from_string(const std::string& s);

struct ExperimentConfig {
    Preset model = Preset::standard;
    std::uint64_t seed = 0;
    std::string output = "ksbm-out";

    // graph; for hierarchical graphs n is the fine count n1
    int n = 3;
    int m = 33;
    double kappa = 100.0;
    int n2 = 3;
    double r = 0.05;

    // dynamics; mu is evenly spaced on mu_range unless given explicitly
    double sigma = 0.1;
    std::pair<double, double> mu_range{2.0 / 3.0, 2.0};
    std::optional<std::vector<double>> mu;
    double T = 10.0;
    int steps = 5000;
    int output_steps = 500;
    double b = 0.0;

    std::vector<Transform> transforms{Transform::identity, Transform::sin};
    std::vector<Statistic> statistics{Statistic::lead, Statistic::covariance};

    RegimePolicy regime = RegimePolicy::analytic;
    std::optional<double> t_trans;  // manual policy
    std::optional<double> t_ss;     // manual policy
    double ss_tol = 1e-2;
    double ss_window = 1.0;
    std::optional<double> ss_horizon;  // defaults to data end - t_ss

    ClusterMethod method = ClusterMethod::sce;
    VectorMode vector_mode = VectorMode::row_and_column;
    double stabilizer = 0.0;
    int clusters = 0;  // K for the baselines; 0 means the true community count
    int prune = 0;     // 0 disables pruning
    Linkage linkage = Linkage::average;

    Vector mu_vector() const;
    bool hierarchical() const { return model == Preset::hierarchical; }
    HierarchicalSpec hierarchy() const { return {n, n2, r, m}; }
    // Throws ConfigError.
    void validate() const;
};

ExperimentConfig make_preset(Preset p);

// Key = value lines; `[section]` prefixes later keys with "section.".
// Values are numbers, quoted strings, booleans or flat arrays of those.
// `model` is applied first, the remaining keys override the preset.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& file);
// One "key=value" assignment in the same value syntax; bare strings are accepted.
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

std::vector<std::string> config_keys();
nlohmann::ordered_json to_json(const ExperimentConfig& cfg);

}  // namespace ksbm
