#include "ksbm/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace ksbm {

namespace {

template <class E>
struct Names {
    E value;
    const char* name;
};

constexpr Names<Preset> kPresets[] = {
    {Preset::standard, "standard"},   {Preset::collapsed, "collapsed"},
    {Preset::noisy, "noisy"},         {Preset::large, "large"},
    {Preset::hierarchical, "hierarchical"}, {Preset::stochastic, "stochastic"},
    {Preset::custom, "custom"},
};
constexpr Names<RegimePolicy> kPolicies[] = {
    {RegimePolicy::analytic, "analytic"},
    {RegimePolicy::manual, "manual"},
    {RegimePolicy::full_window, "full-window"},
};
constexpr Names<ClusterMethod> kMethods[] = {
    {ClusterMethod::sce, "sce"},
    {ClusterMethod::kmeans, "kmeans"},
    {ClusterMethod::hierarchical, "hierarchical"},
};

template <class E, std::size_t K>
std::string name_of(const Names<E> (&table)[K], E v) {
    for (const auto& e : table)
        if (e.value == v) return e.name;
    return "?";
}

template <class E, std::size_t K>
E parse_name(const Names<E> (&table)[K], const std::string& s, const char* what) {
    for (const auto& e : table)
        if (s == e.name) return e.value;
    throw ConfigError(std::string("unknown ") + what + ": " + s);
}

struct Value {
    enum class Kind { number, string, boolean, array } kind = Kind::number;
    double number = 0.0;
    std::string text;
    bool flag = false;
    std::vector<Value> items;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Drops a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

Value parse_scalar(const std::string& raw, bool allow_bare) {
    const std::string s = trim(raw);
    Value v;
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        v.kind = Value::Kind::string;
        v.text = s.substr(1, s.size() - 2);
        return v;
    }
    if (s == "true" || s == "false") {
        v.kind = Value::Kind::boolean;
        v.flag = s == "true";
        return v;
    }
    double x = 0.0;
    const char* first = s.data();
    if (!s.empty() && *first == '+') ++first;
    const auto res = std::from_chars(first, s.data() + s.size(), x);
    if (!s.empty() && res.ec == std::errc() && res.ptr == s.data() + s.size()) {
        v.number = x;
        return v;
    }
    if (allow_bare && !s.empty()) {
        v.kind = Value::Kind::string;
        v.text = s;
        return v;
    }
    throw ConfigError("cannot parse value: " + s);
}

Value parse_value(const std::string& raw, bool allow_bare) {
    const std::string s = trim(raw);
    if (s.empty()) throw ConfigError("missing value");
    if (s.front() != '[') return parse_scalar(s, allow_bare);
    if (s.back() != ']') throw ConfigError("unterminated array: " + s);
    Value v;
    v.kind = Value::Kind::array;
    const std::string body = trim(s.substr(1, s.size() - 2));
    if (body.empty()) return v;
    std::string item;
    bool quoted = false;
    for (char c : body) {
        if (c == '"') quoted = !quoted;
        if (c == ',' && !quoted) {
            v.items.push_back(parse_scalar(item, allow_bare));
            item.clear();
        } else {
            item += c;
        }
    }
    v.items.push_back(parse_scalar(item, allow_bare));
    return v;
}

double as_number(const Value& v, const std::string& key) {
    if (v.kind != Value::Kind::number) throw ConfigError(key + " expects a number");
    return v.number;
}

int as_int(const Value& v, const std::string& key) {
    const double x = as_number(v, key);
    if (x != std::floor(x) || std::abs(x) > 1e9) throw ConfigError(key + " expects an integer");
    return static_cast<int>(x);
}

std::string as_string(const Value& v, const std::string& key) {
    if (v.kind != Value::Kind::string) throw ConfigError(key + " expects a string");
    return v.text;
}

std::vector<double> as_numbers(const Value& v, const std::string& key) {
    if (v.kind != Value::Kind::array) throw ConfigError(key + " expects an array");
    std::vector<double> out;
    for (const auto& item : v.items) out.push_back(as_number(item, key));
    return out;
}

std::vector<std::string> as_strings(const Value& v, const std::string& key) {
    if (v.kind == Value::Kind::string) return {v.text};
    if (v.kind != Value::Kind::array) throw ConfigError(key + " expects an array of strings");
    std::vector<std::string> out;
    for (const auto& item : v.items) out.push_back(as_string(item, key));
    return out;
}

// Converts parse errors of the string helpers into ConfigError.
template <class F>
auto guarded(F&& f) {
    try {
        return f();
    } catch (const ParameterError& e) {
        throw ConfigError(e.what());
    }
}

void apply(ExperimentConfig& c, const std::string& key, const Value& v) {
    if (key == "model") {
        c = make_preset(preset_from_string(as_string(v, key)));
    } else if (key == "seed") {
        const double s = as_number(v, key);
        if (s < 0 || s != std::floor(s)) throw ConfigError("seed must be a nonnegative integer");
        c.seed = static_cast<std::uint64_t>(s);
    } else if (key == "output") {
        c.output = as_string(v, key);
    } else if (key == "graph.n") {
        c.n = as_int(v, key);
    } else if (key == "graph.m") {
        c.m = as_int(v, key);
    } else if (key == "graph.kappa") {
        c.kappa = as_number(v, key);
    } else if (key == "graph.n2") {
        c.n2 = as_int(v, key);
    } else if (key == "graph.r") {
        c.r = as_number(v, key);
    } else if (key == "dynamics.sigma") {
        c.sigma = as_number(v, key);
    } else if (key == "dynamics.mu") {
        c.mu = as_numbers(v, key);
    } else if (key == "dynamics.mu_range") {
        const auto r = as_numbers(v, key);
        if (r.size() != 2) throw ConfigError("dynamics.mu_range expects [low, high]");
        c.mu_range = {r[0], r[1]};
        c.mu.reset();
    } else if (key == "dynamics.T") {
        c.T = as_number(v, key);
    } else if (key == "dynamics.steps") {
        c.steps = as_int(v, key);
    } else if (key == "dynamics.output_steps") {
        c.output_steps = as_int(v, key);
    } else if (key == "dynamics.b") {
        c.b = as_number(v, key);
    } else if (key == "signatures.transforms") {
        c.transforms.clear();
        for (const auto& s : as_strings(v, key))
            c.transforms.push_back(guarded([&] { return transform_from_string(s); }));
    } else if (key == "signatures.statistics") {
        c.statistics.clear();
        for (const auto& s : as_strings(v, key))
            c.statistics.push_back(guarded([&] { return statistic_from_string(s); }));
    } else if (key == "regime.policy") {
        c.regime = regime_policy_from_string(as_string(v, key));
    } else if (key == "regime.t_trans") {
        c.t_trans = as_number(v, key);
    } else if (key == "regime.t_ss") {
        c.t_ss = as_number(v, key);
    } else if (key == "regime.ss_tol") {
        c.ss_tol = as_number(v, key);
    } else if (key == "regime.ss_window") {
        c.ss_window = as_number(v, key);
    } else if (key == "regime.ss_horizon") {
        c.ss_horizon = as_number(v, key);
    } else if (key == "clustering.method") {
        c.method = cluster_method_from_string(as_string(v, key));
    } else if (key == "clustering.vector_mode") {
        const auto s = as_string(v, key);
        c.vector_mode = guarded([&] { return vector_mode_from_string(s); });
    } else if (key == "clustering.stabilizer") {
        c.stabilizer = as_number(v, key);
    } else if (key == "clustering.k") {
        c.clusters = as_int(v, key);
    } else if (key == "clustering.prune") {
        c.prune = as_int(v, key);
    } else if (key == "clustering.linkage") {
        const auto s = as_string(v, key);
        c.linkage = guarded([&] { return linkage_from_string(s); });
    } else {
        throw ConfigError("unknown config key: " + key);
    }
}

}  // namespace

std::string to_string(Preset p) { return name_of(kPresets, p); }
Preset preset_from_string(const std::string& s) { return parse_name(kPresets, s, "preset"); }
std::string to_string(RegimePolicy p) { return name_of(kPolicies, p); }
RegimePolicy regime_policy_from_string(const std::string& s) {
    return parse_name(kPolicies, s, "regime policy");
}
std::string to_string(ClusterMethod c) { return name_of(kMethods, c); }
ClusterMethod cluster_method_from_string(const std::string& s) {
    return parse_name(kMethods, s, "clustering method");
}

Vector ExperimentConfig::mu_vector() const {
    if (mu) return Eigen::Map<const Vector>(mu->data(), static_cast<Index>(mu->size()));
    Vector v(n);
    for (int r = 0; r < n; ++r)
        v(r) = n == 1 ? mu_range.first
                      : mu_range.first + (mu_range.second - mu_range.first) * r / (n - 1);
    return v;
}

void ExperimentConfig::validate() const {
    if (n < 1 || m < 1) throw ConfigError("graph.n and graph.m must be >= 1");
    if (!hierarchical() && n < 2) throw ConfigError("assortative graphs need graph.n >= 2");
    if (!std::isfinite(kappa) || kappa < 0) throw ConfigError("graph.kappa must be finite and >= 0");
    if (hierarchical()) {
        if (n2 < 2 || n % n2 != 0) throw ConfigError("graph.n2 must be >= 2 and divide graph.n");
        if (!(r > 0.0 && r <= 1.0)) throw ConfigError("graph.r must lie in (0, 1]");
    }
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("dynamics.sigma must be >= 0");
    if (!(b >= 0.0) || !std::isfinite(b)) throw ConfigError("dynamics.b must be >= 0");
    if (mu && static_cast<int>(mu->size()) != n)
        throw ConfigError("dynamics.mu needs one entry per community");
    if (!(T > 0.0)) throw ConfigError("dynamics.T must be positive");
    if (output_steps < 1 || steps < output_steps || steps % output_steps != 0)
        throw ConfigError("dynamics.steps must be a positive multiple of dynamics.output_steps");
    if (transforms.empty() || statistics.empty())
        throw ConfigError("at least one transform and one statistic are required");
    if (regime == RegimePolicy::manual) {
        if (!t_trans) throw ConfigError("manual regime policy needs regime.t_trans");
        if (!(*t_trans > 0.0 && *t_trans < T)) throw ConfigError("regime.t_trans must lie in (0, T)");
        if (t_ss && !(*t_ss > *t_trans)) throw ConfigError("regime.t_ss must exceed regime.t_trans");
    }
    if (!(ss_tol > 0.0) || !(ss_window > 0.0))
        throw ConfigError("regime.ss_tol and regime.ss_window must be positive");
    if (ss_horizon && !(*ss_horizon > 0.0)) throw ConfigError("regime.ss_horizon must be positive");
    if (stabilizer < 0.0) throw ConfigError("clustering.stabilizer must be >= 0");
    if (clusters < 0 || prune < 0) throw ConfigError("clustering.k and clustering.prune must be >= 0");
}

ExperimentConfig make_preset(Preset p) {
    ExperimentConfig c;
    c.model = p;
    switch (p) {
        case Preset::standard:
        case Preset::custom:
            break;
        case Preset::collapsed:
            c.mu_range = {2.0 / 3.0, 2.0 / 3.0};
            break;
        case Preset::noisy:
            c.kappa = 10.0;
            c.sigma = 1.0;
            c.mu_range = {1.0 / 3.0, 1.0};
            c.T = 50.0;
            break;
        case Preset::large:
            c.n = 6;
            c.mu_range = {1.0 / 6.0, 1.0};
            c.T = 19.0;
            break;
        case Preset::hierarchical:
            c.n = 9;
            c.n2 = 3;
            c.r = 0.1 / (9 / 3 - 1);
            c.kappa = 300.0;
            c.mu_range = {2.0 / 9.0, 2.0};
            break;
        case Preset::stochastic:
            c.b = 0.1;
            break;
    }
    return c;
}

ExperimentConfig parse_config(const std::string& text) {
    std::vector<std::pair<std::string, Value>> entries;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = trim(strip_comment(line));
        if (s.empty()) continue;
        try {
            if (s.front() == '[') {
                if (s.back() != ']') throw ConfigError("unterminated section header");
                section = trim(s.substr(1, s.size() - 2));
                continue;
            }
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw ConfigError("expected key = value");
            const std::string key = trim(s.substr(0, eq));
            if (key.empty()) throw ConfigError("empty key");
            entries.emplace_back(section.empty() ? key : section + "." + key,
                                 parse_value(s.substr(eq + 1), false));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    ExperimentConfig cfg;
    std::map<std::string, int> seen;
    for (const auto& [key, value] : entries)
        if (++seen[key] > 1) throw ConfigError("duplicate key: " + key);
    for (const auto& [key, value] : entries)
        if (key == "model") apply(cfg, key, value);
    for (const auto& [key, value] : entries)
        if (key != "model") apply(cfg, key, value);
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot read config " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override must be key=value: " + assignment);
    const std::string key = trim(assignment.substr(0, eq));
    apply(cfg, key, parse_value(assignment.substr(eq + 1), true));
}

std::vector<std::string> config_keys() {
    return {"model", "seed", "output", "graph.n", "graph.m", "graph.kappa", "graph.n2", "graph.r",
            "dynamics.sigma", "dynamics.mu", "dynamics.mu_range", "dynamics.T", "dynamics.steps",
            "dynamics.output_steps", "dynamics.b", "signatures.transforms",
            "signatures.statistics", "regime.policy", "regime.t_trans", "regime.t_ss",
            "regime.ss_tol", "regime.ss_window", "regime.ss_horizon", "clustering.method",
            "clustering.vector_mode", "clustering.stabilizer", "clustering.k", "clustering.prune",
            "clustering.linkage"};
}

nlohmann::ordered_json to_json(const ExperimentConfig& c) {
    nlohmann::ordered_json j;
    j["model"] = to_string(c.model);
    j["seed"] = c.seed;
    j["output"] = c.output;
    j["graph"] = {{"n", c.n}, {"m", c.m}, {"kappa", c.kappa}};
    if (c.hierarchical()) {
        j["graph"]["n2"] = c.n2;
        j["graph"]["r"] = c.r;
    }
    const Vector mu = c.mu_vector();
    j["dynamics"] = {{"sigma", c.sigma},
                     {"mu", std::vector<double>(mu.data(), mu.data() + mu.size())},
                     {"T", c.T},
                     {"steps", c.steps},
                     {"output_steps", c.output_steps},
                     {"b", c.b}};
    std::vector<std::string> tf, st;
    for (auto t : c.transforms) tf.push_back(to_string(t));
    for (auto s : c.statistics) st.push_back(to_string(s));
    j["signatures"] = {{"transforms", tf}, {"statistics", st}};
    j["regime"] = {{"policy", to_string(c.regime)}, {"ss_tol", c.ss_tol}, {"ss_window", c.ss_window}};
    if (c.t_trans) j["regime"]["t_trans"] = *c.t_trans;
    if (c.t_ss) j["regime"]["t_ss"] = *c.t_ss;
    if (c.ss_horizon) j["regime"]["ss_horizon"] = *c.ss_horizon;
    j["clustering"] = {{"method", to_string(c.method)},
                       {"vector_mode", to_string(c.vector_mode)},
                       {"stabilizer", c.stabilizer},
                       {"k", c.clusters},
                       {"prune", c.prune},
                       {"linkage", to_string(c.linkage)}};
    return j;
}

}  // namespace ksbm
