#include "ksbm/config.hpp"
#include "ksbm/figures.hpp"
#include "ksbm/io.hpp"
#include "ksbm/pipeline.hpp"
#include "ksbm/spikes.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace ksbm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("ksbm-test-" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& file) {
    std::ifstream s(file, std::ios::binary);
    std::stringstream ss;
    ss << s.rdbuf();
    return ss.str();
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("number formatting round-trips") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> z;
    for (int k = 0; k < 1000; ++k) {
        const double x = z(rng) * std::pow(10.0, k % 40 - 20);
        CHECK(std::stod(io::format_number(x)) == x);
    }
    CHECK(io::format_number(0.5) == "0.5");
}

TEST_CASE("matrix, trajectory, labels and graph files") {
    const fs::path dir = scratch("io");
    Matrix M(3, 3);
    M << 0.1, -2, 1e-17, 3, 4, 5, 6, 7, 8.25;
    io::write_matrix(dir / "m.csv", M);
    CHECK(io::read_matrix(dir / "m.csv") == M);

    Trajectory t;
    t.times = Vector::LinSpaced(4, 0, 0.3);
    t.phases = M.topRows(3).leftCols(2).replicate(1, 1);
    t.phases.conservativeResize(4, 2);
    t.phases.row(3) << 9, 10;
    io::write_trajectory(dir / "traj.csv", t);
    const Trajectory r = io::read_trajectory(dir / "traj.csv");
    CHECK(r.times == t.times);
    CHECK(r.phases == t.phases);

    const std::vector<int> labels{2, 0, 1, 1};
    io::write_labels(dir / "labels.csv", labels);
    CHECK(io::read_labels(dir / "labels.csv") == labels);

    const auto g = generate_hierarchical({9, 3, 0.05, 5}, 300.0, 4);
    io::write_graph(dir / "graph.csv", g);
    const auto h = io::read_graph(dir / "graph.csv");
    CHECK(h.coupling == g.coupling);
    CHECK(h.communities.labels == g.communities.labels);
    REQUIRE(h.coarse);
    CHECK(h.coarse->labels == g.coarse->labels);
    CHECK(h.kind == GraphKind::hierarchical);
    CHECK(io::sidecar(dir / "graph.csv") == dir / "graph.json");
}

TEST_CASE("malformed input is a data error") {
    const fs::path dir = scratch("io-bad");
    std::ofstream(dir / "ragged.csv") << "a,b\n1,2\n3\n";
    CHECK_THROWS_AS(io::read_table(dir / "ragged.csv"), DataError);
    std::ofstream(dir / "text.csv") << "a\nfoo\n";
    CHECK_THROWS_AS(io::read_table(dir / "text.csv"), DataError);
    CHECK_THROWS_AS(io::read_matrix(dir / "missing.csv"), DataError);
}

}

TEST_SUITE("config") {

TEST_CASE("presets") {
    const auto s = make_preset(Preset::standard);
    CHECK(s.n == 3);
    CHECK(s.m == 33);
    CHECK(s.kappa == 100.0);
    CHECK(s.sigma == 0.1);
    CHECK(s.T == 10.0);
    CHECK(s.output_steps == 500);
    const Vector mu = s.mu_vector();
    CHECK(mu(0) == doctest::Approx(2.0 / 3));
    CHECK(mu(1) == doctest::Approx(4.0 / 3));
    CHECK(mu(2) == doctest::Approx(2.0));
    CHECK((make_preset(Preset::collapsed).mu_vector().array() == 2.0 / 3).all());
    const auto noisy = make_preset(Preset::noisy);
    CHECK(noisy.kappa == 10.0);
    CHECK(noisy.sigma == 1.0);
    CHECK(noisy.T == 50.0);
    CHECK(noisy.mu_vector()(2) == doctest::Approx(1.0));
    const auto large = make_preset(Preset::large);
    CHECK(large.n == 6);
    CHECK(large.T == 19.0);
    CHECK(large.mu_vector()(0) == doctest::Approx(1.0 / 6));
    const auto hier = make_preset(Preset::hierarchical);
    CHECK(hier.n == 9);
    CHECK(hier.n2 == 3);
    CHECK(make_preset(Preset::stochastic).b == 0.1);
}

TEST_CASE("parsing") {
    const auto c = parse_config(R"(
# comment
model = "large"
seed = 7
[graph]
kappa = 50
[dynamics]
mu = [0.5, 1, 1.5, 2, 2.5, 3]
[signatures]
transforms = ["sin"]
[regime]
policy = "manual"
t_trans = 0.5
t_ss = 2
[clustering]
method = "hierarchical"
linkage = "complete"
)");
    CHECK(c.model == Preset::large);
    CHECK(c.n == 6);
    CHECK(c.seed == 7);
    CHECK(c.kappa == 50.0);
    CHECK(c.mu_vector()(5) == 3.0);
    CHECK(c.transforms == std::vector<Transform>{Transform::sin});
    CHECK(c.regime == RegimePolicy::manual);
    CHECK(*c.t_ss == 2.0);
    CHECK(c.method == ClusterMethod::hierarchical);
    CHECK(c.linkage == Linkage::complete);

    SUBCASE("model applies before other keys regardless of order") {
        const auto d = parse_config("graph.kappa = 5\nmodel = \"noisy\"\n");
        CHECK(d.kappa == 5.0);
        CHECK(d.sigma == 1.0);
    }
    SUBCASE("overrides") {
        ExperimentConfig e;
        apply_override(e, "clustering.method=kmeans");
        apply_override(e, "graph.m=10");
        CHECK(e.method == ClusterMethod::kmeans);
        CHECK(e.m == 10);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(parse_config("graph.nope = 1"), ConfigError);
        CHECK_THROWS_AS(parse_config("graph.n = \"three\""), ConfigError);
        CHECK_THROWS_AS(parse_config("graph.n = 1"), ConfigError);
        CHECK_THROWS_AS(parse_config("dynamics.mu = [1, 2]"), ConfigError);
        CHECK_THROWS_AS(parse_config("model = \"huge\""), ConfigError);
        CHECK_THROWS_AS(parse_config("regime.policy = \"manual\""), ConfigError);
        CHECK_THROWS_AS(parse_config("just text"), ConfigError);
    }
    SUBCASE("serialization lists every key") {
        const auto j = to_json(make_preset(Preset::standard));
        CHECK(j["graph"]["m"] == 33);
        CHECK(config_keys().size() >= 20);
    }
}

}

TEST_SUITE("spikes") {

TEST_CASE("filter kernel") {
    SpikeIngestConfig cfg;
    cfg.trials = {{0, 0.0, 0.1}};
    cfg.units = std::vector<int>{4, 9};
    const auto s = ingest_spikes({{4, 0, 0.0}}, cfg);
    const Matrix& Y = s.path.values;
    REQUIRE(Y.rows() == 50);
    const double q = std::exp(-0.002 / 0.04);
    CHECK(Y(0, 0) == doctest::Approx(1.0 - q));
    CHECK(Y.col(0).maxCoeff() == Y(0, 0));
    for (int k = 1; k < 50; ++k) CHECK(Y(k, 0) / Y(k - 1, 0) == doctest::Approx(std::exp(-0.05)));
    CHECK(Y.col(1).cwiseAbs().maxCoeff() == 0.0);
    CHECK(s.path.times(1) == doctest::Approx(0.002));
}

TEST_CASE("filter restarts each trial and concatenates by id") {
    SpikeIngestConfig cfg;
    cfg.trials = {{7, 10.0, 10.01}, {3, 0.0, 0.02}};
    const auto s = ingest_spikes({{1, 3, 0.0}, {1, 7, 10.004}}, cfg);
    const Matrix& Y = s.path.values;
    REQUIRE(Y.rows() == 15);
    CHECK(Y(0, 0) > 0.0);
    CHECK(Y(10, 0) == 0.0);
    CHECK(Y(11, 0) == 0.0);
    CHECK(Y(12, 0) == doctest::Approx(Y(0, 0)));
}

TEST_CASE("trial order leaves the lead matrix unchanged up to boundary terms") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Trial> trials;
    std::vector<Spike> spikes;
    for (int t = 0; t < 5; ++t) {
        trials.push_back({t, 2.0 * t, 2.0 * t + 1.5});
        // Quiet for the last 0.5 s, about twelve time constants.
        for (int k = 0; k < 60; ++k) spikes.push_back({int(rng() % 4), t, 2.0 * t + u(rng)});
    }
    SpikeIngestConfig a;
    a.trials = trials;
    SpikeIngestConfig b = a;
    const std::vector<int> perm{3, 0, 4, 1, 2};
    std::vector<Spike> permuted = spikes;
    for (auto& sp : permuted) {
        sp.time += 2.0 * (perm[sp.trial] - sp.trial);
        sp.trial = perm[sp.trial];
    }
    const Matrix La = lead_matrix(ingest_spikes(spikes, a).path);
    const Matrix Lb = lead_matrix(ingest_spikes(permuted, b).path);
    const double tail = std::exp(-0.5 / 0.04);
    CHECK((La - Lb).cwiseAbs().maxCoeff() <= 10.0 * tail * std::max(1.0, La.cwiseAbs().maxCoeff()));
}

TEST_CASE("bad references") {
    SpikeIngestConfig cfg;
    cfg.trials = {{0, 0.0, 1.0}};
    CHECK_THROWS_AS(ingest_spikes({{0, 1, 0.5}}, cfg), DataError);
    CHECK_THROWS_AS(ingest_spikes({{0, 0, 1.5}}, cfg), DataError);
    cfg.units = std::vector<int>{1};
    CHECK_THROWS_AS(ingest_spikes({{0, 0, 0.5}}, cfg), DataError);
    cfg.trials = {{0, 1.0, 1.0}};
    CHECK_THROWS_AS(ingest_spikes({}, cfg), ParameterError);
}

TEST_CASE("csv readers") {
    const fs::path dir = scratch("spikes");
    std::ofstream(dir / "spikes.csv") << "unit_id,trial_id,spike_time_s\n2,1,0.25\n";
    std::ofstream(dir / "trials.csv") << "trial_id,start_s,end_s\n1,0,0.5\n";
    const auto sp = read_spikes(dir / "spikes.csv");
    REQUIRE(sp.size() == 1);
    CHECK(sp[0].unit == 2);
    CHECK(sp[0].time == 0.25);
    CHECK(read_trials(dir / "trials.csv")[0].end == 0.5);
    std::ofstream(dir / "bad.csv") << "unit,trial\n1,2\n";
    CHECK_THROWS_AS(read_spikes(dir / "bad.csv"), DataError);
}

}

TEST_SUITE("pipeline") {

TEST_CASE("standard run") {
    const fs::path dir = scratch("pipeline-a");
    const auto res = run_experiment(make_preset(Preset::standard), dir);
    REQUIRE(res.t_trans);
    CHECK(*res.t_trans == doctest::Approx(0.281).epsilon(0.05));
    const auto* tr = res.find("transient", Transform::sin, Statistic::lead);
    REQUIRE(tr);
    CHECK(tr->agreement == 1.0);
    const io::Json report = io::read_json(dir / "report.json");
    CHECK(report["t_trans"].get<double>() == *res.t_trans);
    CHECK(fs::exists(dir / "matrices" / (tr->name() + ".csv")));
    CHECK(fs::exists(dir / "labels" / (tr->name() + ".csv")));

    SUBCASE("same config gives byte-identical CSV outputs") {
        const fs::path other = scratch("pipeline-b");
        run_experiment(make_preset(Preset::standard), other);
        for (const auto& e : fs::recursive_directory_iterator(dir))
            if (e.path().extension() == ".csv")
                CHECK(slurp(e.path()) == slurp(other / fs::relative(e.path(), dir)));
    }
    SUBCASE("figures") {
        const fs::path fig = scratch("figures");
        const auto sum = emit_figures(dir, fig);
        CHECK(sum.warnings.empty());
        const GrayImage img = read_png(fig / "heatmaps" / (tr->name() + ".png"));
        CHECK(img.width == 99);
        for (int i = 0; i < 99; ++i)
            for (int j = 0; j < 99; ++j) CHECK(img.at(i, j) + img.at(j, i) == 254);
        const io::Table curve = io::read_table(fig / "variance_curve.csv");
        Vector t(curve.rows.size()), v(curve.rows.size());
        for (std::size_t k = 0; k < curve.rows.size(); ++k) {
            t(k) = curve.rows[k][0];
            v(k) = curve.rows[k][1];
            CHECK(curve.rows[k][2] == doctest::Approx(1.0 / (33.0 * 33.0)));
        }
        CHECK(*transition_time(t, v, 33) == doctest::Approx(*res.t_trans).epsilon(1e-12));
        CHECK(fs::exists(fig / "scores.csv"));
        CHECK(fs::exists(fig / "phase_traces.csv"));
    }
}

TEST_CASE("heatmap pixels") {
    Matrix A(2, 2);
    A << 0, 2, -2, 0;
    const GrayImage img = heatmap(A);
    CHECK(img.at(0, 1) == 254);
    CHECK(img.at(1, 0) == 0);
    CHECK(img.at(0, 0) == 127);
    CHECK(heatmap(Matrix::Zero(3, 3)).pixels == std::vector<std::uint8_t>(9, 127));
}

TEST_CASE("empty bundle warns") {
    const fs::path dir = scratch("empty-bundle");
    const auto sum = emit_figures(dir, scratch("empty-out"));
    CHECK(sum.files.empty());
    CHECK_FALSE(sum.warnings.empty());
    CHECK_FALSE(emit_figures(dir / "absent", dir).warnings.empty());
}

TEST_CASE("uncoupled run falls back to full-window matrices") {
    auto c = make_preset(Preset::standard);
    c.model = Preset::custom;
    c.kappa = 0.0;
    c.T = 2.0;
    c.steps = 1000;
    c.output_steps = 200;
    const auto res = run_experiment(c);
    CHECK_FALSE(res.t_trans);
    CHECK_FALSE(res.warnings.empty());
    REQUIRE_FALSE(res.estimates.empty());
    for (const auto& e : res.estimates) CHECK(e.regime == "full");
}

TEST_CASE("batch runs need distinct outputs") {
    auto a = make_preset(Preset::standard);
    a.T = 1.0;
    a.steps = 500;
    a.output_steps = 100;
    auto b = a;
    b.seed = 1;
    CHECK_THROWS(run_batch({a, b}, true));
    const auto out = run_batch({a, b}, false);
    CHECK(out.size() == 2);
    CHECK(out[0].omegas != out[1].omegas);
}

TEST_CASE("hierarchical run reports coarse agreement") {
    const auto res = run_experiment(make_preset(Preset::hierarchical));
    REQUIRE_FALSE(res.estimates.empty());
    for (const auto& e : res.estimates) CHECK(e.coarse_agreement.has_value());
}

}
