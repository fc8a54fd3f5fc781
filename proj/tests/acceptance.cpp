// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria. argv[1] is the path of the ksbm_tests binary.

#include "ksbm/clustering.hpp"
#include "ksbm/config.hpp"
#include "ksbm/dynamics.hpp"
#include "ksbm/graphgen.hpp"
#include "ksbm/pipeline.hpp"
#include "ksbm/signatures.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <random>
#include <string>
#include <vector>

using namespace ksbm;

namespace {

constexpr double kPi = std::numbers::pi;
int failures = 0;

void report(const std::string& id, bool ok, const std::string& what) {
    std::printf("%s criterion %s: %s\n", ok ? "PASS" : "FAIL", id.c_str(), what.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

void info(const std::string& id, bool ok, const std::string& what) {
    std::printf("INFO criterion %s: %s [%s]\n", id.c_str(), what.c_str(), ok ? "holds" : "does not hold");
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

void criterion1() {
    const auto start = std::chrono::steady_clock::now();
    struct Case { double kappa; int n; double expected; };
    const Case cases[] = {{100, 3, 0.281}, {10, 3, 2.79}, {100, 6, 0.558}};
    bool ok = true;
    std::string detail;
    for (const auto& c : cases) {
        const auto curve = integrate_variance_dominated_identical(c.kappa, c.n, kPi * kPi / 3, 1e-4, 10.0);
        const auto t = transition_time(curve, 33);
        const bool hit = t && std::abs(*t - c.expected) <= 0.05 * c.expected;
        ok = ok && hit;
        detail += fmt("kappa=%g n=%d t=%.4f (expect %.3f) ", c.kappa, c.n, t ? *t : -1.0, c.expected);
    }
    const double secs = seconds_since(start);
    report("1", ok && secs < 1.0, detail + fmt("runtime %.3fs", secs));
}

struct RecoveryCheck {
    double tr_agreement = 0.0;
    double worst_c_agreement = 0.0;
};

RecoveryCheck recovery(Preset preset, std::uint64_t seed) {
    auto cfg = make_preset(preset);
    cfg.seed = seed;
    const auto res = run_experiment(cfg);
    RecoveryCheck out;
    if (const auto* tr = res.find("transient", Transform::sin, Statistic::lead)) out.tr_agreement = tr->agreement;
    for (const auto& e : res.estimates)
        if (e.regime == "clusterization") out.worst_c_agreement = std::max(out.worst_c_agreement, e.agreement);
    return out;
}

void criterion2() {
    bool ok = true;
    std::string detail;
    for (Preset p : {Preset::standard, Preset::collapsed, Preset::large}) {
        const auto start = std::chrono::steady_clock::now();
        const auto r0 = recovery(p, 0);
        bool pass = r0.tr_agreement == 1.0 && r0.worst_c_agreement <= 0.6;
        detail += fmt("%s seed0 TR=%.3f maxC=%.3f", to_string(p).c_str(), r0.tr_agreement, r0.worst_c_agreement);
        if (!pass) {
            int exact = 0;
            bool c_ok = r0.worst_c_agreement <= 0.6;
            for (std::uint64_t s = 0; s < 10; ++s) {
                const auto r = s == 0 ? r0 : recovery(p, s);
                exact += r.tr_agreement == 1.0;
                c_ok = c_ok && r.worst_c_agreement <= 0.6;
            }
            pass = exact >= 8 && c_ok;
            detail += fmt(" seeds0-9 exact=%d/10 C<=0.6:%s", exact, c_ok ? "yes" : "no");
        }
        const double secs = seconds_since(start);
        detail += fmt(" (%.1fs); ", secs);
        ok = ok && pass;
    }
    report("2", ok, detail);
}

void criterion3() {
    const auto res = run_experiment(make_preset(Preset::collapsed));
    double worst = 0.0;
    std::string detail;
    int count = 0;
    for (const auto& e : res.estimates)
        if (e.regime == "steady") {
            worst = std::max(worst, e.agreement);
            detail += fmt("%s=%.3f ", e.name().c_str(), e.agreement);
            ++count;
        }
    report("3", count > 0 && worst <= 1.0 / 3 + 0.1, detail + fmt("max %.3f vs bound %.3f", worst, 1.0 / 3 + 0.1));
}

void criterion4() {
    const auto res = run_experiment(make_preset(Preset::standard));
    const auto* tr = res.find("transient", Transform::sin, Statistic::lead);
    const auto* c = res.find("clusterization", Transform::sin, Statistic::lead);
    const bool ok = tr && c && tr->truth_score.g > 1.0 && c->truth_score.g < 1.0;
    report("4", ok, fmt("g(L^TR sin)=%.4g g(L^C sin)=%.4g", tr ? tr->truth_score.g : -1.0,
                         c ? c->truth_score.g : -1.0));
}

Path synchronized_sinusoids(double ti, double tj, double omega, double T, int samples) {
    Path p;
    p.times = Vector::LinSpaced(samples, 0.0, T);
    p.values.resize(samples, 2);
    for (int k = 0; k < samples; ++k) {
        p.values(k, 0) = std::sin(omega * p.times(k) + ti);
        p.values(k, 1) = std::sin(omega * p.times(k) + tj);
    }
    return p;
}

void criterion5() {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> theta(-kPi, kPi), omega(0.5, 3.0);
    double worst_stated = 0.0, worst_exact = 0.0;
    for (int draw = 0; draw < 100; ++draw) {
        const double ti = theta(rng), tj = theta(rng), w = omega(rng);
        std::uniform_real_distribution<double> horizon(10.0 / w, 40.0 / w);
        const double T = horizon(rng);
        // About 400 samples per period keeps the quadrature error near 1e-6.
        const int samples = static_cast<int>(400 * w * T / (2 * kPi)) + 2;
        const double L = lead_matrix(synchronized_sinusoids(ti, tj, w, T, samples))(0, 1);
        const double stated = analytic_ss_lead_sin(ti - tj, w, T);
        const double exact = analytic_ss_lead_sin_exact(ti, tj, w, T);
        worst_stated = std::max(worst_stated, std::abs(L - stated) / std::abs(stated));
        worst_exact = std::max(worst_exact, std::abs(L - exact) / std::abs(exact));
    }
    report("5a", worst_stated <= 1e-4,
           fmt("sinusoid lead vs (sin dtheta/2)(wT + sin wT): worst relative error %.3g over 100 draws", worst_stated));
    info("5a", worst_exact <= 1e-4,
         fmt("sinusoid lead vs (sin dtheta/2)(wT - sin wT): worst relative error %.3g", worst_exact));

    double worst = 0.0;
    for (int draw = 0; draw < 20; ++draw) {
        const double w = omega(rng), T = 1.0 + 4.0 * std::abs(theta(rng));
        Path p;
        p.times = Vector::LinSpaced(50, 0.0, T);
        p.values.resize(50, 3);
        for (int k = 0; k < 50; ++k)
            for (int i = 0; i < 3; ++i) p.values(k, i) = w * p.times(k) + i;
        const Signature S = signature(p, 3);
        for (int M = 1; M <= 3; ++M) {
            const double ref = analytic_ss_signature_theta(w, T, M);
            std::vector<int> I(M);
            for (int k = 0; k < M; ++k) I[k] = (draw + k) % 3;
            worst = std::max(worst, std::abs(S(I) - ref) / ref);
        }
    }
    report("5b", worst <= 1e-6, fmt("steady-state phase signature vs (wT)^M/M!, M<=3: worst relative error %.3g", worst));
}

void criterion6() {
    const auto cfg = make_preset(Preset::standard);
    const auto res = run_experiment(cfg);
    const auto& g = res.graph.communities;
    if (!res.empirical_t_trans) {
        report("6", false, "no empirical transition time");
        return;
    }
    const auto& tr = res.trajectory;
    int k0 = 0;
    while (tr.times(k0) < *res.empirical_t_trans - 1e-12) ++k0;
    const int n = cfg.n, m = cfg.m, N = n * m;
    const auto members = g.members();
    Vector freq(n);
    for (int r = 0; r < n; ++r) {
        double s = 0.0;
        for (int i : members[r]) s += res.omegas(i);
        freq(r) = s / m;
    }
    Matrix P = Matrix::Constant(n, n, assortative_edge_probability(n, m));
    P.diagonal().setOnes();
    const Matrix C = Matrix::Constant(n, n, cfg.kappa / N);
    const int outputs = static_cast<int>(tr.times.size()) - 1 - k0;
    const double T0 = tr.times(k0);
    const auto mf = integrate_mean_field(m, P, C, freq, res.stats.means.row(k0).transpose(),
                                         TimeGrid::uniform(cfg.T - T0, 10 * outputs, outputs, T0));
    double err = 0.0;
    for (int k = 0; k < mf.samples(); ++k)
        err = std::max(err, (mf.phases.row(k) - res.stats.means.row(k0 + k)).cwiseAbs().maxCoeff());
    report("6", err < 0.1, fmt("start %.4fs, sup error %.4f rad through %.0fs", T0, err, cfg.T));
}

void criterion7(const char* tests) {
    const char* filters[] = {
        "lead matrix",
        "shuffle identity at level two",
        "Chen identity for concatenated paths",
        "reparametrization invariance",
        "RK4 converges at fourth order on the standard preset",
        "metrics against brute-force enumeration",
        "agreement",
    };
    bool ok = true;
    std::string detail;
    for (const char* f : filters) {
        const std::string cmd = std::string("\"") + tests + "\" --test-case=\"" + f + "\" --no-intro --minimal > /dev/null 2>&1";
        const bool pass = std::system(cmd.c_str()) == 0;
        ok = ok && pass;
        detail += fmt("[%s] %s; ", f, pass ? "ok" : "failed");
    }
    report("7", ok, detail);
}

void criterion8() {
    const auto start = std::chrono::steady_clock::now();
    auto mean_agreement = [](double b) {
        double sum = 0.0;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            auto cfg = make_preset(Preset::stochastic);
            cfg.b = b;
            cfg.seed = seed;
            cfg.transforms = {Transform::sin};
            cfg.statistics = {Statistic::lead};
            const auto res = run_experiment(cfg);
            const auto* tr = res.find("transient", Transform::sin, Statistic::lead);
            sum += tr ? tr->agreement : 0.0;
        }
        return sum / 20;
    };
    const double low = mean_agreement(0.1), high = mean_agreement(5.0);
    const double secs = seconds_since(start);
    report("8", low - high >= 0.2 && secs < 600,
           fmt("mean TR agreement b=0.1: %.3f, b=5: %.3f, gap %.3f (%.1fs)", low, high, low - high, secs));
}

void criterion9() {
    auto cfg = make_preset(Preset::hierarchical);
    cfg.transforms = {Transform::sin};
    cfg.prune = cfg.n2;
    const auto res = run_experiment(cfg);
    double worst = 1.0;
    std::string detail;
    int count = 0;
    for (const auto& e : res.estimates)
        if (e.regime == "steady") {
            const double a = e.coarse_agreement.value_or(0.0);
            worst = std::min(worst, a);
            detail += fmt("%s k=%d coarse=%.3f ", e.name().c_str(), e.estimate.k(), a);
            ++count;
        }
    report("9", count > 0 && worst == 1.0, detail);
}

}  // namespace

int main(int argc, char** argv) {
    const char* tests = argc > 1 ? argv[1] : "ksbm_tests";
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7(tests);
    criterion8();
    criterion9();
    std::printf("%d criterion line(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
