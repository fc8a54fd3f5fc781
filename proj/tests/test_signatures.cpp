#include "ksbm/kernels.hpp"
#include "ksbm/pipeline.hpp"
#include "ksbm/signatures.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace ksbm;

namespace {

constexpr double kPi = std::numbers::pi;

Path random_path(int samples, int dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    Path p;
    p.times = Vector::LinSpaced(samples, 0.0, 1.0);
    p.values.resize(samples, dim);
    for (int i = 0; i < dim; ++i) p.values(0, i) = z(rng);
    for (int k = 1; k < samples; ++k)
        for (int i = 0; i < dim; ++i) p.values(k, i) = p.values(k - 1, i) + 0.3 * z(rng);
    return p;
}

// Inserts `extra` evenly spaced points inside every segment.
Path refine(const Path& p, int extra) {
    const int K = p.samples();
    Path out;
    out.times.resize((K - 1) * (extra + 1) + 1);
    out.values.resize(out.times.size(), p.dim());
    int o = 0;
    for (int k = 0; k + 1 < K; ++k)
        for (int s = 0; s <= extra; ++s) {
            const double w = double(s) / (extra + 1);
            out.times(o) = p.times(k) + w * (p.times(k + 1) - p.times(k));
            out.values.row(o++) = p.values.row(k) + w * (p.values.row(k + 1) - p.values.row(k));
        }
    out.times(o) = p.times(K - 1);
    out.values.row(o) = p.values.row(K - 1);
    return out;
}

Path sinusoids(const std::vector<double>& offsets, double omega, double T, int samples) {
    Path p;
    p.times = Vector::LinSpaced(samples, 0.0, T);
    p.values.resize(samples, static_cast<Index>(offsets.size()));
    for (int k = 0; k < samples; ++k)
        for (std::size_t i = 0; i < offsets.size(); ++i)
            p.values(k, i) = std::sin(omega * p.times(k) + offsets[i]);
    return p;
}

double max_abs_diff(const Signature& a, const Signature& b) {
    double d = 0.0;
    for (int l = 0; l <= a.level; ++l)
        for (std::size_t i = 0; i < a.levels[l].size(); ++i)
            d = std::max(d, std::abs(a.levels[l][i] - b.levels[l][i]));
    return d;
}

}  // namespace

TEST_SUITE("signatures") {

TEST_CASE("unwrap and wrap") {
    SUBCASE("constant phases are unchanged") {
        Path p{Vector::LinSpaced(5, 0, 1), Matrix::Constant(5, 2, 1.5)};
        CHECK(unwrap(p).values == p.values);
    }
    SUBCASE("a wrapped saw becomes a ramp") {
        Path p;
        p.times = Vector::LinSpaced(9, 0, 1);
        p.values.resize(9, 1);
        for (int k = 0; k < 9; ++k) p.values(k, 0) = std::fmod(k * kPi / 4, 2 * kPi);
        const Path u = unwrap(p);
        for (int k = 0; k < 9; ++k) CHECK(u.values(k, 0) == doctest::Approx(k * kPi / 4));
    }
    SUBCASE("unwrap of wrap is the identity on smooth input") {
        Path p = random_path(200, 4, 3);
        p.values *= 1.5;
        for (Index k = 1; k < p.values.rows(); ++k)
            REQUIRE((p.values.row(k) - p.values.row(k - 1)).cwiseAbs().maxCoeff() < kPi);
        const Path r = unwrap(wrap(p));
        const Matrix shift = p.values - r.values;
        // Equal up to one whole turn per coordinate fixed by the first sample.
        for (Index i = 0; i < shift.cols(); ++i)
            CHECK((shift.col(i).array() - shift(0, i)).abs().maxCoeff() < 1e-9);
        CHECK((wrap(p).values.array() >= -kPi).all());
        CHECK((wrap(p).values.array() < kPi).all());
    }
}

TEST_CASE("transforms") {
    Path p{Vector::LinSpaced(4, 0, 1), Matrix::Constant(4, 3, kPi / 2)};
    CHECK(transform(p, Transform::identity).values == p.values);
    CHECK((transform(p, Transform::sin).values.array() - 1.0).abs().maxCoeff() < 1e-15);
    const Path q = random_path(20, 3, 1);
    CHECK((exp_i(q).values.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-14);
}

TEST_CASE("signature of a linear path") {
    Vector v(3);
    v << 0.5, -1.0, 2.0;
    Path p;
    p.times = Vector::LinSpaced(2, 0, 1);
    p.values.resize(2, 3);
    p.values.row(0).setZero();
    p.values.row(1) = v.transpose();
    const Signature S = signature(p, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) CHECK(S({i, j, k}) == doctest::Approx(v(i) * v(j) * v(k) / 6));
    const Path fine = refine(p, 17);
    CHECK(max_abs_diff(signature(fine, 3), S) < 1e-12);
}

TEST_CASE("level one is the increment") {
    const Path p = random_path(30, 4, 2);
    const Signature S = signature(p, 2);
    for (int i = 0; i < 4; ++i)
        CHECK(S.at(i) == doctest::Approx(p.values(29, i) - p.values(0, i)).epsilon(1e-12));
}

TEST_CASE("level two matches trapezoidal quadrature of the iterated integral") {
    const Path p = random_path(12, 5, 8);
    const Path fine = refine(p, 4000);
    const Signature S = signature(p, 2);
    const Matrix& X = fine.values;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            double q = 0.0;
            for (Index k = 0; k + 1 < X.rows(); ++k) {
                const double xi = 0.5 * (X(k, i) + X(k + 1, i)) - X(0, i);
                q += xi * (X(k + 1, j) - X(k, j));
            }
            CHECK(std::abs(q - S.at(i, j)) < 1e-8);
        }
}

TEST_CASE("base_at_zero does not change entries") {
    const Path p = random_path(25, 3, 4);
    CHECK(max_abs_diff(signature(p, 3, true), signature(p, 3, false)) < 1e-12);
}

TEST_CASE("shuffle identity at level two") {
    for (std::uint64_t s = 0; s < 5; ++s) {
        const Path p = random_path(100, 6, s);
        const Signature S = signature(p, 2);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j)
                CHECK(std::abs(S.at(i, j) + S.at(j, i) - S.at(i) * S.at(j)) <= 1e-10);
    }
}

TEST_CASE("Chen identity for concatenated paths") {
    const Path p = random_path(61, 3, 5);
    Path a{p.times.head(31), p.values.topRows(31)};
    Path b{p.times.tail(31), p.values.bottomRows(31)};
    for (int level = 1; level <= 4; ++level)
        CHECK(max_abs_diff(chen_product(signature(a, level), signature(b, level)), signature(p, level)) <=
              1e-10);
}

TEST_CASE("reparametrization invariance") {
    const Path p = random_path(40, 3, 6);
    Path q = p;
    for (Index k = 0; k < q.times.size(); ++k) q.times(k) = std::pow(p.times(k), 3) + 2.0 * p.times(k);
    CHECK(max_abs_diff(signature(p, 3), signature(q, 3)) < 1e-10);
    CHECK(max_abs_diff(signature(p, 3), signature(refine(q, 5), 3)) < 1e-10);
    CHECK((lead_matrix(p) - lead_matrix(refine(q, 3))).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("signature capacity and level limits") {
    const Path p = random_path(5, 300, 1);
    CHECK_THROWS_AS(signature(p, 4), CapacityError);
    CHECK_THROWS_AS(signature(random_path(5, 2, 1), 5), CapacityError);
    CHECK_THROWS_AS(signature(random_path(5, 2, 1), 0), ParameterError);
    CHECK_NOTHROW(signature(p, 2));
}

TEST_CASE("lead matrix") {
    SUBCASE("is exactly antisymmetric and equals the level-two antisymmetrization") {
        const Path p = random_path(300, 7, 9);
        for (auto exec : {Execution::serial, Execution::parallel}) {
            const Matrix L = lead_matrix(p, exec);
            CHECK((L + L.transpose()).cwiseAbs().maxCoeff() == 0.0);
            const Signature S = signature(p, 2);
            for (int i = 0; i < 7; ++i)
                for (int j = 0; j < 7; ++j)
                    CHECK(std::abs(L(i, j) - 0.5 * (S.at(i, j) - S.at(j, i))) < 1e-10);
        }
    }
    SUBCASE("unit circle encloses pi") {
        Path p;
        p.times = Vector::LinSpaced(20001, 0, 2 * kPi);
        p.values.resize(20001, 2);
        for (int k = 0; k < 20001; ++k) {
            p.values(k, 0) = std::cos(p.times(k)) - 1.0;
            p.values(k, 1) = std::sin(p.times(k));
        }
        CHECK(lead_matrix(p)(0, 1) == doctest::Approx(kPi).epsilon(1e-6));
    }
    SUBCASE("one-dimensional path") {
        const Matrix L = lead_matrix(random_path(10, 1, 0));
        CHECK(L.rows() == 1);
        CHECK(L(0, 0) == 0.0);
    }
    SUBCASE("complex lead is antisymmetric") {
        const ComplexMatrix L = lead_matrix(exp_i(random_path(50, 4, 3)));
        CHECK((L + L.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("covariance matrix") {
    SUBCASE("constant path") {
        Path p{Vector::LinSpaced(6, 0, 1), Matrix::Constant(6, 3, 2.0)};
        CHECK(covariance_matrix(p).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("bilinearity") {
        Path p = random_path(50, 2, 1);
        p.values.col(1) = 2.0 * p.values.col(0);
        const Matrix C = covariance_matrix(p);
        CHECK(C(1, 1) == doctest::Approx(4.0 * C(0, 0)).epsilon(1e-12));
    }
    SUBCASE("two-pass reference with population normalization") {
        const Path p = random_path(80, 5, 2);
        const Index K = 80;
        const Vector mean = p.values.colwise().mean();
        for (auto exec : {Execution::serial, Execution::parallel}) {
            const Matrix C = covariance_matrix(p, exec);
            for (int i = 0; i < 5; ++i)
                for (int j = 0; j < 5; ++j) {
                    double ref = 0.0;
                    for (Index k = 0; k < K; ++k)
                        ref += (p.values(k, i) - mean(i)) * (p.values(k, j) - mean(j));
                    ref /= K;
                    CHECK(std::abs(C(i, j) - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
                }
        }
    }
    SUBCASE("needs two samples") {
        Path p{Vector::Zero(1), Matrix::Zero(1, 2)};
        CHECK_THROWS_AS(covariance_matrix(p), ParameterError);
    }
}

TEST_CASE("restriction") {
    const Path p = random_path(21, 3, 7);
    const Path r = restrict(p, 0.125, 0.61);
    CHECK(r.times(0) == 0.125);
    CHECK(r.times(r.samples() - 1) == 0.61);
    // 0.125 lies halfway between samples 2 and 3.
    CHECK((r.values.row(0) - 0.5 * (p.values.row(2) + p.values.row(3))).cwiseAbs().maxCoeff() < 1e-12);
    const Path a = restrict(p, 0.0, 0.33), b = restrict(p, 0.33, 1.0);
    CHECK(max_abs_diff(chen_product(signature(a, 3), signature(b, 3)), signature(p, 3)) < 1e-10);
    CHECK_THROWS_AS(restrict(p, 0.7, 0.2), ParameterError);
}

TEST_CASE("regime split") {
    const Path p = random_path(101, 4, 3);
    SUBCASE("windows and matrices") {
        const auto rm = regime_split(p, {0.3, 0.6}, 0.2, Statistic::lead);
        CHECK(rm.clusterization.begin == 0.0);
        CHECK(rm.clusterization.end == 0.3);
        CHECK(rm.transient.end == 0.6);
        REQUIRE(rm.steady);
        CHECK(rm.steady->end == doctest::Approx(0.8));
        CHECK((rm.TR - lead_matrix(restrict(p, 0.3, 0.6))).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("steady window is clipped to the data") {
        const auto rm = regime_split(p, {0.3, 0.6}, 5.0, Statistic::covariance);
        CHECK(rm.steady->end == 1.0);
    }
    SUBCASE("without t_ss the transient runs to the end") {
        const auto rm = regime_split(p, {0.3, std::nullopt}, 1.0, Statistic::lead);
        CHECK(rm.transient.end == 1.0);
        CHECK_FALSE(rm.SS);
    }
    SUBCASE("degenerate windows put the full path in the steady slot") {
        const auto rm = regime_split(p, {1e-9, 2e-9}, 10.0, Statistic::lead);
        CHECK((*rm.SS - lead_matrix(p)).cwiseAbs().maxCoeff() < 1e-6);
    }
    SUBCASE("t_trans must precede t_ss") {
        CHECK_THROWS_AS(regime_split(p, {0.6, 0.6}, 1.0, Statistic::lead), ParameterError);
        CHECK_THROWS_AS(regime_split(p, {0.7, 0.2}, 1.0, Statistic::lead), ParameterError);
    }
}

TEST_CASE("steady-state phase signature") {
    CHECK(analytic_ss_signature_theta(1, 2, 1) == 2.0);
    CHECK(analytic_ss_signature_theta(2, 1, 3) == doctest::Approx(8.0 / 6));
    // Synchronized phases theta_i = omega t + c_i.
    const double omega = 1.7, T = 3.0;
    Path p = sinusoids({0, 0, 0}, omega, T, 50);
    for (int k = 0; k < 50; ++k)
        for (int i = 0; i < 3; ++i) p.values(k, i) = omega * p.times(k) + 0.4 * i;
    const Signature S = signature(p, 3);
    for (int M = 1; M <= 3; ++M) {
        const double ref = analytic_ss_signature_theta(omega, T, M);
        std::vector<int> I(M, 0);
        I.back() = M % 3;
        CHECK(std::abs(S(I) - ref) <= 1e-6 * ref);
    }
    CHECK(lead_matrix(p).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("steady-state complex phase signature") {
    CHECK(std::abs(analytic_ss_signature_exp({0.3, 1.1}, 1.0, 2 * kPi)) < 1e-12);
    CHECK(std::abs(analytic_ss_signature_exp({0.0}, 1.0, kPi) - Complex(-2.0, 0.0)) < 1e-12);
    CHECK(std::abs(analytic_ss_signature_exp({0.2, 0.5, -1.0}, 1.3, 2.0) -
                   analytic_ss_signature_exp({-1.0, 0.2, 0.5}, 1.3, 2.0)) < 1e-15);
    const std::vector<double> offsets{0.0, 0.8, -0.5};
    const double omega = 1.3, T = 2.0;
    Path phase;
    phase.times = Vector::LinSpaced(20001, 0, T);
    phase.values.resize(20001, 3);
    for (int k = 0; k < 20001; ++k)
        for (int i = 0; i < 3; ++i) phase.values(k, i) = omega * phase.times(k) + offsets[i];
    const ComplexSignature S = signature(exp_i(phase), 2);
    // With base point subtracted the entries depend only on increments, so
    // the offsets enter through lambda_I.
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const Complex ref = analytic_ss_signature_exp({offsets[i], offsets[j]}, omega, T);
            CHECK(std::abs(S({i, j}) - ref) < 1e-6);
        }
}

TEST_CASE("steady-state sinusoid lead") {
    CHECK(analytic_ss_lead_sin(0.0, 1.3, 7.0) == 0.0);
    CHECK(analytic_ss_lead_sin(kPi / 2, 1.0, 2 * kPi) == doctest::Approx(kPi));
    SUBCASE("closed form of S_(i,j) against numeric signatures") {
        const double ti = 0.3, tj = -0.4, omega = 1.3, T = 7.1;
        const Path p = sinusoids({ti, tj}, omega, T, 40001);
        const Signature S = signature(p, 2);
        CHECK(S.at(0, 1) == doctest::Approx(analytic_ss_signature_sin(ti, tj, omega, T)).epsilon(1e-6));
        CHECK(S.at(1, 0) == doctest::Approx(analytic_ss_signature_sin(tj, ti, omega, T)).epsilon(1e-6));
        CHECK(lead_matrix(p)(0, 1) ==
              doctest::Approx(analytic_ss_lead_sin_exact(ti, tj, omega, T)).epsilon(1e-6));
        CHECK(analytic_ss_lead_sin_exact(ti, tj, omega, T) ==
              doctest::Approx(0.5 * std::sin(ti - tj) * (omega * T - std::sin(omega * T))));
    }
}

TEST_CASE("collapsed steady-state sin lead is nearly zero") {
    const auto res = run_experiment(make_preset(Preset::collapsed));
    const auto* ss = res.find("steady", Transform::sin, Statistic::lead);
    REQUIRE(ss);
    const auto std_res = run_experiment(make_preset(Preset::standard));
    const auto* ref = std_res.find("steady", Transform::sin, Statistic::lead);
    REQUIRE(ref);
    // Relative to the standard run's steady-state lead.
    CHECK(ss->matrix.cwiseAbs().maxCoeff() <= 0.05 * ref->matrix.cwiseAbs().maxCoeff());
}

}
