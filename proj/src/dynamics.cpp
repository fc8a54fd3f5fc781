#include "ksbm/dynamics.hpp"

#include "ksbm/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ksbm {

void KsbmParams::validate() const {
    if (mu.size() != graph.communities.count)
        throw ParameterError("mu must have one entry per community");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ParameterError("sigma must be >= 0");
    if (!(brownian_b >= 0.0) || !std::isfinite(brownian_b))
        throw ParameterError("brownian_b must be >= 0");
    if (theta0) {
        if (theta0->size() != graph.size()) throw ParameterError("theta0 has wrong length");
        if (!theta0->allFinite()) throw ParameterError("theta0 must be finite");
    }
}

Vector sample_frequencies(const Vector& mu, double sigma, int n, int m, std::uint64_t seed) {
    if (mu.size() != n) throw ParameterError("mu must have n entries");
    if (!(sigma >= 0.0)) throw ParameterError("sigma must be >= 0");
    Rng rng = make_rng(seed, Stream::frequencies);
    std::normal_distribution<double> z(0.0, 1.0);
    Vector omega(static_cast<Index>(n) * m);
    for (Index i = 0; i < omega.size(); ++i) omega(i) = mu(i / m) + sigma * z(rng);
    return omega;
}

Vector sample_initial_phases(int N, std::uint64_t seed) {
    Rng rng = make_rng(seed, Stream::initial_phases);
    std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
    Vector theta(N);
    for (Index i = 0; i < N; ++i) theta(i) = u(rng);
    return theta;
}

KsbmSystem realize(const KsbmParams& params) {
    params.validate();
    const auto& g = params.graph;
    if (!g.communities.is_balanced()) throw ParameterError("communities must be balanced");
    const int n = g.communities.count;
    const int m = g.size() / n;
    KsbmSystem sys;
    sys.coupling = g.sparse_coupling();
    sys.dense_coupling = g.coupling;
    sys.omega = sample_frequencies(params.mu, params.sigma, n, m, params.seed);
    sys.theta0 = params.theta0 ? *params.theta0 : sample_initial_phases(g.size(), params.seed);
    sys.b = params.brownian_b;
    sys.seed = params.seed;
    sys.communities = g.communities;
    return sys;
}

TimeGrid TimeGrid::uniform(double T, int steps, int output_steps, double t0) {
    if (output_steps < 1 || steps < output_steps || steps % output_steps != 0)
        throw ParameterError("internal steps must be a positive multiple of output steps");
    TimeGrid g{T / steps, steps, steps / output_steps, t0};
    g.validate();
    return g;
}

TimeGrid TimeGrid::from_dt(double dt, double T, double t0) {
    if (!(dt > 0.0) || !(T > dt)) throw ParameterError("need dt > 0 and T > dt");
    const int steps = static_cast<int>(std::llround(T / dt));
    TimeGrid g{dt, steps, 1, t0};
    g.validate();
    return g;
}

void TimeGrid::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("dt must be positive");
    if (steps < 1) throw ParameterError("need at least one step");
    if (stride < 1 || steps % stride != 0)
        throw ParameterError("stride must divide the step count");
}

namespace {

template <class F>
Trajectory rk4(const F& f, const Vector& y0, const TimeGrid& grid) {
    grid.validate();
    const double h = grid.dt;
    Trajectory out;
    out.times.resize(grid.outputs());
    out.phases.resize(grid.outputs(), y0.size());
    Vector y = y0, k1, k2, k3, k4, tmp;
    out.times(0) = grid.t0;
    out.phases.row(0) = y.transpose();
    for (int s = 1; s <= grid.steps; ++s) {
        f(y, k1);
        tmp = y + 0.5 * h * k1;
        f(tmp, k2);
        tmp = y + 0.5 * h * k2;
        f(tmp, k3);
        tmp = y + h * k3;
        f(tmp, k4);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!y.allFinite())
            throw IntegrationDiverged("non-finite state", grid.t0 + (s - 1) * h);
        if (s % grid.stride == 0) {
            const int o = s / grid.stride;
            out.times(o) = grid.t0 + s * h;
            out.phases.row(o) = y.transpose();
        }
    }
    return out;
}

auto drift_of(const KsbmSystem& sys, Execution exec) {
    return [&sys, exec](const Vector& theta, Vector& out) {
        if (exec == Execution::serial)
            kernels::serial::kuramoto_drift(sys.dense_coupling, sys.omega, theta, out);
        else
            kernels::omp::kuramoto_drift(sys.coupling, sys.omega, theta, out);
    };
}

}  // namespace

Trajectory integrate_full(const KsbmSystem& sys, const TimeGrid& grid, Execution exec) {
    Trajectory t = rk4(drift_of(sys, exec), sys.theta0, grid);
    t.omegas = sys.omega;
    return t;
}

Trajectory integrate_full(const KsbmParams& params, double dt, double T) {
    if (params.brownian_b != 0.0)
        throw ParameterError("integrate_full is deterministic; use integrate_stochastic");
    return integrate_full(realize(params), TimeGrid::from_dt(dt, T));
}

Trajectory integrate_stochastic(const KsbmSystem& sys, const TimeGrid& grid, Execution exec) {
    grid.validate();
    const int N = sys.size();
    const double h = grid.dt;
    const double scale = sys.b * std::sqrt(h);
    Rng rng = make_rng(sys.seed, Stream::brownian);
    std::normal_distribution<double> z(0.0, 1.0);
    const auto f = drift_of(sys, exec);

    Trajectory out;
    out.omegas = sys.omega;
    out.times.resize(grid.outputs());
    out.phases.resize(grid.outputs(), N);
    Vector y = sys.theta0, dy;
    out.times(0) = grid.t0;
    out.phases.row(0) = y.transpose();
    for (int s = 1; s <= grid.steps; ++s) {
        f(y, dy);
        y += h * dy;
        if (sys.b != 0.0)
            for (int i = 0; i < N; ++i) y(i) += scale * z(rng);
        if (!y.allFinite())
            throw IntegrationDiverged("non-finite state", grid.t0 + (s - 1) * h);
        if (s % grid.stride == 0) {
            const int o = s / grid.stride;
            out.times(o) = grid.t0 + s * h;
            out.phases.row(o) = y.transpose();
        }
    }
    return out;
}

Trajectory integrate_stochastic(const KsbmParams& params, double dt, double T) {
    return integrate_stochastic(realize(params), TimeGrid::from_dt(dt, T));
}

Trajectory integrate_mean_field(int m, const Matrix& P, const Matrix& C, const Vector& freq,
                                const Vector& theta_bar0, const TimeGrid& grid) {
    const Index n = freq.size();
    if (P.rows() != n || P.cols() != n || C.rows() != n || C.cols() != n ||
        theta_bar0.size() != n)
        throw ParameterError("mean-field inputs have inconsistent sizes");
    const Matrix W = static_cast<double>(m) * P.cwiseProduct(C);
    auto f = [&](const Vector& th, Vector& out) {
        out.resize(n);
        for (Index r = 0; r < n; ++r) {
            double acc = 0.0;
            for (Index s = 0; s < n; ++s)
                if (s != r) acc += W(r, s) * std::sin(th(s) - th(r));
            out(r) = freq(r) + acc;
        }
    };
    Trajectory t = rk4(f, theta_bar0, grid);
    t.omegas = freq;
    return t;
}

double epsilon_bound(double kappa, int n, double sigma) {
    if (!(kappa > 0.0)) throw ParameterError("epsilon bound needs kappa > 0");
    return sigma * sigma * std::numbers::pi * n / kappa;
}

bool has_stable_steady_state(double kappa, int n, double sigma) {
    return std::numbers::e * sigma * sigma * std::numbers::pi * n * n < 2.0 * kappa * kappa;
}

std::optional<double> variance_fixed_point(double kappa, int n, double sigma) {
    if (!has_stable_steady_state(kappa, n, sigma)) return std::nullopt;
    const double a = 0.5 * std::numbers::pi * std::pow(sigma * n / kappa, 2);
    // v -> a e^v is increasing and starts above the identity at 0, so the
    // iterates rise monotonically to the smallest root.
    double v = 0.0;
    for (int it = 0; it < 100000; ++it) {
        const double next = a * std::exp(v);
        if (std::abs(next - v) <= 1e-15 * std::max(1.0, next)) return next;
        v = next;
    }
    return v;
}

namespace {

VarianceCurve dominated_curve(double kappa, int n, double eps, double V0, double dt, double T) {
    if (n < 1) throw ParameterError("n must be >= 1");
    if (!(V0 >= 0.0)) throw ParameterError("V0 must be >= 0");
    const double rate = 2.0 * kappa / n;
    Vector y0(1);
    y0(0) = V0;
    auto f = [rate, eps](const Vector& v, Vector& out) {
        out.resize(1);
        out(0) = eps - rate * v(0) * std::exp(-v(0));
    };
    Trajectory t = rk4(f, y0, TimeGrid::from_dt(dt, T));
    VarianceCurve c;
    c.times = t.times;
    c.values = t.phases.col(0);
    return c;
}

}  // namespace

VarianceCurve integrate_variance_dominated_identical(double kappa, int n, double V0, double dt,
                                                     double T) {
    VarianceCurve c = dominated_curve(kappa, n, 0.0, V0, dt, T);
    c.steady_state_bound = 0.0;
    return c;
}

VarianceCurve integrate_variance_dominated(double kappa, int n, double sigma, double V0,
                                           double dt, double T) {
    if (!(sigma >= 0.0)) throw ParameterError("sigma must be >= 0");
    const double eps = sigma == 0.0 ? 0.0 : epsilon_bound(kappa, n, sigma);
    VarianceCurve c = dominated_curve(kappa, n, eps, V0, dt, T);
    c.stable_steady_state = has_stable_steady_state(kappa, n, sigma);
    c.steady_state_bound = variance_fixed_point(kappa, n, sigma);
    return c;
}

GaussianTrajectory integrate_gaussian_full(const GaussianParams& p, const Vector& means0,
                                           const Vector& V0, const TimeGrid& grid) {
    const int n = p.n;
    if (n < 1 || p.N < n) throw ParameterError("need 1 <= n <= N");
    if (p.omega_means.size() != n || means0.size() != n || V0.size() != n)
        throw ParameterError("Gaussian model inputs must have n entries");
    if ((V0.array() < 0.0).any()) throw ParameterError("initial variances must be >= 0");
    const double eps = p.epsilon ? *p.epsilon
                                 : (p.sigma == 0.0 ? 0.0 : epsilon_bound(p.kappa, n, p.sigma));
    const double self = 2.0 * p.kappa / n;
    const double cross = n > 1 ? 2.0 * p.kappa / (static_cast<double>(p.N) * (n - 1)) : 0.0;

    // State layout: [means; variances]. Negative variances are read as 0.
    auto f = [&](const Vector& y, Vector& out) {
        out.resize(2 * n);
        Vector decay(n);
        for (int r = 0; r < n; ++r) decay(r) = std::exp(-0.5 * std::max(y(n + r), 0.0));
        for (int r = 0; r < n; ++r) {
            double s_sin = 0.0, s_cos = 0.0;
            for (int s = 0; s < n; ++s) {
                if (s == r) continue;
                const double dth = y(s) - y(r);
                s_sin += std::sin(dth) * decay(s);
                s_cos += std::cos(dth) * decay(s);
            }
            const double V = std::max(y(n + r), 0.0);
            out(r) = p.omega_means(r) + cross * decay(r) * s_sin;
            out(n + r) = eps - self * V * std::exp(-V) - 2.0 * cross * V * decay(r) * s_cos;
        }
    };
    Vector y0(2 * n);
    y0 << means0, V0;
    grid.validate();
    const double h = grid.dt;
    GaussianTrajectory out;
    out.times.resize(grid.outputs());
    out.means.resize(grid.outputs(), n);
    out.variances.resize(grid.outputs(), n);
    Vector y = y0, k1, k2, k3, k4, tmp;
    out.times(0) = grid.t0;
    out.means.row(0) = means0.transpose();
    out.variances.row(0) = V0.transpose();
    for (int s = 1; s <= grid.steps; ++s) {
        f(y, k1);
        tmp = y + 0.5 * h * k1;
        f(tmp, k2);
        tmp = y + 0.5 * h * k2;
        f(tmp, k3);
        tmp = y + h * k3;
        f(tmp, k4);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!y.allFinite())
            throw IntegrationDiverged("non-finite Gaussian state", grid.t0 + (s - 1) * h);
        for (int r = 0; r < n; ++r) {
            if (y(n + r) < 0.0) {
                y(n + r) = 0.0;
                out.clamped = true;
            }
        }
        if (s % grid.stride == 0) {
            const int o = s / grid.stride;
            out.times(o) = grid.t0 + s * h;
            out.means.row(o) = y.head(n).transpose();
            out.variances.row(o) = y.tail(n).transpose();
        }
    }
    return out;
}

std::optional<double> transition_time(const Vector& times, const Vector& variance, int m,
                                      double nu) {
    if (times.size() != variance.size() || times.size() == 0)
        throw ParameterError("transition_time needs matching, nonempty samples");
    if (m < 1) throw ParameterError("m must be >= 1");
    if (!(nu >= 0.0)) throw ParameterError("nu must be >= 0");
    const double thr = std::pow(static_cast<double>(m), -(2.0 + nu));
    if (variance(0) <= thr) return times(0);
    for (Index k = 1; k < times.size(); ++k) {
        if (variance(k) <= thr) {
            const double v0 = variance(k - 1), v1 = variance(k);
            const double w = (v0 - thr) / (v0 - v1);
            return times(k - 1) + w * (times(k) - times(k - 1));
        }
    }
    return std::nullopt;
}

std::optional<double> transition_time(const VarianceCurve& curve, int m, double nu) {
    return transition_time(curve.times, curve.values, m, nu);
}

Matrix finite_difference_frequencies(const Trajectory& traj) {
    const Index K = traj.samples();
    if (K < 2) throw ParameterError("need at least two samples for frequencies");
    Matrix f(K, traj.oscillators());
    for (Index k = 0; k < K; ++k) {
        const Index a = std::max<Index>(k - 1, 0);
        const Index b = std::min<Index>(k + 1, K - 1);
        f.row(k) = (traj.phases.row(b) - traj.phases.row(a)) / (traj.times(b) - traj.times(a));
    }
    return f;
}

std::optional<double> detect_steady_state(const Trajectory& traj, double tol, double window) {
    if (!(tol > 0.0) || !(window >= 0.0)) throw ParameterError("need tol > 0, window >= 0");
    const Index K = traj.samples();
    if (K < 2) throw ParameterError("trajectory too short for steady-state detection");
    const double t_end = traj.times(K - 1);
    if (traj.times(0) + window > t_end + 1e-12)
        throw ParameterError("trajectory shorter than one window");
    const Matrix f = finite_difference_frequencies(traj);
    std::vector<char> ok(K);
    for (Index k = 0; k < K; ++k) ok[k] = (f.row(k).maxCoeff() - f.row(k).minCoeff()) < tol;
    // next_bad[k]: first failing index >= k, or K.
    std::vector<Index> next_bad(K + 1, K);
    for (Index k = K - 1; k >= 0; --k) next_bad[k] = ok[k] ? next_bad[k + 1] : k;
    for (Index k = 0; k < K; ++k) {
        const double t = traj.times(k);
        if (t + window > t_end + 1e-12) break;
        const Index b = next_bad[k];
        if (b == K || traj.times(b) > t + window + 1e-12) return t;
    }
    return std::nullopt;
}

CommunityStats community_stats(const Trajectory& traj, const CommunityAssignment& g) {
    if (g.size() != traj.oscillators()) throw ParameterError("labels must cover every oscillator");
    const auto members = g.members();
    const Index K = traj.samples();
    CommunityStats st;
    st.means = Matrix::Zero(K, g.count);
    st.variances = Matrix::Zero(K, g.count);
    for (int r = 0; r < g.count; ++r) {
        const auto& mem = members[r];
        if (mem.empty()) continue;
        for (Index k = 0; k < K; ++k) {
            double s = 0.0;
            for (int i : mem) s += traj.phases(k, i);
            const double mean = s / mem.size();
            double v = 0.0;
            for (int i : mem) v += (traj.phases(k, i) - mean) * (traj.phases(k, i) - mean);
            st.means(k, r) = mean;
            st.variances(k, r) = v / mem.size();
        }
    }
    return st;
}

Trajectory align_phase_branches(const Trajectory& traj, const CommunityAssignment& g,
                                int reference_sample) {
    if (g.size() != traj.oscillators()) throw ParameterError("labels must cover every oscillator");
    const int K = traj.samples();
    const int ref = reference_sample < 0 ? K + reference_sample : reference_sample;
    if (ref < 0 || ref >= K) throw ParameterError("reference sample out of range");
    constexpr double two_pi = 2.0 * std::numbers::pi;
    Trajectory out = traj;
    for (const auto& mem : g.members()) {
        if (mem.empty()) continue;
        double sx = 0.0, sy = 0.0;
        for (int i : mem) {
            sx += std::cos(traj.phases(ref, i));
            sy += std::sin(traj.phases(ref, i));
        }
        const double centre = std::atan2(sy, sx);
        // Anchor near the community's plain mean so the aligned phases stay on
        // the same sheet as the data.
        double plain = 0.0;
        for (int i : mem) plain += traj.phases(ref, i);
        plain /= mem.size();
        const double anchor = centre + two_pi * std::round((plain - centre) / two_pi);
        for (int i : mem) {
            const double shift = two_pi * std::round((traj.phases(ref, i) - anchor) / two_pi);
            if (shift != 0.0) out.phases.col(i).array() -= shift;
        }
    }
    return out;
}

std::optional<double> empirical_transition_time(const Trajectory& traj,
                                                const CommunityAssignment& g, int m,
                                                double nu) {
    const CommunityStats st = community_stats(align_phase_branches(traj, g), g);
    const Vector worst = st.variances.rowwise().maxCoeff();
    return transition_time(traj.times, worst, m, nu);
}

double steady_state_deviation(double omega_i, double omega_ref, double kappa, int n) {
    const double arg = n * (omega_i - omega_ref) / kappa;
    if (!(arg >= -1.0 && arg <= 1.0))
        throw NoLockingError("no phase-locked solution: |n (omega_i - omega_ref) / kappa| > 1");
    return std::asin(arg);
}

}  // namespace ksbm
