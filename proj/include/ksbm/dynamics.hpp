#pragma once

#include "ksbm/common.hpp"
#include "ksbm/graphgen.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace ksbm {

struct KsbmParams {
    CouplingGraph graph;
    Vector mu;      // one entry per community
    double sigma = 0.0;
    std::optional<Vector> theta0;  // uniform on [-pi, pi) when absent
    std::uint64_t seed = 0;
    double brownian_b = 0.0;

    void validate() const;
};

// Everything random has been drawn; integrating a system is deterministic.
struct KsbmSystem {
    SparseMatrix coupling;
    Matrix dense_coupling;
    Vector omega;
    Vector theta0;
    double b = 0.0;
    std::uint64_t seed = 0;
    CommunityAssignment communities;

    int size() const { return static_cast<int>(omega.size()); }
};

KsbmSystem realize(const KsbmParams& params);

Vector sample_frequencies(const Vector& mu, double sigma, int n, int m, std::uint64_t seed);
Vector sample_initial_phases(int N, std::uint64_t seed);

// `steps` internal steps of size dt; every `stride`-th state is stored,
// including the initial one.
struct TimeGrid {
    double dt = 0.0;
    int steps = 0;
    int stride = 1;
    double t0 = 0.0;

    static TimeGrid uniform(double T, int steps, int output_steps, double t0 = 0.0);
    static TimeGrid from_dt(double dt, double T, double t0 = 0.0);
    double end() const { return t0 + dt * steps; }
    int outputs() const { return steps / stride + 1; }
    void validate() const;
};

struct Trajectory {
    Vector times;
    Matrix phases;  // rows are time samples
    Vector omegas;

    int samples() const { return static_cast<int>(times.size()); }
    int oscillators() const { return static_cast<int>(phases.cols()); }
};

Trajectory integrate_full(const KsbmSystem& sys, const TimeGrid& grid,
                          Execution exec = Execution::parallel);
Trajectory integrate_full(const KsbmParams& params, double dt, double T);

// Forward Euler-Maruyama; noise increments come from the brownian stream of sys.seed.
Trajectory integrate_stochastic(const KsbmSystem& sys, const TimeGrid& grid,
                                Execution exec = Execution::parallel);
Trajectory integrate_stochastic(const KsbmParams& params, double dt, double T);

// dtheta_r/dt = freq_r + m * sum_s P_rs C_rs sin(theta_s - theta_r)
Trajectory integrate_mean_field(int m, const Matrix& P, const Matrix& C, const Vector& freq,
                                const Vector& theta_bar0, const TimeGrid& grid);

struct VarianceCurve {
    Vector times;
    Vector values;
    bool stable_steady_state = true;
    std::optional<double> steady_state_bound;
};

VarianceCurve integrate_variance_dominated_identical(double kappa, int n, double V0,
                                                     double dt, double T);
VarianceCurve integrate_variance_dominated(double kappa, int n, double sigma, double V0,
                                           double dt, double T);

double epsilon_bound(double kappa, int n, double sigma);
bool has_stable_steady_state(double kappa, int n, double sigma);
// Smallest root of v = (pi/2)(sigma n / kappa)^2 e^v; empty when none exists.
std::optional<double> variance_fixed_point(double kappa, int n, double sigma);

struct GaussianParams {
    double kappa = 0.0;
    int N = 0;
    int n = 0;
    Vector omega_means;
    double sigma = 0.0;
    std::optional<double> epsilon;  // defaults to epsilon_bound
};

struct GaussianTrajectory {
    Vector times;
    Matrix means;
    Matrix variances;
    bool clamped = false;
};

GaussianTrajectory integrate_gaussian_full(const GaussianParams& params, const Vector& means0,
                                           const Vector& V0, const TimeGrid& grid);

std::optional<double> transition_time(const Vector& times, const Vector& variance, int m,
                                      double nu = 0.0);
std::optional<double> transition_time(const VarianceCurve& curve, int m, double nu = 0.0);

// Central differences inside, one-sided at the ends.
Matrix finite_difference_frequencies(const Trajectory& traj);

std::optional<double> detect_steady_state(const Trajectory& traj, double tol, double window);

struct CommunityStats {
    Matrix means;      // samples x n
    Matrix variances;  // population variance
};

CommunityStats community_stats(const Trajectory& traj, const CommunityAssignment& g);

// Shifts each oscillator by a constant multiple of 2 pi so that it lies within
// pi of its community's circular mean at `reference_sample` (negative counts
// from the end).
Trajectory align_phase_branches(const Trajectory& traj, const CommunityAssignment& g,
                                int reference_sample = -1);

// First time the largest community variance of the aligned trajectory drops
// to m^-(2+nu).
std::optional<double> empirical_transition_time(const Trajectory& traj,
                                                const CommunityAssignment& g, int m,
                                                double nu = 0.0);

double steady_state_deviation(double omega_i, double omega_ref, double kappa, int n);

struct RegimeBoundaries {
    double t_trans = 0.0;
    std::optional<double> t_ss;
};

}  // namespace ksbm
