#pragma once

#include "ksbm/common.hpp"
#include "ksbm/dynamics.hpp"

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace ksbm {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

// Piecewise-linear path through (times(k), values.row(k)).
template <class Scalar>
struct BasicPath {
    using Values = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    Vector times;
    Values values;

    int samples() const { return static_cast<int>(times.size()); }
    int dim() const { return static_cast<int>(values.cols()); }
    void validate() const;
};

using Path = BasicPath<double>;
using ComplexPath = BasicPath<Complex>;

enum class Transform { identity, sin };

std::string to_string(Transform f);
Transform transform_from_string(const std::string& s);

Path to_path(const Trajectory& traj);
// Removes jumps larger than pi by adding multiples of 2 pi; a no-op on
// continuous input.
Path unwrap(const Path& p);
Path unwrap(const Trajectory& traj);
// Maps to [-pi, pi).
Path wrap(const Path& p);
Path transform(const Path& p, Transform f);
ComplexPath exp_i(const Path& p);

// Exact restriction of the interpolant to [a, b] clipped to the domain;
// interpolated endpoints are inserted.
template <class Scalar>
BasicPath<Scalar> restrict(const BasicPath<Scalar>& p, double a, double b);

inline constexpr int kMaxSignatureLevel = 4;
inline constexpr std::size_t kDefaultSignatureCapacity = std::size_t{1} << 26;

// levels[l] holds the flattened l-tensor, l = 0..M, with
// I = (i_1, ..., i_l) stored at i_1 N^{l-1} + ... + i_l.
template <class Scalar>
struct BasicSignature {
    int dim = 0;
    int level = 0;
    std::vector<std::vector<Scalar>> levels;

    Scalar operator()(const std::vector<int>& I) const;
    Scalar at(int i) const { return levels[1][i]; }
    Scalar at(int i, int j) const { return levels[2][static_cast<std::size_t>(i) * dim + j]; }
};

using Signature = BasicSignature<double>;
using ComplexSignature = BasicSignature<Complex>;

std::size_t signature_entries(int dim, int level);

// base_at_zero subtracts the first sample. Entries depend only on increments,
// so the result is the same either way.
template <class Scalar>
BasicSignature<Scalar> signature(const BasicPath<Scalar>& p, int level, bool base_at_zero = true,
                                 std::size_t capacity = kDefaultSignatureCapacity);

template <class Scalar>
BasicSignature<Scalar> chen_product(const BasicSignature<Scalar>& a,
                                    const BasicSignature<Scalar>& b);

// Antisymmetric lead of the path based at its first sample.
Matrix lead_matrix(const Path& p, Execution exec = Execution::parallel);
ComplexMatrix lead_matrix(const ComplexPath& p);
// Population-normalized, time-centered covariance of the samples.
Matrix covariance_matrix(const Path& p, Execution exec = Execution::parallel);

enum class Statistic { lead, covariance };

std::string to_string(Statistic s);
Statistic statistic_from_string(const std::string& s);

Matrix compute_statistic(const Path& p, Statistic stat, Execution exec = Execution::parallel);

struct Window {
    double begin = 0.0;
    double end = 0.0;
};

struct RegimeMatrices {
    Window clusterization;
    Window transient;
    std::optional<Window> steady;
    Matrix C;
    Matrix TR;
    std::optional<Matrix> SS;
};

// `path` must already carry the transform. Windows: C = [t0, t_trans],
// TR = [t_trans, t_ss or end], SS = [t_ss, t_ss + ss_horizon] clipped to the end.
RegimeMatrices regime_split(const Path& path, const RegimeBoundaries& bounds, double ss_horizon,
                            Statistic stat, Execution exec = Execution::parallel);

// (omega T)^M / M!
double analytic_ss_signature_theta(double omega, double T, int M);
// e^{i sum dtheta} (e^{i omega T} - 1)^M / M!, M = offsets.size()
Complex analytic_ss_signature_exp(const std::vector<double>& offsets, double omega, double T);
// (sin(dtheta) / 2)(omega T + sin(omega T)) as stated for the synchronized sinusoid.
double analytic_ss_lead_sin(double delta_theta, double omega, double T);
// Based S_(i,j) of (sin(omega t + theta_i), sin(omega t + theta_j)) on [0, T].
double analytic_ss_signature_sin(double theta_i, double theta_j, double omega, double T);
// (S_(i,j) - S_(j,i)) / 2 from the closed form above; equals
// (sin(dtheta) / 2)(omega T - sin(omega T)).
double analytic_ss_lead_sin_exact(double theta_i, double theta_j, double omega, double T);

}  // namespace ksbm
