#pragma once

#include "ksbm/common.hpp"
#include "ksbm/graphgen.hpp"

// Hot loops in two flavours. `serial` is the direct transcription used as a
// reference; `omp` is restructured for throughput and parallel over rows or
// pairs. Each output entry is produced by exactly one thread with a fixed
// summation order, so results do not depend on the thread count.
namespace ksbm::kernels {

namespace serial {
// out_i = omega_i + sum_j C_ij sin(theta_j - theta_i)
void kuramoto_drift(const Matrix& C, const Vector& omega, const Vector& theta, Vector& out);
// Level-2 Chen accumulation over the based path (rows are samples).
Matrix lead_matrix(const Matrix& X);
Matrix covariance(const Matrix& X);
// Euclidean distances between rows of V.
Matrix pairwise_distances(const Matrix& V);
}  // namespace serial

namespace omp {
// Uses sin(a - b) = sin a cos b - cos a sin b over the CSR rows.
void kuramoto_drift(const SparseMatrix& C, const Vector& omega, const Vector& theta,
                    Vector& out);
Matrix lead_matrix(const Matrix& X);
Matrix covariance(const Matrix& X);
Matrix pairwise_distances(const Matrix& V);
}  // namespace omp

}  // namespace ksbm::kernels
