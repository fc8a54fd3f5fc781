#include "ksbm/kernels.hpp"

#include <cmath>

namespace ksbm::kernels {

namespace serial {

void kuramoto_drift(const Matrix& C, const Vector& omega, const Vector& theta, Vector& out) {
    const Index N = theta.size();
    out.resize(N);
    for (Index i = 0; i < N; ++i) {
        double acc = 0.0;
        for (Index j = 0; j < N; ++j) {
            const double c = C(i, j);
            if (c != 0.0) acc += c * std::sin(theta(j) - theta(i));
        }
        out(i) = omega(i) + acc;
    }
}

Matrix lead_matrix(const Matrix& X) {
    const Index N = X.cols();
    Matrix S = Matrix::Zero(N, N);
    Vector x = Vector::Zero(N);
    for (Index k = 0; k + 1 < X.rows(); ++k) {
        const Vector d = (X.row(k + 1) - X.row(k)).transpose();
        S.noalias() += x * d.transpose() + 0.5 * d * d.transpose();
        x += d;
    }
    return 0.5 * (S - S.transpose());
}

Matrix covariance(const Matrix& X) {
    const Index K = X.rows();
    const Index N = X.cols();
    Vector mean = Vector::Zero(N);
    for (Index k = 0; k < K; ++k) mean += X.row(k).transpose();
    mean /= static_cast<double>(K);
    Matrix cov = Matrix::Zero(N, N);
    for (Index k = 0; k < K; ++k) {
        const Vector c = X.row(k).transpose() - mean;
        cov.noalias() += c * c.transpose();
    }
    return cov / static_cast<double>(K);
}

Matrix pairwise_distances(const Matrix& V) {
    const Index N = V.rows();
    Matrix D = Matrix::Zero(N, N);
    for (Index i = 0; i < N; ++i)
        for (Index j = 0; j < N; ++j)
            if (i != j) D(i, j) = (V.row(i) - V.row(j)).norm();
    return D;
}

}  // namespace serial

namespace omp {

void kuramoto_drift(const SparseMatrix& C, const Vector& omega, const Vector& theta,
                    Vector& out) {
    const Index N = theta.size();
    out.resize(N);
    Vector s(N), c(N);
    for (Index i = 0; i < N; ++i) {
        s(i) = std::sin(theta(i));
        c(i) = std::cos(theta(i));
    }
    const int* outer = C.outerIndexPtr();
    const int* inner = C.innerIndexPtr();
    const double* val = C.valuePtr();
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < N; ++i) {
        double ss = 0.0, sc = 0.0;
        for (int p = outer[i]; p < outer[i + 1]; ++p) {
            ss += val[p] * s(inner[p]);
            sc += val[p] * c(inner[p]);
        }
        out(i) = omega(i) + c(i) * ss - s(i) * sc;
    }
}

Matrix lead_matrix(const Matrix& X) {
    const Index K = X.rows();
    const Index N = X.cols();
    Matrix L = Matrix::Zero(N, N);
    if (K < 2) return L;
    const Matrix Y = X.rowwise() - X.row(0);
    const Matrix dY = Y.bottomRows(K - 1) - Y.topRows(K - 1);
#pragma omp parallel for schedule(dynamic)
    for (Index i = 0; i < N; ++i) {
        for (Index j = i + 1; j < N; ++j) {
            double acc = 0.0;
            for (Index k = 0; k + 1 < K; ++k)
                acc += Y(k, i) * dY(k, j) - Y(k, j) * dY(k, i);
            L(i, j) = 0.5 * acc;
            L(j, i) = -L(i, j);
        }
    }
    return L;
}

Matrix covariance(const Matrix& X) {
    const Index K = X.rows();
    const Index N = X.cols();
    const Matrix Xc = X.rowwise() - X.colwise().mean();
    Matrix cov(N, N);
#pragma omp parallel for schedule(dynamic)
    for (Index i = 0; i < N; ++i) {
        for (Index j = i; j < N; ++j) {
            const double v = Xc.col(i).dot(Xc.col(j)) / static_cast<double>(K);
            cov(i, j) = v;
            cov(j, i) = v;
        }
    }
    return cov;
}

Matrix pairwise_distances(const Matrix& V) {
    const Index N = V.rows();
    Matrix D = Matrix::Zero(N, N);
#pragma omp parallel for schedule(dynamic)
    for (Index i = 0; i < N; ++i) {
        for (Index j = i + 1; j < N; ++j) {
            const double d = (V.row(i) - V.row(j)).norm();
            D(i, j) = d;
            D(j, i) = d;
        }
    }
    return D;
}

}  // namespace omp

}  // namespace ksbm::kernels
