// Serial reference kernels against their OpenMP counterparts. The size
// argument is the number of oscillators.

#include "ksbm/graphgen.hpp"
#include "ksbm/kernels.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace ksbm;

namespace {

Matrix random_walk(int samples, int dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    Matrix X(samples, dim);
    for (int k = 0; k < samples; ++k)
        for (int i = 0; i < dim; ++i) X(k, i) = (k ? X(k - 1, i) : 0.0) + z(rng);
    return X;
}

CouplingGraph graph_for(int N) { return generate_assortative(N / 33, 33, 100.0, 1); }

void drift_serial(benchmark::State& st) {
    const auto g = graph_for(static_cast<int>(st.range(0)));
    const Vector theta = random_walk(1, g.size(), 2).transpose(), omega = Vector::Ones(g.size());
    Vector out(g.size());
    for (auto _ : st) {
        kernels::serial::kuramoto_drift(g.coupling, omega, theta, out);
        benchmark::DoNotOptimize(out.data());
    }
}

void drift_omp(benchmark::State& st) {
    const auto g = graph_for(static_cast<int>(st.range(0)));
    const SparseMatrix C = g.sparse_coupling();
    const Vector theta = random_walk(1, g.size(), 2).transpose(), omega = Vector::Ones(g.size());
    Vector out(g.size());
    for (auto _ : st) {
        kernels::omp::kuramoto_drift(C, omega, theta, out);
        benchmark::DoNotOptimize(out.data());
    }
}

template <Matrix (*F)(const Matrix&)>
void on_path(benchmark::State& st) {
    const Matrix X = random_walk(501, static_cast<int>(st.range(0)), 3);
    for (auto _ : st) benchmark::DoNotOptimize(F(X));
}

template <Matrix (*F)(const Matrix&)>
void on_vectors(benchmark::State& st) {
    const int N = static_cast<int>(st.range(0));
    const Matrix V = random_walk(N, 2 * N, 4);
    for (auto _ : st) benchmark::DoNotOptimize(F(V));
}

}  // namespace

BENCHMARK(drift_serial)->Arg(99)->Arg(990)->Arg(3300);
BENCHMARK(drift_omp)->Arg(99)->Arg(990)->Arg(3300);
BENCHMARK(on_path<kernels::serial::lead_matrix>)->Name("lead_serial")->Arg(99)->Arg(297);
BENCHMARK(on_path<kernels::omp::lead_matrix>)->Name("lead_omp")->Arg(99)->Arg(297);
BENCHMARK(on_path<kernels::serial::covariance>)->Name("covariance_serial")->Arg(99)->Arg(297);
BENCHMARK(on_path<kernels::omp::covariance>)->Name("covariance_omp")->Arg(99)->Arg(297);
BENCHMARK(on_vectors<kernels::serial::pairwise_distances>)->Name("distances_serial")->Arg(99)->Arg(297);
BENCHMARK(on_vectors<kernels::omp::pairwise_distances>)->Name("distances_omp")->Arg(99)->Arg(297);

BENCHMARK_MAIN();
