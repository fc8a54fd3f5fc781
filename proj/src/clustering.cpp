#include "ksbm/clustering.hpp"

#include "ksbm/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace ksbm {

namespace {

std::size_t ipow(std::size_t base, int e) {
    std::size_t v = 1;
    for (int k = 0; k < e; ++k) v *= base;
    return v;
}

// Maps labels to 0..n-1 in order of first appearance of each used label
// value; returns n.
int compact_used(const std::vector<int>& labels, int count, std::vector<int>& id) {
    id.assign(count, -1);
    std::vector<char> used(count, 0);
    for (int l : labels) {
        if (l < 0 || l >= count) throw ParameterError("label outside the community range");
        used[l] = 1;
    }
    int n = 0;
    for (int r = 0; r < count; ++r)
        if (used[r]) id[r] = n++;
    return n;
}

BlockScore block_core(const double* data, int order, int dim, const CommunityAssignment& G,
                      double stabilizer) {
    if (G.size() != dim) throw ParameterError("community labels must cover every index");
    if (!(stabilizer >= 0.0)) throw ParameterError("stabilizer must be >= 0");
    std::vector<int> id;
    const int n = compact_used(G.labels, G.count, id);
    BlockScore out;
    out.n_used = n;
    if (n == 0) return out;
    std::vector<int> blk(dim);
    for (int i = 0; i < dim; ++i) blk[i] = id[G.labels[i]];

    const std::size_t nb = ipow(n, order);
    const std::size_t total = ipow(dim, order);
    std::vector<double> sum(nb, 0.0), ssd(nb, 0.0);
    std::vector<std::size_t> cnt(nb, 0);
    std::vector<std::size_t> block_of(total);
    std::vector<int> digit(order, 0);
    for (std::size_t f = 0; f < total; ++f) {
        std::size_t b = 0;
        for (int p = 0; p < order; ++p) b = b * n + blk[digit[p]];
        block_of[f] = b;
        sum[b] += data[f];
        ++cnt[b];
        for (int p = order - 1; p >= 0; --p) {
            if (++digit[p] < dim) break;
            digit[p] = 0;
        }
    }
    std::vector<double> mean(nb);
    for (std::size_t b = 0; b < nb; ++b) mean[b] = sum[b] / static_cast<double>(cnt[b]);
    for (std::size_t f = 0; f < total; ++f) {
        const double e = data[f] - mean[block_of[f]];
        ssd[block_of[f]] += e * e;
    }

    // Offset of the diagonal block (r, ..., r).
    std::size_t diag_step = 0;
    for (int p = 0; p < order; ++p) diag_step = diag_step * n + 1;

    double h = 0.0, d = 0.0;
    std::vector<int> rd(order, 0);
    for (std::size_t b = 0; b < nb; ++b) {
        h += ssd[b] / static_cast<double>(cnt[b]);
        for (int p = 0; p < order; ++p) {
            const double e = mean[b] - mean[rd[p] * diag_step];
            d += e * e;
        }
        for (int p = order - 1; p >= 0; --p) {
            if (++rd[p] < n) break;
            rd[p] = 0;
        }
    }
    const double norm = static_cast<double>(nb);
    out.h = h / norm;
    out.d = d / norm;
    const double denom = out.h + stabilizer;
    if (denom > 0.0) {
        out.g = out.d / denom;
    } else if (out.d > 0.0) {
        out.g = std::numeric_limits<double>::infinity();
        out.infinite = true;
    } else {
        out.g = 0.0;
    }
    return out;
}

void check_square(const Matrix& B) {
    if (B.rows() != B.cols()) throw ParameterError("matrix must be square");
}

}  // namespace

Tensor Tensor::from_matrix(const Matrix& B) {
    check_square(B);
    Tensor t;
    t.order = 2;
    t.dim = static_cast<int>(B.rows());
    t.data.resize(static_cast<std::size_t>(t.dim) * t.dim);
    for (int i = 0; i < t.dim; ++i)
        for (int j = 0; j < t.dim; ++j) t.data[static_cast<std::size_t>(i) * t.dim + j] = B(i, j);
    return t;
}

Tensor Tensor::zeros(int order, int dim, std::size_t capacity) {
    if (order < 1 || dim < 0) throw ParameterError("tensor needs order >= 1");
    double entries = std::pow(static_cast<double>(dim), order);
    if (entries > static_cast<double>(capacity)) throw CapacityError("tensor exceeds capacity");
    Tensor t;
    t.order = order;
    t.dim = dim;
    t.data.assign(ipow(dim, order), 0.0);
    return t;
}

std::size_t Tensor::flat(const std::vector<int>& I) const {
    if (static_cast<int>(I.size()) != order) throw ParameterError("index has wrong order");
    std::size_t f = 0;
    for (int i : I) {
        if (i < 0 || i >= dim) throw ParameterError("tensor index out of range");
        f = f * dim + i;
    }
    return f;
}

double& Tensor::operator[](const std::vector<int>& I) { return data[flat(I)]; }
double Tensor::operator[](const std::vector<int>& I) const { return data[flat(I)]; }

BlockScore block_clustering(const Matrix& B, const CommunityAssignment& G, double stabilizer) {
    check_square(B);
    // Eigen is column-major, so index the transpose to keep (i, j) -> i N + j.
    const Matrix Bt = B.transpose();
    return block_core(Bt.data(), 2, static_cast<int>(B.rows()), G, stabilizer);
}

double homogeneity(const Matrix& B, const CommunityAssignment& G) {
    return block_clustering(B, G).h;
}

double discriminativity(const Matrix& B, const CommunityAssignment& G) {
    return block_clustering(B, G).d;
}

BlockScore tensor_block_metrics(const Tensor& B, const CommunityAssignment& G, double stabilizer) {
    if (B.order < 2) throw ParameterError("tensor metrics need order >= 2");
    if (B.data.size() != ipow(B.dim, B.order)) throw ParameterError("tensor storage mismatch");
    return block_core(B.data.data(), B.order, B.dim, G, stabilizer);
}

std::string to_string(VectorMode m) {
    return m == VectorMode::column ? "column" : "row_and_column";
}

VectorMode vector_mode_from_string(const std::string& s) {
    if (s == "column") return VectorMode::column;
    if (s == "row_and_column" || s == "both") return VectorMode::row_and_column;
    throw ParameterError("unknown vector mode: " + s);
}

Matrix representative_vectors(const Matrix& B, VectorMode mode) {
    check_square(B);
    const Index N = B.rows();
    if (mode == VectorMode::column) return B.transpose();
    Matrix V(N, 2 * N);
    V.leftCols(N) = B;
    V.rightCols(N) = B.transpose();
    return V;
}

Matrix representative_vectors(const Tensor& B) {
    const int M = B.order, N = B.dim;
    const std::size_t slice = ipow(N, M - 1);
    Matrix V(N, static_cast<Index>(slice) * M);
    std::vector<int> I(M);
    for (int i = 0; i < N; ++i) {
        for (int p = 0; p < M; ++p) {
            // Remaining indices enumerated lexicographically.
            std::vector<int> rest(M - 1, 0);
            for (std::size_t s = 0; s < slice; ++s) {
                for (int q = 0, c = 0; q < M; ++q) I[q] = (q == p) ? i : rest[c++];
                V(i, static_cast<Index>(p * slice + s)) = B[I];
                for (int q = M - 2; q >= 0; --q) {
                    if (++rest[q] < N) break;
                    rest[q] = 0;
                }
            }
        }
    }
    return V;
}

Matrix distance_matrix(const Matrix& B, VectorMode mode, Execution exec) {
    const Matrix V = representative_vectors(B, mode);
    return exec == Execution::serial ? kernels::serial::pairwise_distances(V)
                                     : kernels::omp::pairwise_distances(V);
}

Matrix distance_matrix(const Tensor& B, Execution exec) {
    const Matrix V = representative_vectors(B);
    return exec == Execution::serial ? kernels::serial::pairwise_distances(V)
                                     : kernels::omp::pairwise_distances(V);
}

namespace {

template <class Scorer>
CommunityEstimate sce_core(const Matrix& D, const Scorer& score, const SceOptions& opts) {
    const int N = static_cast<int>(D.rows());
    if (N < 2) throw ParameterError("sce needs at least two nodes");
    if (D.cols() != N) throw ParameterError("distance matrix must be square");
    const int kmax = opts.max_communities > 0 ? std::min(opts.max_communities, N) : N;

    CommunityEstimate est;
    est.labels.assign(N, 0);
    est.medoids = {0};
    est.score = 0.0;
    est.score_trace = {0.0};

    while (est.k() < kmax) {
        int bi = -1, bj = -1;
        double best = 0.0;
        for (int i = 0; i < N; ++i)
            for (int j = i + 1; j < N; ++j)
                if (est.labels[i] == est.labels[j] && D(i, j) > best) {
                    best = D(i, j);
                    bi = i;
                    bj = j;
                }
        if (bi < 0) break;

        std::vector<int> med = est.medoids;
        med[est.labels[bi]] = bi;
        med.push_back(bj);
        const int k1 = static_cast<int>(med.size());
        std::vector<int> lab(N);
        for (int x = 0; x < N; ++x) {
            int r_best = 0;
            for (int r = 1; r < k1; ++r)
                if (D(x, med[r]) < D(x, med[r_best])) r_best = r;
            lab[x] = r_best;
        }
        for (int r = 0; r < k1; ++r) lab[med[r]] = r;

        std::vector<int> size(k1, 0), remap(k1, -1);
        for (int l : lab) ++size[l];
        std::vector<int> kept;
        for (int r = 0; r < k1; ++r)
            if (size[r] > 0) {
                remap[r] = static_cast<int>(kept.size());
                kept.push_back(med[r]);
            }
        for (int& l : lab) l = remap[l];

        const int k = static_cast<int>(kept.size());
        const BlockScore s = score(lab, k);
        const double gk = s.g / k;
        est.score_trace.push_back(gk);
        if (!(gk > est.score)) break;
        est.labels = std::move(lab);
        est.medoids = std::move(kept);
        est.score = gk;
    }
    return est;
}

}  // namespace

CommunityEstimate sce_with_distances(const Matrix& B, const Matrix& D, const SceOptions& opts) {
    check_square(B);
    if (D.rows() != B.rows()) throw ParameterError("distance matrix size mismatch");
    const Matrix Bt = B.transpose();
    const int N = static_cast<int>(B.rows());
    auto score = [&](const std::vector<int>& lab, int k) {
        CommunityAssignment G{lab, k};
        return block_core(Bt.data(), 2, N, G, opts.stabilizer);
    };
    return sce_core(D, score, opts);
}

CommunityEstimate sce_with_distances(const Tensor& B, const Matrix& D, const SceOptions& opts) {
    if (D.rows() != B.dim) throw ParameterError("distance matrix size mismatch");
    auto score = [&](const std::vector<int>& lab, int k) {
        return tensor_block_metrics(B, CommunityAssignment{lab, k}, opts.stabilizer);
    };
    return sce_core(D, score, opts);
}

CommunityEstimate sce(const Matrix& B, const SceOptions& opts) {
    return sce_with_distances(B, distance_matrix(B, opts.mode, opts.exec), opts);
}

CommunityEstimate sce(const Tensor& B, const SceOptions& opts) {
    return sce_with_distances(B, distance_matrix(B, opts.exec), opts);
}

CommunityEstimate prune(const CommunityEstimate& est, const Matrix& D, int K) {
    if (K < 1) throw ParameterError("prune target must be >= 1");
    if (K > est.k()) throw ParameterError("prune target exceeds the current community count");
    const int N = static_cast<int>(est.labels.size());
    if (D.rows() != N || D.cols() != N) throw ParameterError("distance matrix size mismatch");

    std::vector<std::vector<int>> groups(est.k());
    for (int i = 0; i < N; ++i) groups[est.labels[i]].push_back(i);
    std::vector<int> med = est.medoids;
    while (static_cast<int>(groups.size()) > K) {
        const int k = static_cast<int>(groups.size());
        int br = 0, bs = 1;
        double best = std::numeric_limits<double>::infinity();
        for (int r = 0; r < k; ++r) {
            for (int s = r + 1; s < k; ++s) {
                double acc = 0.0;
                for (int i : groups[r])
                    for (int j : groups[s]) acc += D(i, j);
                const double avg = acc / (static_cast<double>(groups[r].size()) * groups[s].size());
                if (avg < best) {
                    best = avg;
                    br = r;
                    bs = s;
                }
            }
        }
        groups[br].insert(groups[br].end(), groups[bs].begin(), groups[bs].end());
        std::sort(groups[br].begin(), groups[br].end());
        groups.erase(groups.begin() + bs);
        med.erase(med.begin() + bs);
    }
    CommunityEstimate out = est;
    out.medoids = med;
    for (int r = 0; r < static_cast<int>(groups.size()); ++r)
        for (int i : groups[r]) out.labels[i] = r;
    return out;
}

std::vector<int> max_weight_matching(const Matrix& W) {
    const int rows = static_cast<int>(W.rows());
    const int cols = static_cast<int>(W.cols());
    const int n = std::max(rows, cols);
    if (n == 0) return {};
    const double top = W.size() ? W.maxCoeff() : 0.0;
    // Square cost matrix; padding entries cost `top`, i.e. weight 0.
    std::vector<std::vector<double>> a(n + 1, std::vector<double>(n + 1, 0.0));
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
            a[i][j] = (i <= rows && j <= cols) ? top - W(i - 1, j - 1) : top;

    // Shortest augmenting paths with potentials, rows 1..n.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = a[i0][j] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> match(rows, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j] >= 1 && p[j] <= rows && j <= cols) match[p[j] - 1] = j - 1;
    return match;
}

double agreement(const std::vector<int>& truth, const std::vector<int>& estimate) {
    if (truth.size() != estimate.size()) throw ParameterError("label vectors differ in length");
    if (truth.empty()) throw ParameterError("agreement of empty labelings");
    auto span = [](const std::vector<int>& l) {
        return *std::max_element(l.begin(), l.end()) + 1;
    };
    std::vector<int> ti, ei;
    const int n = compact_used(truth, span(truth), ti);
    const int k = compact_used(estimate, span(estimate), ei);
    Matrix table = Matrix::Zero(k, n);
    for (std::size_t i = 0; i < truth.size(); ++i) table(ei[estimate[i]], ti[truth[i]]) += 1.0;
    const auto match = max_weight_matching(table);
    double hits = 0.0;
    for (int r = 0; r < k; ++r)
        if (match[r] >= 0) hits += table(r, match[r]);
    return hits / static_cast<double>(truth.size());
}

double agreement(const CommunityAssignment& truth, const std::vector<int>& estimate) {
    return agreement(truth.labels, estimate);
}

namespace {

std::vector<int> canonical_labels(const std::vector<int>& lab) {
    std::vector<int> map;
    std::vector<int> out(lab.size());
    for (std::size_t i = 0; i < lab.size(); ++i) {
        const int l = lab[i];
        if (l >= static_cast<int>(map.size())) map.resize(l + 1, -1);
        if (map[l] < 0) map[l] = *std::max_element(map.begin(), map.end()) + 1;
        out[i] = map[l];
    }
    return out;
}

}  // namespace

std::vector<int> kmeans_cluster(const Matrix& X, int K, std::uint64_t seed,
                                const KMeansOptions& opts) {
    const int N = static_cast<int>(X.rows());
    if (K < 1) throw ParameterError("K must be >= 1");
    if (K > N) throw ParameterError("K exceeds the number of points");
    Rng rng = make_rng(seed, Stream::kmeans);

    for (int attempt = 0; attempt <= opts.restarts; ++attempt) {
        // k-means++ seeding.
        Matrix centers(K, X.cols());
        std::uniform_int_distribution<int> first(0, N - 1);
        centers.row(0) = X.row(first(rng));
        Vector d2(N);
        for (int i = 0; i < N; ++i) d2(i) = (X.row(i) - centers.row(0)).squaredNorm();
        for (int c = 1; c < K; ++c) {
            const double total = d2.sum();
            int pick = 0;
            if (total > 0.0) {
                std::uniform_real_distribution<double> u(0.0, total);
                double x = u(rng), acc = 0.0;
                pick = N - 1;
                for (int i = 0; i < N; ++i) {
                    acc += d2(i);
                    if (x < acc && d2(i) > 0.0) {
                        pick = i;
                        break;
                    }
                }
            } else {
                pick = first(rng);
            }
            centers.row(c) = X.row(pick);
            for (int i = 0; i < N; ++i)
                d2(i) = std::min(d2(i), (X.row(i) - centers.row(c)).squaredNorm());
        }

        std::vector<int> lab(N, -1);
        bool empty = false;
        for (int it = 0; it < opts.max_iterations; ++it) {
            bool changed = false;
            for (int i = 0; i < N; ++i) {
                int best = 0;
                double bd = (X.row(i) - centers.row(0)).squaredNorm();
                for (int c = 1; c < K; ++c) {
                    const double d = (X.row(i) - centers.row(c)).squaredNorm();
                    if (d < bd) {
                        bd = d;
                        best = c;
                    }
                }
                if (lab[i] != best) {
                    lab[i] = best;
                    changed = true;
                }
            }
            Matrix sums = Matrix::Zero(K, X.cols());
            std::vector<int> cnt(K, 0);
            for (int i = 0; i < N; ++i) {
                sums.row(lab[i]) += X.row(i);
                ++cnt[lab[i]];
            }
            empty = std::any_of(cnt.begin(), cnt.end(), [](int c) { return c == 0; });
            if (empty) break;
            for (int c = 0; c < K; ++c) centers.row(c) = sums.row(c) / cnt[c];
            if (!changed) break;
        }
        if (!empty) return canonical_labels(lab);
    }
    throw DegenerateClustering("k-means produced an empty cluster on every restart");
}

std::string to_string(Linkage l) {
    switch (l) {
        case Linkage::single: return "single";
        case Linkage::average: return "average";
        case Linkage::complete: return "complete";
    }
    return "average";
}

Linkage linkage_from_string(const std::string& s) {
    if (s == "single") return Linkage::single;
    if (s == "average") return Linkage::average;
    if (s == "complete") return Linkage::complete;
    throw ParameterError("unknown linkage: " + s);
}

std::vector<int> hierarchical_cluster(const Matrix& D, Linkage linkage, int K) {
    const int N = static_cast<int>(D.rows());
    if (D.cols() != N) throw ParameterError("distance matrix must be square");
    if (K < 1 || K > N) throw ParameterError("K must lie in [1, N]");
    Matrix dist = D;
    std::vector<int> size(N, 1), owner(N);
    std::iota(owner.begin(), owner.end(), 0);
    std::vector<char> active(N, 1);
    int clusters = N;
    while (clusters > K) {
        int bi = -1, bj = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < N; ++i) {
            if (!active[i]) continue;
            for (int j = i + 1; j < N; ++j)
                if (active[j] && dist(i, j) < best) {
                    best = dist(i, j);
                    bi = i;
                    bj = j;
                }
        }
        for (int k = 0; k < N; ++k) {
            if (!active[k] || k == bi || k == bj) continue;
            double v = 0.0;
            switch (linkage) {
                case Linkage::single: v = std::min(dist(bi, k), dist(bj, k)); break;
                case Linkage::complete: v = std::max(dist(bi, k), dist(bj, k)); break;
                case Linkage::average:
                    v = (size[bi] * dist(bi, k) + size[bj] * dist(bj, k)) / (size[bi] + size[bj]);
                    break;
            }
            dist(bi, k) = v;
            dist(k, bi) = v;
        }
        size[bi] += size[bj];
        active[bj] = 0;
        for (int& o : owner)
            if (o == bj) o = bi;
        --clusters;
    }
    return canonical_labels(owner);
}

}  // namespace ksbm
