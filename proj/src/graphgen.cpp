#include "ksbm/graphgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ksbm {

CommunityAssignment CommunityAssignment::balanced(int n, int m) {
    if (n < 1 || m < 1) throw ParameterError("balanced assignment needs n, m >= 1");
    CommunityAssignment a;
    a.count = n;
    a.labels.resize(static_cast<size_t>(n) * m);
    for (int i = 0; i < n * m; ++i) a.labels[i] = i / m;
    return a;
}

CommunityAssignment CommunityAssignment::from_labels(std::vector<int> labels) {
    CommunityAssignment a;
    int mx = -1;
    for (int l : labels) {
        if (l < 0) throw ParameterError("negative community label");
        mx = std::max(mx, l);
    }
    a.labels = std::move(labels);
    a.count = mx + 1;
    return a;
}

std::vector<std::vector<int>> CommunityAssignment::members() const {
    std::vector<std::vector<int>> out(count);
    for (int i = 0; i < size(); ++i) out[labels[i]].push_back(i);
    return out;
}

bool CommunityAssignment::is_balanced() const {
    auto mem = members();
    if (mem.empty()) return false;
    for (const auto& g : mem)
        if (g.size() != mem.front().size() || g.empty()) return false;
    return true;
}

std::string to_string(GraphKind kind) {
    switch (kind) {
        case GraphKind::sbm: return "sbm";
        case GraphKind::assortative: return "assortative";
        case GraphKind::hierarchical: return "hierarchical";
    }
    return "sbm";
}

GraphKind graph_kind_from_string(const std::string& s) {
    if (s == "sbm") return GraphKind::sbm;
    if (s == "assortative") return GraphKind::assortative;
    if (s == "hierarchical") return GraphKind::hierarchical;
    throw ParameterError("unknown graph kind: " + s);
}

SparseMatrix CouplingGraph::sparse_coupling() const {
    SparseMatrix s = coupling.sparseView();
    s.makeCompressed();
    return s;
}

namespace {

CouplingGraph empty_graph(GraphKind kind, int n, int m, std::uint64_t seed) {
    CouplingGraph g;
    g.kind = kind;
    g.n = n;
    g.m = m;
    g.seed = seed;
    g.communities = CommunityAssignment::balanced(n, m);
    const int N = n * m;
    g.adjacency = Adjacency::Zero(N, N);
    g.coupling = Matrix::Zero(N, N);
    return g;
}

void connect_blocks(CouplingGraph& g) {
    const auto& lab = g.communities.labels;
    for (int i = 0; i < g.size(); ++i)
        for (int j = 0; j < g.size(); ++j)
            if (i != j && lab[i] == lab[j]) g.adjacency(i, j) = 1;
}

void link(CouplingGraph& g, int i, int j) {
    g.adjacency(i, j) = 1;
    g.adjacency(j, i) = 1;
}

void fill_uniform_coupling(CouplingGraph& g, double kappa) {
    const double w = kappa / g.size();
    g.coupling = g.adjacency.cast<double>() * w;
}

}  // namespace

CouplingGraph generate_sbm(int n, int m, const Matrix& P, std::uint64_t seed) {
    return generate_sbm(n, m, P, Matrix::Ones(n, n), seed);
}

CouplingGraph generate_sbm(int n, int m, const Matrix& P, const Matrix& C,
                           std::uint64_t seed) {
    if (n < 1 || m < 1) throw ParameterError("generate_sbm needs n, m >= 1");
    if (P.rows() != n || P.cols() != n || C.rows() != n || C.cols() != n)
        throw ParameterError("P and C must be n x n");
    for (Index r = 0; r < n; ++r)
        for (Index s = 0; s < n; ++s)
            if (!(P(r, s) >= 0.0 && P(r, s) <= 1.0))
                throw ParameterError("edge probabilities must lie in [0, 1]");

    CouplingGraph g = empty_graph(GraphKind::sbm, n, m, seed);
    Rng rng = make_rng(seed, Stream::graph);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto& lab = g.communities.labels;
    const int N = g.size();
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) {
            if (i == j) continue;
            // One draw per ordered pair keeps the stream position independent of P.
            const double x = u(rng);
            if (x < P(lab[i], lab[j])) {
                g.adjacency(i, j) = 1;
                g.coupling(i, j) = C(lab[i], lab[j]);
            }
        }
    }
    return g;
}

CouplingGraph generate_assortative(int n, int m, double kappa, std::uint64_t seed) {
    if (n < 2) throw ParameterError("assortative graph needs at least two communities");
    if (m < 1) throw ParameterError("assortative graph needs m >= 1");
    if (!std::isfinite(kappa)) throw ParameterError("kappa must be finite");

    CouplingGraph g = empty_graph(GraphKind::assortative, n, m, seed);
    connect_blocks(g);
    Rng rng = make_rng(seed, Stream::graph);
    const int N = g.size();
    std::uniform_int_distribution<int> pick(0, N - m - 1);
    for (int i = 0; i < N; ++i) {
        const int start = g.communities.labels[i] * m;
        int j = pick(rng);
        if (j >= start) j += m;
        link(g, i, j);
    }
    fill_uniform_coupling(g, kappa);
    return g;
}

void HierarchicalSpec::validate() const {
    if (n1 < 1 || n2 < 1 || m < 1) throw ParameterError("hierarchical graph needs n1, n2, m >= 1");
    if (n1 % n2 != 0) throw ParameterError("n2 must divide n1");
    if (n2 < 2) throw ParameterError("hierarchical graph needs at least two coarse communities");
    if (!(r > 0.0 && r <= 1.0)) throw ParameterError("r must lie in (0, 1]");
}

int HierarchicalSpec::intra_coarse_edges() const {
    return static_cast<int>(std::floor(r * m * (n2 - 1) + 1e-9));
}

CouplingGraph generate_hierarchical(const HierarchicalSpec& spec, double kappa,
                                    std::uint64_t seed) {
    spec.validate();
    if (!std::isfinite(kappa)) throw ParameterError("kappa must be finite");

    CouplingGraph g = empty_graph(GraphKind::hierarchical, spec.n1, spec.m, seed);
    connect_blocks(g);
    const int N = g.size();
    const int per = spec.fine_per_coarse();
    const int coarse_size = per * spec.m;
    std::vector<int> coarse(N);
    for (int i = 0; i < N; ++i) coarse[i] = g.communities.labels[i] / per;
    g.coarse = CommunityAssignment::from_labels(coarse);

    const int extra = spec.intra_coarse_edges();
    const int pool = coarse_size - spec.m;
    if (extra < 1)
        g.warnings.push_back("r*m*(n2-1) < 1: no intra-coarse edges are added");
    if (extra > pool)
        throw ParameterError("more intra-coarse edges requested than candidate nodes");

    Rng rng = make_rng(seed, Stream::graph);
    std::vector<int> candidates(pool);
    std::uniform_int_distribution<int> outside(0, N - coarse_size - 1);
    for (int i = 0; i < N; ++i) {
        const int q = coarse[i];
        const int fine_start = g.communities.labels[i] * spec.m;
        // Other fine communities of the same coarse community, ascending.
        int c = 0;
        for (int j = q * coarse_size; j < (q + 1) * coarse_size; ++j)
            if (j < fine_start || j >= fine_start + spec.m) candidates[c++] = j;
        // Partial Fisher-Yates: the first `extra` slots are a uniform sample
        // without replacement.
        for (int k = 0; k < extra; ++k) {
            std::uniform_int_distribution<int> d(k, pool - 1);
            std::swap(candidates[k], candidates[d(rng)]);
            link(g, i, candidates[k]);
        }
        int j = outside(rng);
        if (j >= q * coarse_size) j += coarse_size;
        link(g, i, j);
    }
    fill_uniform_coupling(g, kappa);
    return g;
}

double assortative_edge_probability(int n, int m) {
    if (n < 2) throw ParameterError("assortative edge probability needs n >= 2");
    if (m < 1) throw ParameterError("assortative edge probability needs m >= 1");
    const double a = static_cast<double>(m) * (n - 1);
    return 2.0 / a - 1.0 / (a * a);
}

}  // namespace ksbm
