#pragma once

#include "ksbm/common.hpp"

#include <Eigen/SparseCore>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ksbm {

// Labels are 0-based: node i belongs to community i / m.
struct CommunityAssignment {
    std::vector<int> labels;
    int count = 0;

    static CommunityAssignment balanced(int n, int m);
    static CommunityAssignment from_labels(std::vector<int> labels);

    int size() const { return static_cast<int>(labels.size()); }
    std::vector<std::vector<int>> members() const;
    bool is_balanced() const;
};

enum class GraphKind { sbm, assortative, hierarchical };

std::string to_string(GraphKind kind);
GraphKind graph_kind_from_string(const std::string& s);

using Adjacency = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct CouplingGraph {
    GraphKind kind = GraphKind::sbm;
    Adjacency adjacency;
    Matrix coupling;
    CommunityAssignment communities;
    // Only set for hierarchical graphs.
    std::optional<CommunityAssignment> coarse;
    int n = 0;
    int m = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> warnings;

    int size() const { return static_cast<int>(coupling.rows()); }
    SparseMatrix sparse_coupling() const;
};

struct HierarchicalSpec {
    int n1 = 9;
    int n2 = 3;
    double r = 0.05;
    int m = 33;

    void validate() const;
    int fine_per_coarse() const { return n1 / n2; }
    // floor(r * m * (n2 - 1)), guarded against representation error.
    int intra_coarse_edges() const;
};

// Bernoulli(P[phi(i), phi(j)]) for every ordered pair i != j, row-major.
// C multiplies present edges; defaults to all ones.
CouplingGraph generate_sbm(int n, int m, const Matrix& P, std::uint64_t seed);
CouplingGraph generate_sbm(int n, int m, const Matrix& P, const Matrix& C,
                           std::uint64_t seed);

CouplingGraph generate_assortative(int n, int m, double kappa, std::uint64_t seed);

CouplingGraph generate_hierarchical(const HierarchicalSpec& spec, double kappa,
                                    std::uint64_t seed);

double assortative_edge_probability(int n, int m);

}  // namespace ksbm
