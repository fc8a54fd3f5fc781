#pragma once

#include "ksbm/common.hpp"
#include "ksbm/graphgen.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ksbm {

// Dense order-M tensor over [dim]^M, last index fastest.
struct Tensor {
    int order = 2;
    int dim = 0;
    std::vector<double> data;

    static Tensor from_matrix(const Matrix& B);
    static Tensor zeros(int order, int dim, std::size_t capacity = std::size_t{1} << 26);
    double& operator[](const std::vector<int>& I);
    double operator[](const std::vector<int>& I) const;
    std::size_t flat(const std::vector<int>& I) const;
};

struct BlockScore {
    double h = 0.0;
    double d = 0.0;
    double g = 0.0;
    int n_used = 0;
    bool infinite = false;  // h == 0, d > 0, stabilizer == 0
};

// Empty communities are ignored; n counts nonempty ones.
double homogeneity(const Matrix& B, const CommunityAssignment& G);
double discriminativity(const Matrix& B, const CommunityAssignment& G);
BlockScore block_clustering(const Matrix& B, const CommunityAssignment& G,
                            double stabilizer = 0.0);
BlockScore tensor_block_metrics(const Tensor& B, const CommunityAssignment& G,
                                double stabilizer = 0.0);

enum class VectorMode { row_and_column, column };

std::string to_string(VectorMode m);
VectorMode vector_mode_from_string(const std::string& s);

// Row i of the result is v_i. For tensors, v_i concatenates the slices with
// i fixed at positions 1..M.
Matrix representative_vectors(const Matrix& B, VectorMode mode = VectorMode::row_and_column);
Matrix representative_vectors(const Tensor& B);
Matrix distance_matrix(const Matrix& B, VectorMode mode = VectorMode::row_and_column,
                       Execution exec = Execution::parallel);
Matrix distance_matrix(const Tensor& B, Execution exec = Execution::parallel);

struct CommunityEstimate {
    std::vector<int> labels;
    std::vector<int> medoids;  // medoids[r] carries label r
    double score = 0.0;        // g / k of the returned assignment
    std::vector<double> score_trace;  // accepted scores, then the rejected one

    int k() const { return static_cast<int>(medoids.size()); }
    CommunityAssignment assignment() const { return CommunityAssignment::from_labels(labels); }
};

struct SceOptions {
    VectorMode mode = VectorMode::row_and_column;
    double stabilizer = 0.0;
    int max_communities = 0;  // 0 means N
    Execution exec = Execution::parallel;
};

CommunityEstimate sce(const Matrix& B, const SceOptions& opts = {});
CommunityEstimate sce(const Tensor& B, const SceOptions& opts = {});
// Both take a precomputed distance matrix.
CommunityEstimate sce_with_distances(const Matrix& B, const Matrix& D, const SceOptions& opts);
CommunityEstimate sce_with_distances(const Tensor& B, const Matrix& D, const SceOptions& opts);

// Merges the pair with the smallest mean inter-community distance until K
// remain. The merged community keeps the lower label and its medoid; labels
// are then compacted. score is left as computed by sce.
CommunityEstimate prune(const CommunityEstimate& est, const Matrix& D, int K);

// Best one-to-one matching of estimated to true labels, as a fraction of N.
double agreement(const std::vector<int>& truth, const std::vector<int>& estimate);
double agreement(const CommunityAssignment& truth, const std::vector<int>& estimate);

// Maximum-weight assignment on a rectangular matrix; result[r] is the column
// matched to row r or -1.
std::vector<int> max_weight_matching(const Matrix& W);

struct KMeansOptions {
    int max_iterations = 300;
    int restarts = 10;
};

std::vector<int> kmeans_cluster(const Matrix& vectors, int K, std::uint64_t seed,
                                const KMeansOptions& opts = {});

enum class Linkage { single, average, complete };

std::string to_string(Linkage l);
Linkage linkage_from_string(const std::string& s);

std::vector<int> hierarchical_cluster(const Matrix& D, Linkage linkage, int K);

}  // namespace ksbm
