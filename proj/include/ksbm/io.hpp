#pragma once

#include "ksbm/clustering.hpp"
#include "ksbm/dynamics.hpp"
#include "ksbm/graphgen.hpp"
#include "ksbm/signatures.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace ksbm::io {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

// Shortest round-trip decimal form.
std::string format_number(double x);

// Numeric CSV with a header row; rows must share the header's width.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

void write_table(const fs::path& file, const Table& t);
Table read_table(const fs::path& file);

// Headerless N x N values.
void write_matrix(const fs::path& file, const Matrix& M);
Matrix read_matrix(const fs::path& file);

// Columns t, theta_0, ..., theta_{N-1}.
void write_trajectory(const fs::path& file, const Trajectory& traj);
Trajectory read_trajectory(const fs::path& file);
void write_path(const fs::path& file, const Path& p, const std::string& prefix = "x");

// Columns i, j, weight for every present edge; `<stem>.json` records n, m,
// kind, seed and the labels.
void write_graph(const fs::path& csv, const CouplingGraph& g);
CouplingGraph read_graph(const fs::path& csv);

// Columns node, label.
void write_labels(const fs::path& file, const std::vector<int>& labels);
std::vector<int> read_labels(const fs::path& file);

void write_json(const fs::path& file, const Json& j);
Json read_json(const fs::path& file);

fs::path sidecar(const fs::path& file);

}  // namespace ksbm::io
