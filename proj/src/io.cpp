#include "ksbm/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace ksbm::io {

std::string format_number(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const fs::path& file) {
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary);
    if (!out) throw DataError("cannot write " + file.string());
    return out;
}

std::ifstream open_in(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw DataError("cannot read " + file.string());
    return in;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string& s, const fs::path& file) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw DataError("non-numeric cell '" + s + "' in " + file.string());
    return v;
}

void write_row(std::ostream& out, const std::vector<double>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) out << ',';
        out << format_number(row[c]);
    }
    out << '\n';
}

bool blank(const std::string& line) {
    return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

void write_table(const fs::path& file, const Table& t) {
    auto out = open_out(file);
    for (std::size_t c = 0; c < t.header.size(); ++c) out << (c ? "," : "") << t.header[c];
    out << '\n';
    for (const auto& row : t.rows) {
        if (row.size() != t.header.size()) throw DataError("table row width mismatch");
        write_row(out, row);
    }
}

Table read_table(const fs::path& file) {
    auto in = open_in(file);
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty table " + file.string());
    t.header = split_csv(line);
    while (std::getline(in, line)) {
        if (blank(line)) continue;
        const auto cells = split_csv(line);
        if (cells.size() != t.header.size())
            throw DataError("row width mismatch in " + file.string());
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) row.push_back(parse_number(c, file));
        t.rows.push_back(std::move(row));
    }
    return t;
}

void write_matrix(const fs::path& file, const Matrix& M) {
    auto out = open_out(file);
    std::vector<double> row(M.cols());
    for (Index i = 0; i < M.rows(); ++i) {
        for (Index j = 0; j < M.cols(); ++j) row[j] = M(i, j);
        write_row(out, row);
    }
}

Matrix read_matrix(const fs::path& file) {
    auto in = open_in(file);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (blank(line)) continue;
        std::vector<double> row;
        for (const auto& c : split_csv(line)) row.push_back(parse_number(c, file));
        if (!rows.empty() && row.size() != rows.front().size())
            throw DataError("ragged matrix in " + file.string());
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError("empty matrix " + file.string());
    Matrix M(rows.size(), rows.front().size());
    for (Index i = 0; i < M.rows(); ++i)
        for (Index j = 0; j < M.cols(); ++j) M(i, j) = rows[i][j];
    return M;
}

void write_path(const fs::path& file, const Path& p, const std::string& prefix) {
    Table t;
    t.header.push_back("t");
    for (int i = 0; i < p.dim(); ++i) t.header.push_back(prefix + "_" + std::to_string(i));
    t.rows.reserve(p.samples());
    for (int k = 0; k < p.samples(); ++k) {
        std::vector<double> row{p.times(k)};
        for (int i = 0; i < p.dim(); ++i) row.push_back(p.values(k, i));
        t.rows.push_back(std::move(row));
    }
    write_table(file, t);
}

void write_trajectory(const fs::path& file, const Trajectory& traj) {
    write_path(file, Path{traj.times, traj.phases}, "theta");
}

Trajectory read_trajectory(const fs::path& file) {
    const Table t = read_table(file);
    if (t.header.size() < 2 || t.header.front() != "t")
        throw DataError("trajectory needs a leading t column: " + file.string());
    Trajectory traj;
    const Index K = static_cast<Index>(t.rows.size());
    const Index N = static_cast<Index>(t.header.size()) - 1;
    traj.times.resize(K);
    traj.phases.resize(K, N);
    for (Index k = 0; k < K; ++k) {
        traj.times(k) = t.rows[k][0];
        for (Index i = 0; i < N; ++i) traj.phases(k, i) = t.rows[k][i + 1];
    }
    return traj;
}

fs::path sidecar(const fs::path& file) {
    fs::path s = file;
    s.replace_extension(".json");
    return s;
}

void write_graph(const fs::path& csv, const CouplingGraph& g) {
    Table t{{"i", "j", "weight"}, {}};
    for (int i = 0; i < g.size(); ++i)
        for (int j = 0; j < g.size(); ++j)
            if (g.adjacency(i, j)) t.rows.push_back({double(i), double(j), g.coupling(i, j)});
    write_table(csv, t);
    Json meta;
    meta["n"] = g.n;
    meta["m"] = g.m;
    meta["kind"] = to_string(g.kind);
    meta["seed"] = g.seed;
    meta["labels"] = g.communities.labels;
    if (g.coarse) meta["coarse_labels"] = g.coarse->labels;
    write_json(sidecar(csv), meta);
}

CouplingGraph read_graph(const fs::path& csv) {
    const Json meta = read_json(sidecar(csv));
    CouplingGraph g;
    g.kind = graph_kind_from_string(meta.at("kind").get<std::string>());
    g.n = meta.at("n").get<int>();
    g.m = meta.at("m").get<int>();
    g.seed = meta.at("seed").get<std::uint64_t>();
    g.communities = CommunityAssignment::from_labels(meta.at("labels").get<std::vector<int>>());
    if (meta.contains("coarse_labels"))
        g.coarse = CommunityAssignment::from_labels(meta["coarse_labels"].get<std::vector<int>>());
    const int N = g.communities.size();
    g.adjacency = Adjacency::Zero(N, N);
    g.coupling = Matrix::Zero(N, N);
    for (const auto& row : read_table(csv).rows) {
        if (row.size() != 3) throw DataError("edge rows need i, j, weight");
        const int i = static_cast<int>(row[0]);
        const int j = static_cast<int>(row[1]);
        if (i < 0 || j < 0 || i >= N || j >= N || i == j)
            throw DataError("edge endpoint out of range in " + csv.string());
        g.adjacency(i, j) = 1;
        g.coupling(i, j) = row[2];
    }
    return g;
}

void write_labels(const fs::path& file, const std::vector<int>& labels) {
    Table t{{"node", "label"}, {}};
    for (std::size_t i = 0; i < labels.size(); ++i)
        t.rows.push_back({double(i), double(labels[i])});
    write_table(file, t);
}

std::vector<int> read_labels(const fs::path& file) {
    const Table t = read_table(file);
    if (t.header.size() != 2) throw DataError("labels need node, label columns");
    std::vector<int> labels(t.rows.size(), -1);
    for (const auto& row : t.rows) {
        const auto node = static_cast<std::size_t>(row[0]);
        if (row[0] < 0 || node >= labels.size()) throw DataError("label node out of range");
        labels[node] = static_cast<int>(row[1]);
    }
    for (int l : labels)
        if (l < 0) throw DataError("labels must cover every node with a label >= 0");
    return labels;
}

void write_json(const fs::path& file, const Json& j) {
    auto out = open_out(file);
    out << j.dump(2) << '\n';
}

Json read_json(const fs::path& file) {
    auto in = open_in(file);
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("invalid JSON in " + file.string() + ": " + e.what());
    }
}

}  // namespace ksbm::io
