#pragma once

#include "ksbm/common.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ksbm {

struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // row-major

    std::uint8_t at(int row, int col) const { return pixels[std::size_t(row) * width + col]; }
};

// Pixel 127 + round(127 v / max|v|); an all-zero matrix maps to 127, so
// p(i, j) + p(j, i) = 254 for antisymmetric input.
GrayImage heatmap(const Matrix& M);
void write_png(const std::filesystem::path& file, const GrayImage& img);
GrayImage read_png(const std::filesystem::path& file);

struct FigureSummary {
    std::vector<std::filesystem::path> files;
    std::vector<std::string> warnings;
};

// Reads a bundle written by write_bundle and emits heatmaps/<matrix>.png,
// variance_curve.csv, phase_traces.csv and scores.csv. Missing pieces are
// skipped with a warning.
FigureSummary emit_figures(const std::filesystem::path& bundle, const std::filesystem::path& out);

}  // namespace ksbm
