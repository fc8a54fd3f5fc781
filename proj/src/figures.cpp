#include "ksbm/figures.hpp"

#include "ksbm/io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

namespace ksbm {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

std::string quoted_number(const io::Json& j) {
    if (j.is_number()) return io::format_number(j.get<double>());
    if (j.is_string()) return j.get<std::string>();
    return "";
}

}  // namespace

GrayImage heatmap(const Matrix& M) {
    GrayImage img;
    img.height = static_cast<int>(M.rows());
    img.width = static_cast<int>(M.cols());
    img.pixels.assign(std::size_t(img.width) * img.height, 127);
    const double scale = M.size() ? M.cwiseAbs().maxCoeff() : 0.0;
    if (!(scale > 0.0) || !std::isfinite(scale)) return img;
    for (int i = 0; i < img.height; ++i)
        for (int j = 0; j < img.width; ++j)
            img.pixels[std::size_t(i) * img.width + j] =
                static_cast<std::uint8_t>(127 + std::lround(127.0 * M(i, j) / scale));
    return img;
}

void write_png(const std::filesystem::path& file, const GrayImage& img) {
    if (img.width < 1 || img.height < 1) throw DataError("cannot write an empty image");
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    File fp(std::fopen(file.c_str(), "wb"));
    if (!fp) throw DataError("cannot write " + file.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw DataError("libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw DataError("libpng failed writing " + file.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int r = 0; r < img.height; ++r)
        png_write_row(png, const_cast<png_bytep>(img.pixels.data() + std::size_t(r) * img.width));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

GrayImage read_png(const std::filesystem::path& file) {
    File fp(std::fopen(file.c_str(), "rb"));
    if (!fp) throw DataError("cannot read " + file.string());
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw DataError("libpng initialization failed");
    }
    GrayImage img;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("libpng failed reading " + file.string());
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);
    if (png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY || png_get_bit_depth(png, info) != 8) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("expected an 8-bit grayscale PNG: " + file.string());
    }
    img.width = static_cast<int>(png_get_image_width(png, info));
    img.height = static_cast<int>(png_get_image_height(png, info));
    img.pixels.resize(std::size_t(img.width) * img.height);
    for (int r = 0; r < img.height; ++r)
        png_read_row(png, img.pixels.data() + std::size_t(r) * img.width, nullptr);
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

FigureSummary emit_figures(const std::filesystem::path& bundle, const std::filesystem::path& out) {
    namespace fs = std::filesystem;
    FigureSummary sum;
    if (!fs::is_directory(bundle)) {
        sum.warnings.push_back("bundle directory not found: " + bundle.string());
        return sum;
    }

    std::vector<fs::path> matrices;
    if (fs::is_directory(bundle / "matrices"))
        for (const auto& entry : fs::directory_iterator(bundle / "matrices"))
            if (entry.path().extension() == ".csv") matrices.push_back(entry.path());
    std::sort(matrices.begin(), matrices.end());
    for (const auto& m : matrices) {
        const fs::path png = out / "heatmaps" / (m.stem().string() + ".png");
        write_png(png, heatmap(io::read_matrix(m)));
        sum.files.push_back(png);
    }
    if (matrices.empty()) sum.warnings.push_back("no matrices in bundle");

    if (fs::exists(bundle / "variance.csv")) {
        io::Table t = io::read_table(bundle / "variance.csv");
        double m = 0.0;
        if (fs::exists(bundle / "manifest.json"))
            m = io::read_json(bundle / "manifest.json")["config"]["graph"].value("m", 0.0);
        t.header.push_back("threshold");
        for (auto& row : t.rows) row.push_back(m > 0.0 ? 1.0 / (m * m) : 0.0);
        io::write_table(out / "variance_curve.csv", t);
        sum.files.push_back(out / "variance_curve.csv");
    } else {
        sum.warnings.push_back("no variance curve in bundle");
    }

    if (fs::exists(bundle / "community_means.csv")) {
        io::write_table(out / "phase_traces.csv", io::read_table(bundle / "community_means.csv"));
        sum.files.push_back(out / "phase_traces.csv");
    } else {
        sum.warnings.push_back("no community means in bundle");
    }

    if (fs::exists(bundle / "report.json")) {
        const io::Json report = io::read_json(bundle / "report.json");
        fs::create_directories(out);
        std::ofstream s(out / "scores.csv", std::ios::binary);
        s << "regime,statistic,transform,k,agreement,g_truth,g_normalized\n";
        for (const auto& r : report.value("results", io::Json::array()))
            s << r.value("regime", "") << ',' << r.value("statistic", "") << ','
              << r.value("transform", "") << ',' << r.value("k", 0) << ','
              << quoted_number(r["agreement"]) << ',' << quoted_number(r["truth"]["g"]) << ','
              << quoted_number(r["g_normalized"]) << '\n';
        sum.files.push_back(out / "scores.csv");
    } else {
        sum.warnings.push_back("no report in bundle");
    }
    return sum;
}

}  // namespace ksbm
