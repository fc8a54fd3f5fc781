#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace ksbm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParameterError : Error {
    using Error::Error;
};

struct IntegrationDiverged : Error {
    IntegrationDiverged(const std::string& what, double t)
        : Error(what), last_valid_time(t) {}
    double last_valid_time;
};

struct CapacityError : Error {
    using Error::Error;
};

struct NoLockingError : Error {
    using Error::Error;
};

struct DegenerateClustering : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct DataError : Error {
    using Error::Error;
};

using Rng = std::mt19937_64;

// Independent streams derived from one user seed. Changing how one stream
// is consumed never shifts the draws of another.
enum class Stream : std::uint32_t {
    graph = 1,
    frequencies = 2,
    initial_phases = 3,
    brownian = 4,
    kmeans = 5,
};

inline Rng make_rng(std::uint64_t seed, Stream stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), 0x6b73626du};
    return Rng(seq);
}

enum class Execution { serial, parallel };

}  // namespace ksbm
