#pragma once

#include "ksbm/signatures.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace ksbm {

struct Spike {
    int unit = 0;
    int trial = 0;
    double time = 0.0;  // s, absolute, inside the trial's [start, end]
};

struct Trial {
    int id = 0;
    double start = 0.0;
    double end = 0.0;
};

struct SpikeIngestConfig {
    double dt = 0.002;
    double tau = 0.040;
    std::vector<Trial> trials;
    // Output columns in this order; when absent, the sorted units seen in the data.
    std::optional<std::vector<int>> units;

    void validate() const;
};

struct SpikeSeries {
    std::vector<int> units;
    Path path;  // one column per unit, trials concatenated by ascending id
};

// Normalized causal weights (1 - q) q^k with q = e^{-dt/tau}; the filter
// restarts at every trial.
SpikeSeries ingest_spikes(const std::vector<Spike>& spikes, const SpikeIngestConfig& cfg);

// Columns unit_id, trial_id, spike_time_s.
std::vector<Spike> read_spikes(const std::filesystem::path& file);
// Columns trial_id, start_s, end_s.
std::vector<Trial> read_trials(const std::filesystem::path& file);

}  // namespace ksbm
