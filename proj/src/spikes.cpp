#include "ksbm/spikes.hpp"

#include "ksbm/io.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace ksbm {

namespace {

int column(const io::Table& t, const std::string& name, const std::filesystem::path& file) {
    const auto it = std::find(t.header.begin(), t.header.end(), name);
    if (it == t.header.end()) throw DataError(file.string() + " lacks column " + name);
    return static_cast<int>(it - t.header.begin());
}

int bins_in(const Trial& t, double dt) {
    return std::max(1, static_cast<int>(std::ceil((t.end - t.start) / dt - 1e-9)));
}

}  // namespace

void SpikeIngestConfig::validate() const {
    if (!(dt > 0.0) || !(tau > 0.0)) throw ParameterError("dt and tau must be positive");
    if (trials.empty()) throw ParameterError("trial table is empty");
    std::set<int> ids;
    for (const auto& t : trials) {
        if (!(t.end > t.start)) throw ParameterError("trial end must exceed its start");
        if (!ids.insert(t.id).second) throw ParameterError("duplicate trial id");
    }
    if (units) {
        std::set<int> seen(units->begin(), units->end());
        if (seen.size() != units->size()) throw ParameterError("duplicate unit id");
    }
}

SpikeSeries ingest_spikes(const std::vector<Spike>& spikes, const SpikeIngestConfig& cfg) {
    cfg.validate();
    std::vector<Trial> trials = cfg.trials;
    std::sort(trials.begin(), trials.end(), [](const Trial& a, const Trial& b) { return a.id < b.id; });

    SpikeSeries out;
    if (cfg.units) {
        out.units = *cfg.units;
    } else {
        std::set<int> seen;
        for (const auto& s : spikes) seen.insert(s.unit);
        out.units.assign(seen.begin(), seen.end());
    }
    std::map<int, int> unit_col, trial_row;
    for (std::size_t c = 0; c < out.units.size(); ++c) unit_col[out.units[c]] = static_cast<int>(c);
    int total = 0;
    for (std::size_t k = 0; k < trials.size(); ++k) {
        trial_row[trials[k].id] = static_cast<int>(k);
        total += bins_in(trials[k], cfg.dt);
    }
    std::vector<int> offset(trials.size(), 0);
    for (std::size_t k = 1; k < trials.size(); ++k)
        offset[k] = offset[k - 1] + bins_in(trials[k - 1], cfg.dt);

    Matrix counts = Matrix::Zero(total, static_cast<Index>(out.units.size()));
    for (const auto& s : spikes) {
        const auto u = unit_col.find(s.unit);
        if (u == unit_col.end()) throw DataError("spike references unknown unit " + std::to_string(s.unit));
        const auto tr = trial_row.find(s.trial);
        if (tr == trial_row.end())
            throw DataError("spike references unknown trial " + std::to_string(s.trial));
        const Trial& t = trials[tr->second];
        if (s.time < t.start || s.time > t.end)
            throw DataError("spike time outside its trial bounds");
        const int bins = bins_in(t, cfg.dt);
        const int b = std::min(bins - 1, static_cast<int>(std::floor((s.time - t.start) / cfg.dt + 1e-9)));
        counts(offset[tr->second] + b, u->second) += 1.0;
    }

    const double q = std::exp(-cfg.dt / cfg.tau);
    for (std::size_t k = 0; k < trials.size(); ++k) {
        const int begin = offset[k];
        const int end = begin + bins_in(trials[k], cfg.dt);
        for (Index c = 0; c < counts.cols(); ++c) {
            double y = 0.0;
            for (int b = begin; b < end; ++b) {
                y = q * y + (1.0 - q) * counts(b, c);
                counts(b, c) = y;
            }
        }
    }
    out.path.times = Vector::LinSpaced(total, 0.0, cfg.dt * (total - 1));
    out.path.values = std::move(counts);
    return out;
}

std::vector<Spike> read_spikes(const std::filesystem::path& file) {
    const io::Table t = io::read_table(file);
    const int cu = column(t, "unit_id", file);
    const int ct = column(t, "trial_id", file);
    const int cs = column(t, "spike_time_s", file);
    std::vector<Spike> out;
    out.reserve(t.rows.size());
    for (const auto& r : t.rows)
        out.push_back({static_cast<int>(r[cu]), static_cast<int>(r[ct]), r[cs]});
    return out;
}

std::vector<Trial> read_trials(const std::filesystem::path& file) {
    const io::Table t = io::read_table(file);
    const int ci = column(t, "trial_id", file);
    const int cs = column(t, "start_s", file);
    const int ce = column(t, "end_s", file);
    std::vector<Trial> out;
    for (const auto& r : t.rows) out.push_back({static_cast<int>(r[ci]), r[cs], r[ce]});
    return out;
}

}  // namespace ksbm
