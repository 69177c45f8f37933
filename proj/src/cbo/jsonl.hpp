#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ensemble.hpp"
#include "observation.hpp"
#include "optimizer.hpp"

namespace cbo {

// Shortest round-trip decimal form, locale-free.  Parsing it back yields the
// identical bits, which is what keeps rewritten files byte-stable.
std::string format_double(double v);

// Datasets are JSON Lines, one observation per row:
//   {"x":[...],"y":1.5,"censored":false,"cutoff":null}
// cutoff null means "none" (+inf in memory).
void write_observations(std::ostream& os, std::span<const Observation> data);
std::vector<Observation> read_observations(std::istream& is);
void save_observations(const std::string& path, std::span<const Observation> data);
std::vector<Observation> load_observations(const std::string& path);

// Run histories reuse the row shape plus bookkeeping fields:
//   {"x":[...],"y":...,"censored":...,"cutoff":...,"iteration":3,"incumbent":true}
void write_run_history(std::ostream& os, std::span<const RunRecord> history);
std::vector<RunRecord> read_run_history(std::istream& is);
void save_run_history(const std::string& path, std::span<const RunRecord> history);
std::vector<RunRecord> load_run_history(const std::string& path);

// Model snapshots: a one-line JSON header (dims, loss, seeds, normalizer)
// followed by the flat parameter vectors as little-endian binary doubles.
void save_ensemble(const std::string& path, const Ensemble& ens);
Ensemble load_ensemble(const std::string& path);

}  // namespace cbo
