#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "qadmit/harness.hpp"

namespace qadmit {

/// metrics.csv: header + one row per checkpoint, sorted by (seed, step),
/// floats with 6 significant digits. Byte-identical for identical runs.
std::string metrics_csv(MetricsSeries rows);

/// sweep.csv: per-(lambda, seed) rows followed by one aggregate row per
/// lambda whose `seeds` column joins the seed list with ';'.
std::string sweep_csv(const SweepResult& sweep,
                      const std::vector<std::uint64_t>& seeds);

/// summary.json: final-window metrics and run tallies per seed plus
/// mean/stderr aggregates across seeds.
std::string summary_json(const std::vector<RunSummary>& per_seed);

void write_file(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace qadmit
