#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "ovsim/coord/coordinator.hpp"

namespace ovsim::cli {

/// Streams per-step metrics into frames.csv, per_worker.csv and
/// errors.csv under `dir`, and keeps the records for the end-of-run
/// summary.
class MetricsWriter {
 public:
  explicit MetricsWriter(const std::string& dir);
  ~MetricsWriter();

  void add(const coord::StepRecord& rec);
  void close();

  const std::vector<coord::StepRecord>& records() const { return records_; }

 private:
  std::ofstream frames_;
  std::ofstream per_worker_;
  std::ofstream errors_;
  std::vector<coord::StepRecord> records_;
};

/// max(counts) / median(counts); 1 when the distribution is flat or empty.
double load_ratio(const std::vector<std::size_t>& counts);

}  // namespace ovsim::cli
