#include "ovsim/cli/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace ovsim::cli {
namespace {

std::ofstream open_csv(const std::string& path, const char* header) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << header << "\n";
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

MetricsWriter::MetricsWriter(const std::string& dir)
    : frames_(open_csv(dir + "/frames.csv", "step,wall_ms,total_contacts")),
      per_worker_(open_csv(dir + "/per_worker.csv",
                           "step,worker,active_bodies,contacts")),
      errors_(open_csv(dir + "/errors.csv",
                       "step,lcp_residual_total,joint_violation_max_rel")) {}

MetricsWriter::~MetricsWriter() { close(); }

void MetricsWriter::add(const coord::StepRecord& rec) {
  char wall[32];
  std::snprintf(wall, sizeof(wall), "%.3f", rec.wall_ms);
  frames_ << rec.step << "," << wall << "," << rec.contact_points << "\n";
  for (std::size_t w = 0; w < rec.worker_active.size(); ++w) {
    per_worker_ << rec.step << "," << w << "," << rec.worker_active[w] << ","
                << rec.worker_contacts[w] << "\n";
  }
  errors_ << rec.step << "," << fmt(rec.residual_total) << ","
          << fmt(rec.joint_violation_max_rel) << "\n";
  records_.push_back(rec);
}

void MetricsWriter::close() {
  if (frames_.is_open()) frames_.close();
  if (per_worker_.is_open()) per_worker_.close();
  if (errors_.is_open()) errors_.close();
}

double load_ratio(const std::vector<std::size_t>& counts) {
  if (counts.empty()) return 1.0;
  std::vector<std::size_t> sorted(counts);
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double median =
      n % 2 == 1 ? static_cast<double>(sorted[n / 2])
                 : 0.5 * static_cast<double>(sorted[n / 2 - 1] +
                                             sorted[n / 2]);
  const auto max = static_cast<double>(sorted.back());
  if (median <= 0.0) return max <= 0.0 ? 1.0 : max;
  return max / median;
}

}  // namespace ovsim::cli
