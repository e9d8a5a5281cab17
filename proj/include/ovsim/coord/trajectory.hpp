#pragma once

#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "ovsim/core/types.hpp"

namespace ovsim::coord {

/// Binary trajectory: per frame a u32 step index, u32 body count, then
/// (u32 body id, 13 f64 state scalars) per body, all little-endian. A
/// JSON sidecar lists the body ids and frame count.
class TrajectoryWriter {
 public:
  TrajectoryWriter(const std::string& bin_path, const std::string& meta_path,
                   std::vector<BodyId> body_ids);
  ~TrajectoryWriter();

  /// `states` is indexed by BodyId and must cover all tracked ids.
  void write_frame(std::uint32_t step, const std::vector<BodyState>& states);
  void close();

 private:
  std::string meta_path_;
  std::vector<BodyId> body_ids_;
  std::FILE* file_ = nullptr;
  std::uint32_t frames_ = 0;
};

struct TrajectoryFrame {
  std::uint32_t step = 0;
  std::vector<std::pair<BodyId, BodyState>> states;
};

std::vector<TrajectoryFrame> read_trajectory(const std::string& bin_path);

}  // namespace ovsim::coord
