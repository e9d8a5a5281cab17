#include "ovsim/coord/trajectory.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>

namespace ovsim::coord {
namespace {

void put_u32(std::vector<std::uint8_t>& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
}

void put_f64(std::vector<std::uint8_t>& buf, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) {
    buf.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
}

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

double get_f64(const std::uint8_t* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) {
    bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  }
  return std::bit_cast<double>(bits);
}

}  // namespace

TrajectoryWriter::TrajectoryWriter(const std::string& bin_path,
                                   const std::string& meta_path,
                                   std::vector<BodyId> body_ids)
    : meta_path_(meta_path), body_ids_(std::move(body_ids)) {
  file_ = std::fopen(bin_path.c_str(), "wb");
  if (!file_) {
    throw std::runtime_error("cannot open trajectory file " + bin_path);
  }
}

TrajectoryWriter::~TrajectoryWriter() { close(); }

void TrajectoryWriter::write_frame(std::uint32_t step,
                                   const std::vector<BodyState>& states) {
  std::vector<std::uint8_t> buf;
  buf.reserve(8 + body_ids_.size() * (4 + 13 * 8));
  put_u32(buf, step);
  put_u32(buf, static_cast<std::uint32_t>(body_ids_.size()));
  for (BodyId id : body_ids_) {
    put_u32(buf, id);
    for (double v : states.at(id).to_scalars()) put_f64(buf, v);
  }
  if (std::fwrite(buf.data(), 1, buf.size(), file_) != buf.size()) {
    throw std::runtime_error("trajectory write failed");
  }
  ++frames_;
}

void TrajectoryWriter::close() {
  if (!file_) return;
  std::fclose(file_);
  file_ = nullptr;
  nlohmann::ordered_json meta{
      {"format", "u32 step, u32 count, then per body: u32 id, "
                 "13 little-endian f64 (x y z, qw qx qy qz, vx vy vz, "
                 "wx wy wz)"},
      {"body_ids", body_ids_},
      {"frames", frames_}};
  std::ofstream out(meta_path_);
  if (out) out << meta.dump(2) << "\n";
}

std::vector<TrajectoryFrame> read_trajectory(const std::string& bin_path) {
  std::ifstream in(bin_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open trajectory " + bin_path);
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  std::vector<TrajectoryFrame> frames;
  std::size_t pos = 0;
  const std::size_t body_size = 4 + 13 * 8;
  while (pos + 8 <= data.size()) {
    TrajectoryFrame f;
    f.step = get_u32(data.data() + pos);
    const std::uint32_t count = get_u32(data.data() + pos + 4);
    pos += 8;
    if (pos + count * body_size > data.size()) {
      throw std::runtime_error("truncated trajectory frame");
    }
    f.states.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      const BodyId id = get_u32(data.data() + pos);
      pos += 4;
      std::array<double, 13> s;
      for (double& v : s) {
        v = get_f64(data.data() + pos);
        pos += 8;
      }
      f.states.emplace_back(id, BodyState::from_scalars(s));
    }
    frames.push_back(std::move(f));
  }
  if (pos != data.size()) throw std::runtime_error("trailing trajectory bytes");
  return frames;
}

}  // namespace ovsim::coord
