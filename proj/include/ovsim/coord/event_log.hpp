#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "ovsim/core/assignment.hpp"
#include "ovsim/overlap/overlap.hpp"

namespace ovsim::coord {

struct InitRecord {
  int num_workers = 0;
  int gamma = 0;
  int beta = 0;
  std::string metric;
  // body -> worker set, dynamic bodies only, ascending
  std::vector<std::pair<BodyId, std::vector<WorkerId>>> assignment;
};

struct ContactRecord {
  std::uint32_t step = 0;
  overlap::ContactDecision decision;
};

/// Line-oriented JSON event log. One init record, then one record per
/// new-contact decision, carrying enough context to replay every branch
/// choice and mutation against an independent assignment copy.
class EventLog {
 public:
  explicit EventLog(const std::string& path);
  ~EventLog();

  void write_init(const InitRecord& rec);
  void write_contact(std::uint32_t step,
                     const overlap::ContactDecision& decision);
  void close();

 private:
  std::ofstream out_;
};

struct EventLogData {
  InitRecord init;
  std::vector<ContactRecord> contacts;
};

EventLogData read_event_log(const std::string& path);

InitRecord assignment_record(const WorkerAssignment& assignment,
                             const Scene& scene, int gamma, int beta,
                             const std::string& metric);

}  // namespace ovsim::coord
