#include "ovsim/coord/event_log.hpp"

#include <nlohmann/json.hpp>

namespace ovsim::coord {
namespace {

using json = nlohmann::ordered_json;

json worker_set_json(const WorkerSet& ws) {
  json arr = json::array();
  for (WorkerId w : ws) arr.push_back(w);
  return arr;
}

WorkerSet worker_set_from(const json& arr) {
  WorkerSet ws;
  for (const auto& w : arr) ws.insert(w.get<WorkerId>());
  return ws;
}

json bridge_json(const overlap::BridgeEval& e) {
  json neighbors = json::array();
  for (const auto& [body, ws] : e.neighbor_sets) {
    neighbors.push_back(json::array({body, worker_set_json(ws)}));
  }
  return json{{"body", e.body}, {"result", e.result},
              {"neighbors", neighbors}};
}

overlap::BridgeEval bridge_from(const json& j) {
  overlap::BridgeEval e;
  e.body = j.at("body").get<BodyId>();
  e.result = j.at("result").get<bool>();
  for (const auto& n : j.at("neighbors")) {
    e.neighbor_sets.emplace_back(n.at(0).get<BodyId>(),
                                 worker_set_from(n.at(1)));
  }
  return e;
}

json pairs_json(const std::vector<std::pair<BodyId, WorkerId>>& v) {
  json arr = json::array();
  for (const auto& [b, w] : v) arr.push_back(json::array({b, w}));
  return arr;
}

std::vector<std::pair<BodyId, WorkerId>> pairs_from(const json& arr) {
  std::vector<std::pair<BodyId, WorkerId>> v;
  for (const auto& p : arr) {
    v.emplace_back(p.at(0).get<BodyId>(), p.at(1).get<WorkerId>());
  }
  return v;
}

}  // namespace

EventLog::EventLog(const std::string& path) : out_(path) {
  if (!out_) throw std::runtime_error("cannot open event log " + path);
}

EventLog::~EventLog() { close(); }

void EventLog::close() {
  if (out_.is_open()) out_.close();
}

void EventLog::write_init(const InitRecord& rec) {
  json assignment = json::array();
  for (const auto& [body, workers] : rec.assignment) {
    assignment.push_back(json::array({body, workers}));
  }
  json j{{"type", "init"},
         {"num_workers", rec.num_workers},
         {"gamma", rec.gamma},
         {"beta", rec.beta},
         {"metric", rec.metric},
         {"assignment", assignment}};
  out_ << j.dump() << "\n";
}

void EventLog::write_contact(std::uint32_t step,
                             const overlap::ContactDecision& d) {
  json j{{"type", "contact"},
         {"step", step},
         {"a", d.a},
         {"b", d.b},
         {"wa", worker_set_json(d.wa_before)},
         {"wb", worker_set_json(d.wb_before)},
         {"la", d.load_a},
         {"lb", d.load_b},
         {"branch", static_cast<int>(d.branch)}};
  j["bridge_a"] = d.bridge_a ? bridge_json(*d.bridge_a) : json(nullptr);
  j["bridge_b"] = d.bridge_b ? bridge_json(*d.bridge_b) : json(nullptr);
  j["grow"] = d.grow_sequence;
  j["act"] = pairs_json(d.activations);
  j["deact"] = pairs_json(d.deactivations);
  out_ << j.dump() << "\n";
}

EventLogData read_event_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open event log " + path);
  EventLogData data;
  std::string line;
  bool saw_init = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    const std::string type = j.at("type").get<std::string>();
    if (type == "init") {
      data.init.num_workers = j.at("num_workers").get<int>();
      data.init.gamma = j.at("gamma").get<int>();
      data.init.beta = j.at("beta").get<int>();
      data.init.metric = j.at("metric").get<std::string>();
      for (const auto& e : j.at("assignment")) {
        data.init.assignment.emplace_back(
            e.at(0).get<BodyId>(),
            e.at(1).get<std::vector<WorkerId>>());
      }
      saw_init = true;
    } else if (type == "contact") {
      ContactRecord rec;
      rec.step = j.at("step").get<std::uint32_t>();
      overlap::ContactDecision& d = rec.decision;
      d.a = j.at("a").get<BodyId>();
      d.b = j.at("b").get<BodyId>();
      d.wa_before = worker_set_from(j.at("wa"));
      d.wb_before = worker_set_from(j.at("wb"));
      d.load_a = j.at("la").get<double>();
      d.load_b = j.at("lb").get<double>();
      d.branch = static_cast<overlap::BalanceBranch>(j.at("branch").get<int>());
      if (!j.at("bridge_a").is_null()) d.bridge_a = bridge_from(j["bridge_a"]);
      if (!j.at("bridge_b").is_null()) d.bridge_b = bridge_from(j["bridge_b"]);
      d.grow_sequence = j.at("grow").get<std::vector<BodyId>>();
      d.activations = pairs_from(j.at("act"));
      d.deactivations = pairs_from(j.at("deact"));
      data.contacts.push_back(std::move(rec));
    } else {
      throw std::runtime_error("unknown event record type: " + type);
    }
  }
  if (!saw_init) throw std::runtime_error("event log has no init record");
  return data;
}

InitRecord assignment_record(const WorkerAssignment& assignment,
                             const Scene& scene, int gamma, int beta,
                             const std::string& metric) {
  InitRecord rec;
  rec.num_workers = assignment.num_workers();
  rec.gamma = gamma;
  rec.beta = beta;
  rec.metric = metric;
  for (BodyId b : scene.dynamic_ids()) {
    rec.assignment.emplace_back(b, assignment.workers_of(b).values());
  }
  return rec;
}

}  // namespace ovsim::coord
