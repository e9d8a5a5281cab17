#include "ovsim/graph/constraint_graph.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <stdexcept>

namespace ovsim::graph {

ConstraintGraph::ConstraintGraph(const Scene& scene) {
  const std::size_t n = scene.bodies.size();
  is_vertex_.assign(n, 0);
  joint_adj_.assign(n, {});
  for (const RigidBody& b : scene.bodies) {
    if (b.is_static()) continue;
    is_vertex_[b.id] = 1;
    vertices_.push_back(b.id);
  }
  for (const JointSpec& j : scene.joints) {
    if (!contains_vertex(j.body_a) || !contains_vertex(j.body_b))
      continue;  // joints anchored to statics carry no edge
    joint_adj_[j.body_a].push_back(j.body_b);
    joint_adj_[j.body_b].push_back(j.body_a);
  }
  for (auto& nbrs : joint_adj_) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
  }
  adj_ = joint_adj_;
}

void ConstraintGraph::check_vertex(BodyId b, const char* op) const {
  if (!contains_vertex(b))
    throw std::out_of_range(std::string(op) + ": unknown vertex " +
                            std::to_string(b));
}

void ConstraintGraph::update_contacts(const std::vector<Contact>& contacts) {
  for (const Contact& c : contacts) {
    if (c.body_a >= is_vertex_.size() || c.body_b >= is_vertex_.size())
      throw std::out_of_range("update_contacts: contact references unknown body");
  }
  adj_ = joint_adj_;
  for (const Contact& c : contacts) {
    if (!is_vertex_[c.body_a] || !is_vertex_[c.body_b]) continue;
    adj_[c.body_a].push_back(c.body_b);
    adj_[c.body_b].push_back(c.body_a);
  }
  for (auto& nbrs : adj_) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
  }
}

const std::vector<BodyId>& ConstraintGraph::neighbors(BodyId b) const {
  check_vertex(b, "neighbors");
  return adj_[b];
}

std::vector<BodyId> ConstraintGraph::bfs_vertices(BodyId root, int depth) const {
  check_vertex(root, "bfs_vertices");
  std::vector<BodyId> out;
  if (depth <= 0) return out;

  std::vector<int> dist(is_vertex_.size(), kUnreachable);
  dist[root] = 0;
  std::deque<BodyId> frontier{root};
  while (!frontier.empty()) {
    const BodyId v = frontier.front();
    frontier.pop_front();
    if (dist[v] == depth) continue;
    for (BodyId n : adj_[v]) {
      if (dist[n] != kUnreachable) continue;
      dist[n] = dist[v] + 1;
      out.push_back(n);
      frontier.push_back(n);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

int ConstraintGraph::geodesic(BodyId a, BodyId b) const {
  check_vertex(a, "geodesic");
  check_vertex(b, "geodesic");
  if (a == b) return 0;
  std::vector<int> dist(is_vertex_.size(), kUnreachable);
  dist[a] = 0;
  std::deque<BodyId> frontier{a};
  while (!frontier.empty()) {
    const BodyId v = frontier.front();
    frontier.pop_front();
    for (BodyId n : adj_[v]) {
      if (dist[n] != kUnreachable) continue;
      dist[n] = dist[v] + 1;
      if (n == b) return dist[n];
      frontier.push_back(n);
    }
  }
  return kUnreachable;
}

std::size_t ConstraintGraph::edge_count() const {
  std::size_t twice = 0;
  for (const auto& nbrs : adj_) twice += nbrs.size();
  return twice / 2;
}

std::string ConstraintGraph::dump() const {
  std::ostringstream os;
  for (BodyId v : vertices_) {
    os << v << ":";
    for (BodyId n : adj_[v]) os << " " << n;
    os << "\n";
  }
  return os.str();
}

}  // namespace ovsim::graph
