#pragma once

#include <string>
#include <vector>

#include "ovsim/core/scene.hpp"
#include "ovsim/core/types.hpp"

namespace ovsim::graph {

/// Undirected constraint graph: vertices are the non-static bodies of the
/// scene, edges are constraints. Joint edges persist for the whole run;
/// contact edges are replaced wholesale on every update.
///
/// Owned and mutated by the coordinator thread only.
class ConstraintGraph {
 public:
  ConstraintGraph() = default;
  explicit ConstraintGraph(const Scene& scene);

  static constexpr int kUnreachable = -1;

  bool contains_vertex(BodyId b) const {
    return b < is_vertex_.size() && is_vertex_[b];
  }

  /// Replaces all contact edges with edges derived from `contacts`.
  /// Contacts touching a static body contribute no edge. Throws on
  /// contacts referencing unknown body ids.
  void update_contacts(const std::vector<Contact>& contacts);

  /// Neighbors of b, ascending, deduplicated across joint and contact
  /// edges. Throws on unknown vertex.
  const std::vector<BodyId>& neighbors(BodyId b) const;

  /// All vertices with geodesic distance in [1, depth] from root,
  /// ascending. depth 0 yields the empty set; root itself is excluded.
  std::vector<BodyId> bfs_vertices(BodyId root, int depth) const;

  /// Shortest path length in edges, or kUnreachable.
  int geodesic(BodyId a, BodyId b) const;

  std::size_t vertex_count() const { return vertices_.size(); }
  const std::vector<BodyId>& vertices() const { return vertices_; }

  /// Full adjacency table indexed by BodyId (empty rows for statics).
  /// Snapshot this before update_contacts to diff the local structure.
  const std::vector<std::vector<BodyId>>& adjacency() const { return adj_; }

  std::size_t edge_count() const;

  /// Line-oriented adjacency dump ("bodyId: n1 n2 ...") for test diffing.
  std::string dump() const;

 private:
  void check_vertex(BodyId b, const char* op) const;

  std::vector<BodyId> vertices_;       // ascending
  std::vector<char> is_vertex_;        // indexed by BodyId
  std::vector<std::vector<BodyId>> joint_adj_;
  std::vector<std::vector<BodyId>> adj_;  // joints + current contacts
};

/// Spec operation form of ConstraintGraph::update_contacts.
inline void update_constraint_graph(ConstraintGraph& g,
                                    const std::vector<Contact>& contacts) {
  g.update_contacts(contacts);
}

}  // namespace ovsim::graph
