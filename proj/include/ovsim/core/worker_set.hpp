#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "ovsim/core/types.hpp"

namespace ovsim {

/// Small sorted set of worker ids. Iteration order is always ascending,
/// which keeps every downstream tie-break deterministic.
class WorkerSet {
 public:
  WorkerSet() = default;
  WorkerSet(std::initializer_list<WorkerId> ids) {
    for (WorkerId w : ids) insert(w);
  }

  bool contains(WorkerId w) const {
    return std::binary_search(ids_.begin(), ids_.end(), w);
  }

  /// Returns true if the id was not already present.
  bool insert(WorkerId w) {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), w);
    if (it != ids_.end() && *it == w) return false;
    ids_.insert(it, w);
    return true;
  }

  bool erase(WorkerId w) {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), w);
    if (it == ids_.end() || *it != w) return false;
    ids_.erase(it);
    return true;
  }

  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  void clear() { ids_.clear(); }

  WorkerId front() const { return ids_.front(); }

  auto begin() const { return ids_.begin(); }
  auto end() const { return ids_.end(); }

  bool operator==(const WorkerSet& o) const { return ids_ == o.ids_; }
  bool operator!=(const WorkerSet& o) const { return ids_ != o.ids_; }

  bool intersects(const WorkerSet& o) const {
    auto a = ids_.begin();
    auto b = o.ids_.begin();
    while (a != ids_.end() && b != o.ids_.end()) {
      if (*a == *b) return true;
      if (*a < *b) ++a; else ++b;
    }
    return false;
  }

  WorkerSet set_union(const WorkerSet& o) const {
    WorkerSet r;
    std::set_union(ids_.begin(), ids_.end(), o.ids_.begin(), o.ids_.end(),
                   std::back_inserter(r.ids_));
    return r;
  }

  WorkerSet set_difference(const WorkerSet& o) const {
    WorkerSet r;
    std::set_difference(ids_.begin(), ids_.end(), o.ids_.begin(), o.ids_.end(),
                        std::back_inserter(r.ids_));
    return r;
  }

  const std::vector<WorkerId>& values() const { return ids_; }

 private:
  std::vector<WorkerId> ids_;
};

}  // namespace ovsim
