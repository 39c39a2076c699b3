#pragma once

#include <cstdint>
#include <vector>

#include "frk/error.hpp"

namespace frk {

// Finite graph with directed edges labeled by generator indices (positions in
// the owning group's symmetric set S).  Each vertex has at most one outgoing
// edge per label, and (x -s-> y) is present iff (y -s^{-1}-> x) is.
class LabeledGraph {
 public:
  LabeledGraph() = default;
  LabeledGraph(int n, int degree, std::vector<int> label_inverse)
      : degree_(degree), inv_(std::move(label_inverse)),
        adj_(static_cast<std::size_t>(n) * static_cast<std::size_t>(degree), -1) {}

  int size() const { return degree_ == 0 ? 0 : static_cast<int>(adj_.size()) / degree_; }
  int degree() const { return degree_; }
  int inverse_label(int s) const { return inv_[static_cast<std::size_t>(s)]; }

  int follow(int v, int s) const {
    return adj_[static_cast<std::size_t>(v) * static_cast<std::size_t>(degree_) + static_cast<std::size_t>(s)];
  }

  // Installs x -s-> y together with the paired inverse edge.
  void add_edge(int x, int s, int y) {
    set_half_edge(x, s, y);
    set_half_edge(y, inv_[static_cast<std::size_t>(s)], x);
  }

  std::int64_t directed_edge_count() const {
    std::int64_t n = 0;
    for (int v : adj_)
      if (v >= 0) ++n;
    return n;
  }

 private:
  void set_half_edge(int x, int s, int y) {
    int& slot = adj_[static_cast<std::size_t>(x) * static_cast<std::size_t>(degree_) + static_cast<std::size_t>(s)];
    if (slot != -1 && slot != y) throw InvariantViolation("conflicting labeled edge");
    slot = y;
  }

  int degree_ = 0;
  std::vector<int> inv_;
  std::vector<int> adj_;
};

}  // namespace frk
