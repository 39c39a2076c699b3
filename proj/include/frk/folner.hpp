#pragma once

#include <gmpxx.h>

#include <vector>

#include "frk/graph.hpp"
#include "frk/groups.hpp"

namespace frk {

// Deduplicated finite set of group elements in canonical (sorted normal form)
// order.  Vertex ids of derived graphs are positions in this order.
class FiniteSubset {
 public:
  FiniteSubset() = default;
  FiniteSubset(MarkedGroup g, std::vector<GroupElement> elems);

  const MarkedGroup& owner() const { return g_; }
  int size() const { return static_cast<int>(elems_.size()); }
  bool empty() const { return elems_.empty(); }
  const GroupElement& at(int i) const { return elems_[static_cast<std::size_t>(i)]; }
  const std::vector<GroupElement>& elements() const { return elems_; }

  bool contains(const GroupElement& x) const { return index_of(x) >= 0; }
  // Position in canonical order, or -1.
  int index_of(const GroupElement& x) const;

  FiniteSubset translated(const GroupElement& g) const;  // right translate F*g

  friend bool operator==(const FiniteSubset& a, const FiniteSubset& b) {
    return a.elems_ == b.elems_;
  }

 private:
  MarkedGroup g_;
  std::vector<GroupElement> elems_;
};

// The r-ball around the identity in Cay(G,S), by labeled BFS.
FiniteSubset ball(const MarkedGroup& g, int r);

// Subgraph induced on F: vertex i = F.at(i), s-edge i -> j iff F.at(i)*s = F.at(j).
LabeledGraph induced_labeled_graph(const MarkedGroup& g, const FiniteSubset& f);

// ∂_r F = { x in F : d(x, complement of F) <= r }.  ∂F := ∂_1 F.
FiniteSubset boundary(const FiniteSubset& f, int r);

// i(F) = |∂F| / |F| as an exact rational.
mpq_class isoperimetric(const FiniteSubset& f);

struct FolnerSet {
  FiniteSubset set;
  // Set when the group is finite and the whole group was returned.
  bool whole_group = false;
};

// Canonical n-th Folner set: the box [0,n)^d for Z^d, box times the full
// finite part for products, and { (a,b,c) : 0 <= a,b < n, 0 <= c < n^2 } for
// Heisenberg.  The c-range n^2 is what makes i(F_n) -> 0; boxes with c-range n
// do not form a Folner sequence (checked numerically in the tests).
FolnerSet folner_set(const MarkedGroup& g, int n);

}  // namespace frk
