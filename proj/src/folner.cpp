#include "frk/folner.hpp"

#include <algorithm>
#include <set>

#include "frk/numutil.hpp"

namespace frk {

FiniteSubset::FiniteSubset(MarkedGroup g, std::vector<GroupElement> elems)
    : g_(std::move(g)), elems_(std::move(elems)) {
  std::sort(elems_.begin(), elems_.end());
  elems_.erase(std::unique(elems_.begin(), elems_.end()), elems_.end());
}

int FiniteSubset::index_of(const GroupElement& x) const {
  auto it = std::lower_bound(elems_.begin(), elems_.end(), x);
  if (it == elems_.end() || !(*it == x)) return -1;
  return static_cast<int>(it - elems_.begin());
}

FiniteSubset FiniteSubset::translated(const GroupElement& g) const {
  std::vector<GroupElement> out;
  out.reserve(elems_.size());
  for (const auto& e : elems_) out.push_back(g_.mul(e, g));
  return FiniteSubset(g_, std::move(out));
}

FiniteSubset ball(const MarkedGroup& g, int r) {
  if (r < 0) throw PreconditionError("ball radius must be >= 0");
  std::set<GroupElement> visited{g.identity()};
  std::vector<GroupElement> frontier{g.identity()};
  for (int k = 0; k < r; ++k) {
    std::vector<GroupElement> next;
    for (const auto& x : frontier) {
      for (const auto& gen : g.generators()) {
        GroupElement y = g.mul(x, gen.element);
        if (visited.insert(y).second) next.push_back(std::move(y));
      }
    }
    frontier = std::move(next);
    if (frontier.empty()) break;  // finite group exhausted
  }
  return FiniteSubset(g, std::vector<GroupElement>(visited.begin(), visited.end()));
}

LabeledGraph induced_labeled_graph(const MarkedGroup& g, const FiniteSubset& f) {
  std::vector<int> inv(static_cast<std::size_t>(g.degree()));
  for (int s = 0; s < g.degree(); ++s) inv[static_cast<std::size_t>(s)] = g.inverse_generator(s);
  LabeledGraph graph(f.size(), g.degree(), std::move(inv));
  for (int v = 0; v < f.size(); ++v) {
    for (int s = 0; s < g.degree(); ++s) {
      int w = f.index_of(g.mul(f.at(v), g.generators()[static_cast<std::size_t>(s)].element));
      if (w >= 0) graph.add_edge(v, s, w);
    }
  }
  return graph;
}

FiniteSubset boundary(const FiniteSubset& f, int r) {
  if (r < 1) throw PreconditionError("boundary radius must be >= 1");
  const MarkedGroup& g = f.owner();
  // Multi-source BFS from the (virtual) complement: dist[x] = d(x, F^c).
  std::vector<int> dist(static_cast<std::size_t>(f.size()), -1);
  std::vector<int> frontier;
  for (int v = 0; v < f.size(); ++v) {
    for (const auto& gen : g.generators()) {
      if (!f.contains(g.mul(f.at(v), gen.element))) {
        dist[static_cast<std::size_t>(v)] = 1;
        frontier.push_back(v);
        break;
      }
    }
  }
  for (int level = 1; level < r && !frontier.empty(); ++level) {
    std::vector<int> next;
    for (int v : frontier) {
      for (const auto& gen : g.generators()) {
        int w = f.index_of(g.mul(f.at(v), gen.element));
        if (w >= 0 && dist[static_cast<std::size_t>(w)] < 0) {
          dist[static_cast<std::size_t>(w)] = level + 1;
          next.push_back(w);
        }
      }
    }
    frontier = std::move(next);
  }
  std::vector<GroupElement> out;
  for (int v = 0; v < f.size(); ++v)
    if (dist[static_cast<std::size_t>(v)] >= 0) out.push_back(f.at(v));
  return FiniteSubset(g, std::move(out));
}

mpq_class isoperimetric(const FiniteSubset& f) {
  if (f.empty()) throw PreconditionError("isoperimetric constant of the empty set");
  return make_ratio(boundary(f, 1).size(), f.size());
}

FolnerSet folner_set(const MarkedGroup& g, int n) {
  if (n < 1) throw PreconditionError("Folner index must be >= 1");
  if (g.is_finite()) return {FiniteSubset(g, g.enumerate()), true};

  std::vector<GroupElement> elems;
  if (g.kind() == GroupKind::heisenberg3) {
    std::int64_t nn = n;
    elems.reserve(static_cast<std::size_t>(nn * nn * nn * nn));
    for (std::int64_t a = 0; a < nn; ++a)
      for (std::int64_t b = 0; b < nn; ++b)
        for (std::int64_t c = 0; c < nn * nn; ++c) elems.push_back(g.element(Coords{a, b, c}));
  } else {
    const auto& moduli = g.data()->moduli;
    Coords c(moduli.size(), 0);
    while (true) {
      elems.push_back(g.element(Coords(c)));
      std::size_t i = 0;
      for (; i < c.size(); ++i) {
        std::int64_t limit = moduli[i] == 0 ? n : moduli[i];
        if (++c[i] < limit) break;
        c[i] = 0;
      }
      if (i == c.size()) break;
    }
  }
  return {FiniteSubset(g, std::move(elems)), false};
}

}  // namespace frk
