#include "frk/embed.hpp"

#include <algorithm>

namespace frk {

std::vector<std::vector<int>> geodesic_words(const MarkedGroup& g,
                                             const std::vector<GroupElement>& targets) {
  std::map<GroupElement, std::pair<GroupElement, int>> parent;
  std::set<GroupElement> seen{g.identity()};
  std::vector<GroupElement> frontier{g.identity()};
  auto remaining = [&]() {
    std::size_t n = 0;
    for (const auto& t : targets)
      if (!seen.count(t)) ++n;
    return n;
  };
  while (remaining() > 0) {
    if (frontier.empty()) throw InvariantViolation("geodesic search exhausted the group");
    std::vector<GroupElement> next;
    for (const auto& x : frontier) {
      for (int s = 0; s < g.degree(); ++s) {
        auto y = g.mul(x, g.generators()[static_cast<std::size_t>(s)].element);
        if (seen.insert(y).second) {
          parent.emplace(y, std::make_pair(x, s));
          next.push_back(y);
        }
      }
    }
    frontier = std::move(next);
  }
  std::vector<std::vector<int>> words;
  for (const auto& t : targets) {
    std::vector<int> word;
    GroupElement cur = t;
    while (!(cur == g.identity())) {
      const auto& [prev, s] = parent.at(cur);
      word.push_back(s);
      cur = prev;
    }
    std::reverse(word.begin(), word.end());
    words.push_back(std::move(word));
  }
  return words;
}

std::vector<char> compute_good_set(const MarkedGroup& g, const LabeledGraph& host, int r) {
  auto cay = ball(g, r);
  int m = cay.size();
  int root = cay.index_of(g.identity());

  // Cayley-ball adjacency in generator-index space; -1 = leaves the ball.
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(m),
                                    std::vector<int>(static_cast<std::size_t>(g.degree()), -1));
  for (int u = 0; u < m; ++u)
    for (int s = 0; s < g.degree(); ++s)
      adj[static_cast<std::size_t>(u)][static_cast<std::size_t>(s)] =
          cay.index_of(g.mul(cay.at(u), g.generators()[static_cast<std::size_t>(s)].element));

  // BFS tree over the ball.
  std::vector<std::array<int, 3>> tree;  // (child, parent, label)
  {
    std::vector<char> seen(static_cast<std::size_t>(m), 0);
    seen[static_cast<std::size_t>(root)] = 1;
    std::vector<int> queue{root};
    for (std::size_t head = 0; head < queue.size(); ++head) {
      int u = queue[head];
      for (int s = 0; s < g.degree(); ++s) {
        int w = adj[static_cast<std::size_t>(u)][static_cast<std::size_t>(s)];
        if (w >= 0 && !seen[static_cast<std::size_t>(w)]) {
          seen[static_cast<std::size_t>(w)] = 1;
          tree.push_back({w, u, s});
          queue.push_back(w);
        }
      }
    }
  }

  int n = host.size();
  std::vector<char> good(static_cast<std::size_t>(n), 0);
  std::vector<int> pos(static_cast<std::size_t>(m), -1);
  std::vector<int> stamp(static_cast<std::size_t>(n), -1);
  for (int x = 0; x < n; ++x) {
    pos[static_cast<std::size_t>(root)] = x;
    bool ok = true;
    for (const auto& [child, par, s] : tree) {
      int v = host.follow(pos[static_cast<std::size_t>(par)], s);
      if (v < 0) {
        ok = false;
        break;
      }
      pos[static_cast<std::size_t>(child)] = v;
    }
    if (ok) {
      // Injectivity via stamps.
      for (int u = 0; u < m && ok; ++u) {
        int v = pos[static_cast<std::size_t>(u)];
        if (stamp[static_cast<std::size_t>(v)] == x) ok = false;
        stamp[static_cast<std::size_t>(v)] = x;
      }
    }
    if (ok) {
      // Edge sets must match in both directions.
      for (int u = 0; u < m && ok; ++u) {
        for (int s = 0; s < g.degree() && ok; ++s) {
          int host_target = host.follow(pos[static_cast<std::size_t>(u)], s);
          int cay_target = adj[static_cast<std::size_t>(u)][static_cast<std::size_t>(s)];
          if (cay_target >= 0) {
            if (host_target != pos[static_cast<std::size_t>(cay_target)]) ok = false;
          } else if (host_target >= 0 && stamp[static_cast<std::size_t>(host_target)] == x) {
            ok = false;  // extra edge back into the ball image
          }
        }
      }
    }
    good[static_cast<std::size_t>(x)] = ok ? 1 : 0;
  }
  return good;
}

namespace {

SoficGraph finish_sofic(MarkedGroup g, HostGraph graph, int r) {
  SoficGraph out;
  out.group = std::move(g);
  out.graph = std::move(graph);
  out.good.emplace(r, compute_good_set(out.group, *out.graph, r));
  if (r != 0) out.good.emplace(0, compute_good_set(out.group, *out.graph, 0));
  return out;
}

}  // namespace

SoficGraph sofic_from_quotient(const MarkedGroup& g, const std::vector<std::int64_t>& moduli, int r) {
  auto [q, pi] = quotient(g, moduli);
  FiniteSubset verts(q, q.enumerate());
  std::vector<int> inv(static_cast<std::size_t>(g.degree()));
  for (int s = 0; s < g.degree(); ++s) inv[static_cast<std::size_t>(s)] = g.inverse_generator(s);
  auto graph = std::make_shared<LabeledGraph>(verts.size(), g.degree(), std::move(inv));
  for (int v = 0; v < verts.size(); ++v)
    for (int s = 0; s < g.degree(); ++s) {
      auto image = pi(g.generators()[static_cast<std::size_t>(s)].element);
      graph->add_edge(v, s, verts.index_of(q.mul(verts.at(v), image)));
    }
  return finish_sofic(g, std::move(graph), r);
}

SoficGraph sofic_from_folner(const MarkedGroup& g, int n, int r) {
  auto fol = folner_set(g, n);
  auto graph = std::make_shared<LabeledGraph>(induced_labeled_graph(g, fol.set));
  return finish_sofic(g, std::move(graph), r);
}

std::vector<char> graph_boundary_mask(const LabeledGraph& host, const std::vector<char>& in_set, int r) {
  int n = host.size();
  std::vector<int> dist(static_cast<std::size_t>(n), -1);
  std::vector<int> frontier;
  for (int v = 0; v < n; ++v) {
    if (!in_set[static_cast<std::size_t>(v)]) continue;
    for (int s = 0; s < host.degree(); ++s) {
      int w = host.follow(v, s);
      if (w >= 0 && !in_set[static_cast<std::size_t>(w)]) {
        dist[static_cast<std::size_t>(v)] = 1;
        frontier.push_back(v);
        break;
      }
    }
  }
  for (int level = 1; level < r && !frontier.empty(); ++level) {
    std::vector<int> next;
    for (int v : frontier) {
      for (int s = 0; s < host.degree(); ++s) {
        int w = host.follow(v, s);
        if (w >= 0 && in_set[static_cast<std::size_t>(w)] && dist[static_cast<std::size_t>(w)] < 0) {
          dist[static_cast<std::size_t>(w)] = level + 1;
          next.push_back(w);
        }
      }
    }
    frontier = std::move(next);
  }
  std::vector<char> mask(static_cast<std::size_t>(n), 0);
  for (int v = 0; v < n; ++v)
    if (dist[static_cast<std::size_t>(v)] >= 0) mask[static_cast<std::size_t>(v)] = 1;
  return mask;
}

TauTiling tau_tiling(const BratteliTilingSystem& system, const SoficGraph& sofic,
                     const QuasitileOptions& opts, int level) {
  int top_level = system.depth() - 1;
  if (level < 0 || level > top_level) throw PreconditionError("tau level outside the system");

  std::vector<TileShape> top_shapes;
  const auto& all = system.level_shapes[static_cast<std::size_t>(top_level)];
  for (std::size_t v = 0; v + 1 < all.size(); ++v) top_shapes.push_back(all[v]);

  TauTiling out;
  out.sofic = sofic;
  out.level = level;
  out.top = quasitile(system.group, sofic.graph, top_shapes, opts);
  out.j_sets = check_epsilon_disjoint(out.top.placements, opts.epsilon).shrunk;
  out.q_counts.assign(system.level_shapes[static_cast<std::size_t>(level)].size(), 0);

  int n = sofic.graph->size();
  std::vector<char> in_j(static_cast<std::size_t>(n), 0);
  for (std::size_t alpha = 0; alpha < out.top.placements.size(); ++alpha) {
    const Placement& p = out.top.placements[alpha];
    std::fill(in_j.begin(), in_j.end(), 0);
    for (int v : out.j_sets[alpha]) in_j[static_cast<std::size_t>(v)] = 1;
    for (auto refined : refine_to_level(system, top_level, p.shape_id, level)) {
      bool inside = true;
      for (auto& idx : refined.indices) {
        idx = p.covered[static_cast<std::size_t>(idx)];
        if (!in_j[static_cast<std::size_t>(idx)]) inside = false;
      }
      if (!inside) continue;  // discarded: overlaps an earlier tile
      out.q_counts[static_cast<std::size_t>(refined.vertex)] +=
          static_cast<long long>(refined.indices.size());
      out.tiles.push_back(std::move(refined));
    }
  }
  return out;
}

}  // namespace frk
