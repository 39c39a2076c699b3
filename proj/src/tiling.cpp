#include "frk/tiling.hpp"

#include <algorithm>
#include <array>
#include <random>

#include "frk/numutil.hpp"

namespace frk {

namespace {

// Placement program for one shape: a BFS tree to locate the image of every
// shape element from the anchor, plus the full internal edge list for the
// labeled-isomorphism check.
struct ShapeProgram {
  int root = 0;
  std::vector<std::array<int, 3>> bfs;    // (child, parent, label), BFS order
  std::vector<std::array<int, 3>> edges;  // (from, label, to), all internal edges
};

ShapeProgram make_program(const MarkedGroup& g, const TileShape& t) {
  const FiniteSubset& sh = t.shape;
  ShapeProgram prog;
  prog.root = sh.index_of(g.identity());
  if (prog.root < 0) throw PreconditionError("tile shape must contain the identity");

  std::vector<std::vector<std::pair<int, int>>> adj(static_cast<std::size_t>(sh.size()));
  for (int v = 0; v < sh.size(); ++v)
    for (int s = 0; s < g.degree(); ++s) {
      int w = sh.index_of(g.mul(sh.at(v), g.generators()[static_cast<std::size_t>(s)].element));
      if (w >= 0) {
        prog.edges.push_back({v, s, w});
        adj[static_cast<std::size_t>(v)].emplace_back(s, w);
      }
    }

  std::vector<char> seen(static_cast<std::size_t>(sh.size()), 0);
  seen[static_cast<std::size_t>(prog.root)] = 1;
  std::vector<int> queue{prog.root};
  for (std::size_t head = 0; head < queue.size(); ++head) {
    int v = queue[head];
    for (const auto& [s, w] : adj[static_cast<std::size_t>(v)]) {
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = 1;
        prog.bfs.push_back({w, v, s});
        queue.push_back(w);
      }
    }
  }
  if (queue.size() != static_cast<std::size_t>(sh.size()))
    throw PreconditionError("tile shape is not connected in the Cayley graph");
  return prog;
}

// Labeled isomorphic image of the shape anchored at `anchor`, or empty when
// the host does not support one.
bool try_place(const LabeledGraph& host, const ShapeProgram& prog, int shape_size, int anchor,
               std::vector<int>& pos) {
  pos.assign(static_cast<std::size_t>(shape_size), -1);
  pos[static_cast<std::size_t>(prog.root)] = anchor;
  for (const auto& [child, parent, s] : prog.bfs) {
    int v = host.follow(pos[static_cast<std::size_t>(parent)], s);
    if (v < 0) return false;
    pos[static_cast<std::size_t>(child)] = v;
  }
  // Injectivity.
  std::vector<int> sorted = pos;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return false;
  // Every internal edge must be realized.
  for (const auto& [u, s, w] : prog.edges) {
    if (host.follow(pos[static_cast<std::size_t>(u)], s) != pos[static_cast<std::size_t>(w)]) return false;
  }
  return true;
}

}  // namespace

TileShape make_tile_shape(FiniteSubset shape, int id) {
  if (shape.empty()) throw PreconditionError("empty tile shape");
  if (!shape.contains(shape.owner().identity()))
    throw PreconditionError("tile shape must contain the identity");
  return TileShape{std::move(shape), id};
}

CoverCheck check_epsilon_cover(int host_size, const std::vector<Placement>& placements,
                               const mpq_class& eps) {
  std::vector<char> covered(static_cast<std::size_t>(host_size), 0);
  long long n = 0;
  for (const auto& p : placements)
    for (int v : p.covered)
      if (!covered[static_cast<std::size_t>(v)]) {
        covered[static_cast<std::size_t>(v)] = 1;
        ++n;
      }
  CoverCheck out;
  out.ratio = host_size == 0 ? mpq_class(1) : make_ratio(n, host_size);
  out.holds = out.ratio > 1 - eps;
  return out;
}

CoverCheck check_epsilon_cover(const Tiling& t, const mpq_class& eps) {
  return check_epsilon_cover(t.host->size(), t.placements, eps);
}

DisjointCheck check_epsilon_disjoint(const std::vector<Placement>& placements, const mpq_class& eps) {
  DisjointCheck out;
  out.min_ratio = 1;
  int max_vertex = -1;
  for (const auto& p : placements)
    for (int v : p.covered) max_vertex = std::max(max_vertex, v);
  std::vector<char> claimed(static_cast<std::size_t>(max_vertex + 1), 0);
  out.verified = true;
  for (const auto& p : placements) {
    std::vector<int> b;
    for (int v : p.covered)
      if (!claimed[static_cast<std::size_t>(v)]) b.push_back(v);
    for (int v : b) claimed[static_cast<std::size_t>(v)] = 1;
    mpq_class ratio = make_ratio(static_cast<long>(b.size()), static_cast<long>(p.covered.size()));
    out.min_ratio = std::min(out.min_ratio, ratio);
    if (!(ratio > 1 - eps)) out.verified = false;
    out.shrunk.push_back(std::move(b));
  }
  return out;
}

Tiling quasitile(const MarkedGroup& g, HostGraph host, std::vector<TileShape> shapes,
                 const QuasitileOptions& opts) {
  if (!(opts.epsilon > 0) || !(opts.epsilon < 1)) throw PreconditionError("epsilon must be in (0,1)");
  std::sort(shapes.begin(), shapes.end(), [](const TileShape& a, const TileShape& b) {
    return a.size() != b.size() ? a.size() > b.size() : a.id < b.id;
  });

  Tiling out;
  out.host = host;
  out.shapes = shapes;

  const int n = host->size();
  std::vector<char> covered(static_cast<std::size_t>(n), 0);
  std::vector<int> anchors(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) anchors[static_cast<std::size_t>(v)] = v;
  if (opts.shuffle_seed) {
    std::mt19937_64 rng(*opts.shuffle_seed);
    std::shuffle(anchors.begin(), anchors.end(), rng);
  }

  long long covered_count = 0;
  std::vector<int> pos;
  // Two passes per shape: fully fresh tiles first (recovers exact partitions
  // where they exist), then tiles with up to an epsilon fraction of overlap.
  auto run_pass = [&](const TileShape& shape, const ShapeProgram& prog, bool strict_pass) {
    for (int anchor : anchors) {
      if (covered_count == n) break;
      // The anchor carries the identity, so a covered anchor already overlaps.
      if (strict_pass && covered[static_cast<std::size_t>(anchor)]) continue;
      if (!try_place(*host, prog, shape.size(), anchor, pos)) continue;
      long long overlap = 0;
      for (int v : pos) overlap += covered[static_cast<std::size_t>(v)];
      bool fresh = strict_pass ? overlap == 0
                               : mpq_class(static_cast<long>(overlap)) < opts.epsilon * shape.size();
      if (!fresh) continue;
      for (int v : pos) covered[static_cast<std::size_t>(v)] = 1;
      covered_count += shape.size() - overlap;
      out.placements.push_back(Placement{shape.id, anchor, pos});
    }
  };
  for (const auto& shape : shapes) {
    if (covered_count == n) break;
    if (shape.size() > n) continue;
    ShapeProgram prog = make_program(g, shape);
    run_pass(shape, prog, true);
    if (!opts.strict_disjoint) run_pass(shape, prog, false);
  }
  for (int v = 0; v < n; ++v)
    if (!covered[static_cast<std::size_t>(v)]) out.uncovered.push_back(v);
  return out;
}

Tiling quasitile_subset(const MarkedGroup& g, const FiniteSubset& host, std::vector<TileShape> shapes,
                        const QuasitileOptions& opts) {
  auto graph = std::make_shared<LabeledGraph>(induced_labeled_graph(g, host));
  return quasitile(g, std::move(graph), std::move(shapes), opts);
}

// ---------------------------------------------------------------------------
// Bratteli diagrams.

BratteliValidation validate_bratteli(const BratteliDiagram& d, const mpq_class& tol) {
  BratteliValidation out;
  out.size_consistent = true;
  out.out_edges_ok = true;
  for (std::size_t l = 0; l + 1 < d.levels.size(); ++l) {
    const auto& from = d.levels[l];
    const auto& to = d.levels[l + 1];
    const auto& k = d.mult[l];
    for (std::size_t b = 0; b < to.size(); ++b) {
      long long total = 0;
      for (std::size_t a = 0; a < from.size(); ++a) total += from[a].size * k[a][b];
      if (total != to[b].size) out.size_consistent = false;
    }
    for (std::size_t a = 0; a < from.size(); ++a) {
      long long degree = 0;
      for (std::size_t b = 0; b < to.size(); ++b) degree += k[a][b];
      if (degree == 0) out.out_edges_ok = false;
    }
  }

  out.has_weights = !d.weights.empty();
  if (!out.has_weights) return out;

  out.weights_sum_ok = true;
  out.harmonic_residual = 0;
  for (std::size_t l = 0; l < d.weights.size(); ++l) {
    mpq_class sum = 0;
    for (const auto& w : d.weights[l]) sum += w;
    if (sum != 1) out.weights_sum_ok = false;
  }
  for (std::size_t l = 0; l + 1 < d.levels.size(); ++l) {
    for (std::size_t a = 0; a < d.levels[l].size(); ++a) {
      mpq_class expect = 0;
      for (std::size_t b = 0; b < d.levels[l + 1].size(); ++b) {
        expect += make_ratio(d.levels[l][a].size * d.mult[l][a][b], d.levels[l + 1][b].size) *
                  d.weights[l + 1][b];
      }
      out.harmonic_residual = std::max(out.harmonic_residual, mpq_class(abs(d.weights[l][a] - expect)));
    }
  }
  out.harmonic_ok = out.harmonic_residual <= tol;
  return out;
}

// ---------------------------------------------------------------------------
// Bratteli tiling systems.

FolnerDriver canonical_folner_driver(const MarkedGroup& g) {
  return [g](int level, int attempt, const std::optional<FiniteSubset>&) -> FiniteSubset {
    int n = 1 << (level + 1 + attempt);
    // Keep candidates at desk scale; an empty result just burns one retry.
    double estimated = 1;
    if (g.kind() == GroupKind::heisenberg3) {
      estimated = static_cast<double>(n) * n * n * n;
    } else {
      for (auto m : g.data()->moduli) estimated *= m == 0 ? static_cast<double>(n) : static_cast<double>(m);
    }
    if (estimated > 2e6) return FiniteSubset(g, {});
    return folner_set(g, n).set;
  };
}

FolnerDriver explicit_sides_driver(const MarkedGroup& g, const std::vector<int>& sides) {
  return [g, sides](int level, int attempt, const std::optional<FiniteSubset>&) -> FiniteSubset {
    if (attempt > 0 || level >= static_cast<int>(sides.size())) return FiniteSubset(g, {});
    return folner_set(g, sides[static_cast<std::size_t>(level)]).set;
  };
}

namespace {

std::vector<TileShape> nonsingleton_shapes(const BratteliTilingSystem& system, int level) {
  std::vector<TileShape> shapes;
  const auto& all = system.level_shapes[static_cast<std::size_t>(level)];
  for (std::size_t v = 0; v + 1 < all.size(); ++v) shapes.push_back(all[v]);
  return shapes;
}

// Per-level tile counts from the top tiling, pushed down through the
// multiplicity matrices (the iterated refinement counted numerically).
std::vector<std::vector<long long>> level_tile_counts(const BratteliTilingSystem& system,
                                                      const Tiling& top) {
  int depth = system.depth();
  std::vector<std::vector<long long>> tiles(static_cast<std::size_t>(depth));
  for (int l = 0; l < depth; ++l)
    tiles[static_cast<std::size_t>(l)].assign(system.level_shapes[static_cast<std::size_t>(l)].size(), 0);
  auto& top_counts = tiles[static_cast<std::size_t>(depth - 1)];
  for (const auto& p : top.placements) top_counts[static_cast<std::size_t>(p.shape_id)]++;
  top_counts[static_cast<std::size_t>(system.singleton_index(depth - 1))] +=
      static_cast<long long>(top.uncovered.size());
  for (int l = depth - 2; l >= 0; --l) {
    const auto& k = system.diagram.mult[static_cast<std::size_t>(l)];
    for (std::size_t a = 0; a < tiles[static_cast<std::size_t>(l)].size(); ++a)
      for (std::size_t b = 0; b < tiles[static_cast<std::size_t>(l + 1)].size(); ++b)
        tiles[static_cast<std::size_t>(l)][a] += k[a][b] * tiles[static_cast<std::size_t>(l + 1)][b];
  }
  return tiles;
}

// Default calibration hosts: the top shape and box multiples of it.
std::vector<FiniteSubset> default_h_schedule(const MarkedGroup& g, const FiniteSubset& top,
                                             const std::vector<int>& multiples, int size_cap) {
  std::vector<FiniteSubset> hosts{top};
  if (g.is_finite()) return hosts;
  // Box side estimate: the extent of the first free coordinate.
  std::int64_t lo = 0, hi = 0;
  for (const auto& e : top.elements()) {
    lo = std::min(lo, e.coords()[0]);
    hi = std::max(hi, e.coords()[0]);
  }
  int side = static_cast<int>(hi - lo + 1);
  for (int c : multiples) {
    auto h = folner_set(g, c * side).set;
    if (h.size() <= size_cap && h.size() > top.size()) hosts.push_back(std::move(h));
  }
  return hosts;
}

}  // namespace

EmpiricalWeights empirical_harmonic(const BratteliTilingSystem& system,
                                    const std::vector<FiniteSubset>& h_list) {
  if (h_list.empty()) throw PreconditionError("empirical_harmonic needs at least one host");
  for (const auto& h : h_list)
    if (h.empty()) throw PreconditionError("empirical_harmonic host must be nonempty");
  EmpiricalWeights out;
  int depth = system.depth();
  int top = depth - 1;
  for (const auto& h : h_list) {
    QuasitileOptions opts;
    opts.strict_disjoint = true;
    Tiling tiling = quasitile_subset(system.group, h, nonsingleton_shapes(system, top), opts);
    out.tiled_ok.push_back(!tiling.placements.empty() || h.empty());

    auto tiles = level_tile_counts(system, tiling);
    std::vector<std::vector<mpq_class>> weights(static_cast<std::size_t>(depth));
    for (int l = 0; l < depth; ++l) {
      mpq_class sum = 0;
      const auto& shapes = system.level_shapes[static_cast<std::size_t>(l)];
      for (std::size_t v = 0; v < shapes.size(); ++v) {
        mpq_class w = make_ratio(tiles[static_cast<std::size_t>(l)][v] * shapes[v].size(), h.size());
        weights[static_cast<std::size_t>(l)].push_back(w);
        sum += w;
      }
      if (sum != 1) throw InvariantViolation("empirical frequencies at level " + std::to_string(l + 1) +
                                             " do not sum to 1");
    }
    out.sequence.push_back(weights);
    out.top_tilings.push_back(std::move(tiling));
  }
  out.weights = out.sequence.back();
  return out;
}

std::vector<RefinedTile> refine_to_level(const BratteliTilingSystem& system, int level_n, int vertex,
                                         int level_k) {
  if (level_k > level_n) throw PreconditionError("refinement target above the source level");
  const TileShape& shape = system.shape(level_n, vertex);
  if (level_n == level_k) {
    RefinedTile t;
    t.vertex = vertex;
    t.indices.resize(static_cast<std::size_t>(shape.size()));
    for (int i = 0; i < shape.size(); ++i) t.indices[static_cast<std::size_t>(i)] = i;
    return {t};
  }
  std::vector<RefinedTile> out;
  if (vertex == system.singleton_index(level_n)) {
    out.push_back(RefinedTile{system.singleton_index(level_k), {0}});
    return out;
  }
  const Tiling& realization = system.realizations[static_cast<std::size_t>(level_n - 1)][static_cast<std::size_t>(vertex)];
  for (const auto& p : realization.placements) {
    for (auto sub : refine_to_level(system, level_n - 1, p.shape_id, level_k)) {
      for (auto& idx : sub.indices) idx = p.covered[static_cast<std::size_t>(idx)];
      out.push_back(std::move(sub));
    }
  }
  for (int v : realization.uncovered) out.push_back(RefinedTile{system.singleton_index(level_k), {v}});
  return out;
}

std::vector<RefinedTile> host_tiles_at_level(const BratteliTilingSystem& system, const Tiling& top,
                                             int level_k) {
  int top_level = system.depth() - 1;
  std::vector<RefinedTile> out;
  for (const auto& p : top.placements) {
    for (auto sub : refine_to_level(system, top_level, p.shape_id, level_k)) {
      for (auto& idx : sub.indices) idx = p.covered[static_cast<std::size_t>(idx)];
      out.push_back(std::move(sub));
    }
  }
  for (int v : top.uncovered) out.push_back(RefinedTile{system.singleton_index(level_k), {v}});
  return out;
}

BratteliTilingSystem build_bratteli_tiling_system(const MarkedGroup& g, int depth,
                                                  const FolnerDriver& driver,
                                                  const BratteliBuildOptions& opts) {
  if (depth < 1) throw PreconditionError("Bratteli depth must be >= 1");
  BratteliTilingSystem system;
  system.group = g;

  std::optional<FiniteSubset> prev;
  for (int level = 0; level < depth; ++level) {
    mpq_class threshold = pow2_inv(level + 1);
    bool accepted = false;
    std::string failure = "no candidate produced";
    for (int attempt = 0; attempt < opts.retry_budget && !accepted; ++attempt) {
      FiniteSubset cand = driver(level, attempt, prev);
      if (cand.empty()) continue;
      bool stationary_finite = g.is_finite() && prev && cand.size() == prev->size();
      if (prev && cand.size() <= prev->size() && !stationary_finite) {
        failure = "candidate not larger than the previous level";
        continue;
      }
      if (isoperimetric(cand) > threshold) {
        failure = "isoperimetric bound i(F) <= 2^-" + std::to_string(level + 1) + " failed";
        continue;
      }
      Tiling realization;
      if (level > 0) {
        QuasitileOptions qopts;
        qopts.strict_disjoint = true;
        realization = quasitile_subset(g, cand, nonsingleton_shapes(system, level - 1), qopts);
        // Singleton bound K(E_{n-1}, F^n) <= 2^{-(n-1)} |F^n|.
        if (make_ratio(static_cast<long>(realization.uncovered.size()), cand.size()) > pow2_inv(level)) {
          failure = "singleton bound K(E," + std::to_string(level + 1) + ") failed";
          continue;
        }
        // Every lower shape must be used at least once (outgoing-edge rule).
        std::vector<long long> used(system.level_shapes[static_cast<std::size_t>(level - 1)].size(), 0);
        for (const auto& p : realization.placements) used[static_cast<std::size_t>(p.shape_id)]++;
        bool all_used = true;
        for (std::size_t v = 0; v + 1 < used.size(); ++v)
          if (used[v] == 0) all_used = false;
        if (!all_used) {
          failure = "a lower-level shape does not fit the candidate";
          continue;
        }
      }
      // Accept: the non-singleton shape (id 0) plus the singleton E (id 1).
      std::vector<TileShape> shapes;
      shapes.push_back(make_tile_shape(cand, 0));
      shapes.push_back(make_tile_shape(FiniteSubset(g, {g.identity()}), 1));
      system.level_shapes.push_back(std::move(shapes));
      if (level > 0) {
        // Realizations for this level: [shape, singleton E].
        Tiling e_realization;
        e_realization.host = std::make_shared<LabeledGraph>(
            induced_labeled_graph(g, FiniteSubset(g, {g.identity()})));
        e_realization.uncovered = {0};  // one E_{n-1} tile
        system.realizations.push_back({std::move(realization), std::move(e_realization)});
      }
      prev = cand;
      accepted = true;
    }
    if (!accepted)
      throw Error("Bratteli level " + std::to_string(level + 1) + " exhausted its retry budget: " + failure);
  }

  // Assemble the diagram.
  for (int l = 0; l < depth; ++l) {
    std::vector<BratteliVertex> verts;
    const auto& shapes = system.level_shapes[static_cast<std::size_t>(l)];
    for (std::size_t v = 0; v + 1 < shapes.size(); ++v)
      verts.push_back(BratteliVertex{"F" + std::to_string(l + 1) + "_" + std::to_string(v),
                                     shapes[v].size(), false});
    verts.push_back(BratteliVertex{"E" + std::to_string(l + 1), 1, true});
    system.diagram.levels.push_back(std::move(verts));
  }
  for (int l = 0; l + 1 < depth; ++l) {
    std::size_t from = system.level_shapes[static_cast<std::size_t>(l)].size();
    std::size_t to = system.level_shapes[static_cast<std::size_t>(l + 1)].size();
    std::vector<std::vector<long long>> k(from, std::vector<long long>(to, 0));
    for (std::size_t b = 0; b < to; ++b) {
      const Tiling& t = system.realizations[static_cast<std::size_t>(l)][b];
      for (const auto& p : t.placements) k[static_cast<std::size_t>(p.shape_id)][b]++;
      k[from - 1][b] += static_cast<long long>(t.uncovered.size());  // E tiles
    }
    system.diagram.mult.push_back(std::move(k));
  }

  // Empirical weights from the default calibration schedule.
  auto hosts = default_h_schedule(g, system.level_shapes.back().front().shape,
                                  opts.h_schedule_multiples, opts.h_size_cap);
  auto empirical = empirical_harmonic(system, hosts);
  system.weights = empirical.weights;
  system.diagram.weights = system.weights;

  auto validation = validate_system(system, mpq_class(0));
  if (!validation.iso_bounds_ok || !validation.singleton_bounds_ok || !validation.size_consistent ||
      !validation.weights_sum_ok)
    throw InvariantViolation("Bratteli tiling system failed post-construction validation");
  return system;
}

SystemValidation validate_system(const BratteliTilingSystem& system, const mpq_class& harmonic_tol) {
  SystemValidation out;
  out.iso_bounds_ok = true;
  for (int l = 0; l < system.depth(); ++l) {
    const auto& shapes = system.level_shapes[static_cast<std::size_t>(l)];
    for (std::size_t v = 0; v + 1 < shapes.size(); ++v)
      if (isoperimetric(shapes[v].shape) > pow2_inv(l + 1)) out.iso_bounds_ok = false;
  }
  out.singleton_bounds_ok = true;
  for (std::size_t l = 0; l < system.realizations.size(); ++l) {
    const auto& level = system.realizations[l];
    for (std::size_t b = 0; b + 1 < level.size(); ++b) {
      const Tiling& t = level[b];
      long long size = system.shape(static_cast<int>(l) + 1, static_cast<int>(b)).size();
      if (make_ratio(static_cast<long long>(t.uncovered.size()), size) > pow2_inv(static_cast<int>(l) + 1))
        out.singleton_bounds_ok = false;
    }
  }
  auto diagram_check = validate_bratteli(system.diagram, harmonic_tol);
  out.size_consistent = diagram_check.size_consistent && diagram_check.out_edges_ok;
  out.weights_sum_ok = diagram_check.weights_sum_ok;
  out.harmonic_residual = diagram_check.harmonic_residual;
  out.singleton_weights_monotone = true;
  for (int l = 0; l + 1 < system.depth(); ++l)
    if (system.singleton_weight(l) < system.singleton_weight(l + 1)) out.singleton_weights_monotone = false;
  return out;
}

}  // namespace frk
