#pragma once

#include <map>
#include <optional>
#include <vector>

#include "frk/rank.hpp"
#include "frk/tiling.hpp"

namespace frk {

// The ultramatricial side: levels of a Bratteli tiling system carry the
// algebras  ⊕_{A in Z_i} Mat_{|A| x |A|}(K);  pi_level sends a group ring
// element to its truncated right-multiplication blocks, phi_embed is the
// diagonal embedding along the realized partitions, and rk_phi is the
// weighted normalized rank.  Defect functions measure how far these maps are
// from exact homomorphisms and check the measured defects against the
// boundary bounds recomputed from actual boundary sizes.
//
// The product comparison pi(a) pi(b) vs pi(ab) matches right multiplication,
// so its boundary bound is guaranteed when a and b commute (every abelian
// catalog kind; for Heisenberg pick commuting pairs).

template <class F>
struct LevelElement {
  int level = 0;  // 0-based level index into the system
  std::vector<SparseMatrix<F>> blocks;  // aligned with the level's vertices
};

inline void require_level(const BratteliTilingSystem& system, int level) {
  if (level < 0 || level >= system.depth())
    throw PreconditionError("level " + std::to_string(level) + " outside the system (depth " +
                            std::to_string(system.depth()) + ")");
}

template <class F>
LevelElement<F> level_zero(const F& field, const BratteliTilingSystem& system, int level) {
  require_level(system, level);
  LevelElement<F> x;
  x.level = level;
  for (const auto& shape : system.level_shapes[static_cast<std::size_t>(level)])
    x.blocks.push_back(SparseMatrixBuilder<F>(field, shape.size(), shape.size()).build());
  return x;
}

template <class F>
LevelElement<F> level_identity(const F& field, const BratteliTilingSystem& system, int level) {
  require_level(system, level);
  LevelElement<F> x;
  x.level = level;
  for (const auto& shape : system.level_shapes[static_cast<std::size_t>(level)])
    x.blocks.push_back(identity_matrix(field, shape.size()));
  return x;
}

template <class F>
LevelElement<F> le_sub(const LevelElement<F>& a, const LevelElement<F>& b) {
  if (a.level != b.level) throw PreconditionError("level mismatch");
  LevelElement<F> out;
  out.level = a.level;
  for (std::size_t v = 0; v < a.blocks.size(); ++v) out.blocks.push_back(a.blocks[v] - b.blocks[v]);
  return out;
}

template <class F>
LevelElement<F> le_add(const LevelElement<F>& a, const LevelElement<F>& b) {
  if (a.level != b.level) throw PreconditionError("level mismatch");
  LevelElement<F> out;
  out.level = a.level;
  for (std::size_t v = 0; v < a.blocks.size(); ++v) out.blocks.push_back(a.blocks[v] + b.blocks[v]);
  return out;
}

template <class F>
LevelElement<F> le_mul(const LevelElement<F>& a, const LevelElement<F>& b) {
  if (a.level != b.level) throw PreconditionError("level mismatch");
  LevelElement<F> out;
  out.level = a.level;
  for (std::size_t v = 0; v < a.blocks.size(); ++v) out.blocks.push_back(a.blocks[v] * b.blocks[v]);
  return out;
}

template <class F>
LevelElement<F> le_star(const LevelElement<F>& a) {
  LevelElement<F> out;
  out.level = a.level;
  for (const auto& blk : a.blocks) out.blocks.push_back(blk.star());
  return out;
}

// pi_i^A(a): e_x -> sum a_gamma e_{x gamma} for x in A \ boundary_r(A), zero
// columns on boundary_r(A).  Singleton blocks carry the identity coefficient
// only when supp(a) = {1}.
template <class F>
LevelElement<F> pi_level(const GroupRingElement<F>& a, const BratteliTilingSystem& system, int level) {
  if (!a.owner().same_group(system.group)) throw PreconditionError("element owner differs from the system group");
  require_level(system, level);
  const MarkedGroup& g = system.group;
  int r = a.support_radius();
  LevelElement<F> out;
  out.level = level;
  for (const auto& tile : system.level_shapes[static_cast<std::size_t>(level)]) {
    const FiniteSubset& shape = tile.shape;
    SparseMatrixBuilder<F> b(a.field(), shape.size(), shape.size());
    if (tile.is_singleton()) {
      if (r == 0) b.add(0, 0, a.coeff(g.identity()));
    } else {
      FiniteSubset bnd = r >= 1 ? boundary(shape, r) : FiniteSubset(g, {});
      for (int col = 0; col < shape.size(); ++col) {
        if (bnd.contains(shape.at(col))) continue;
        for (const auto& [gamma, c] : a.terms()) {
          int row = shape.index_of(g.mul(shape.at(col), gamma));
          if (row < 0) throw InvariantViolation("pi_level column left its shape");
          b.add(row, col, c);
        }
      }
    }
    out.blocks.push_back(b.build());
  }
  return out;
}

// Diagonal embedding along the realized partitions: each A-tile of B receives
// x's A-block; leftover singleton-covered coordinates receive the E block.
template <class F>
LevelElement<F> phi_embed(const LevelElement<F>& x, const BratteliTilingSystem& system) {
  int level = x.level;
  if (level + 1 >= system.depth()) throw PreconditionError("phi_embed needs a realized next level");
  const F& field = x.blocks.front().field();
  int e_index = system.singleton_index(level);
  auto e_scalar = x.blocks[static_cast<std::size_t>(e_index)].at(0, 0);

  LevelElement<F> out;
  out.level = level + 1;
  const auto& next_shapes = system.level_shapes[static_cast<std::size_t>(level + 1)];
  for (std::size_t bv = 0; bv < next_shapes.size(); ++bv) {
    int size = next_shapes[bv].size();
    SparseMatrixBuilder<F> builder(field, size, size);
    if (next_shapes[bv].is_singleton()) {
      builder.add(0, 0, e_scalar);
    } else {
      const Tiling& realization = system.realizations[static_cast<std::size_t>(level)][bv];
      for (const auto& p : realization.placements) {
        const auto& block = x.blocks[static_cast<std::size_t>(p.shape_id)];
        for (const auto& [rc, v] : block.entries())
          builder.add(p.covered[static_cast<std::size_t>(rc.first)],
                      p.covered[static_cast<std::size_t>(rc.second)], v);
      }
      for (int w : realization.uncovered) builder.add(w, w, e_scalar);
    }
    out.blocks.push_back(builder.build());
  }
  return out;
}

// rk_phi(x) = sum_A m(A) rank(x_A) / |A|.
template <class F>
mpq_class rk_phi(const LevelElement<F>& x, const std::vector<mpq_class>& weights) {
  if (weights.size() != x.blocks.size()) throw PreconditionError("weight/level mismatch");
  mpq_class sum = 0;
  for (const auto& w : weights) sum += w;
  if (sum != 1) throw PreconditionError("weights must sum to 1");
  mpq_class value = 0;
  for (std::size_t v = 0; v < x.blocks.size(); ++v)
    value += weights[v] * make_ratio(rank(x.blocks[v]), x.blocks[v].rows());
  return value;
}

template <class F>
mpq_class rk_phi(const LevelElement<F>& x, const BratteliTilingSystem& system) {
  return rk_phi(x, system.weights[static_cast<std::size_t>(x.level)]);
}

// ---------------------------------------------------------------------------
// Defects of the level maps.

struct DefectReport {
  mpq_class defect;
  mpq_class bound;        // closed-form cascade from the level constants
  mpq_class sharp_bound;  // recomputed from actual boundary sizes
};

namespace detail {

inline mpz_class ball_growth(int degree, int radius) {
  mpz_class p;
  mpz_ui_pow_ui(p.get_mpz_t(), static_cast<unsigned long>(degree + 1),
                static_cast<unsigned long>(radius + 1));
  return p;
}

// |boundary_r| with the singleton convention: a singleton is all boundary for
// r >= 1 and has none for r = 0.
inline long long boundary_size(const TileShape& shape, int r) {
  if (r == 0) return 0;
  if (shape.is_singleton()) return 1;
  return boundary(shape.shape, r).size();
}

}  // namespace detail

// rk_phi(phi_i(pi_i(a)) - pi_{i+1}(a)) against the T_B count bound.  The
// measured defect must stay under max(cascade bound, sharp bound); a
// violation falsifies the implementation.
template <class F>
DefectReport cauchy_defect(const GroupRingElement<F>& a, const BratteliTilingSystem& system, int level) {
  require_level(system, level + 1);
  const MarkedGroup& g = system.group;
  int r = a.support_radius();
  int d = g.degree();
  auto diff = le_sub(phi_embed(pi_level(a, system, level), system), pi_level(a, system, level + 1));
  const auto& weights = system.weights[static_cast<std::size_t>(level + 1)];

  DefectReport out;
  out.defect = rk_phi(diff, weights);

  // Closed-form cascade with 1-based levels i = level+1:
  //   2^{-(i+1)} + sum_{|B|>1} m(B) (2^{-(i+1)}(d+1)^{r+1} + 2^{-(i+1)} +
  //                                  2^{-i}(d+1)^{r+1}).
  mpq_class growth = make_ratio(detail::ball_growth(d, r), mpz_class(1));
  mpq_class lo = pow2_inv(level + 2), hi = pow2_inv(level + 1);
  out.bound = lo;
  const auto& next = system.level_shapes[static_cast<std::size_t>(level + 1)];
  for (std::size_t bv = 0; bv + 1 < next.size(); ++bv)
    out.bound += weights[bv] * (lo * growth + lo + hi * growth);

  // Sharp bound: per B, the columns that can disagree are boundary_r(B) plus
  // the boundary columns of each embedded tile.
  out.sharp_bound = 0;
  const auto& lower = system.level_shapes[static_cast<std::size_t>(level)];
  for (std::size_t bv = 0; bv + 1 < next.size(); ++bv) {
    long long bad = detail::boundary_size(next[bv], r);
    for (std::size_t av = 0; av < lower.size(); ++av)
      bad += system.diagram.mult[static_cast<std::size_t>(level)][av][bv] *
             detail::boundary_size(lower[av], r);
    bad = std::min(bad, static_cast<long long>(next[bv].size()));
    out.sharp_bound += weights[bv] * make_ratio(bad, next[bv].size());
  }

  if (out.defect > std::max(out.bound, out.sharp_bound))
    throw InvariantViolation("cauchy defect " + out.defect.get_str() + " exceeds its bound");
  return out;
}

namespace detail {

template <class F>
DefectReport boundary_defect(const LevelElement<F>& diff, const BratteliTilingSystem& system, int level,
                             int radius) {
  const auto& weights = system.weights[static_cast<std::size_t>(level)];
  DefectReport out;
  out.defect = rk_phi(diff, weights);
  out.bound = 0;
  const auto& shapes = system.level_shapes[static_cast<std::size_t>(level)];
  for (std::size_t v = 0; v < shapes.size(); ++v)
    out.bound += weights[v] * make_ratio(boundary_size(shapes[v], radius), shapes[v].size());
  out.sharp_bound = out.bound;
  if (out.defect > out.bound)
    throw InvariantViolation("boundary defect " + out.defect.get_str() + " exceeds its bound");
  return out;
}

}  // namespace detail

// rk_phi(pi_i(a) pi_i(b) - pi_i(ab)) <= sum_A m(A) |boundary_{r+s}(A)| / |A|.
template <class F>
DefectReport hom_defect(const GroupRingElement<F>& a, const GroupRingElement<F>& b,
                        const BratteliTilingSystem& system, int level) {
  int rs = a.support_radius() + b.support_radius();
  auto diff = le_sub(le_mul(pi_level(a, system, level), pi_level(b, system, level)),
                     pi_level(gr_mul(a, b), system, level));
  return detail::boundary_defect(diff, system, level, rs);
}

// rk_phi(pi_i(a*) - pi_i(a)*) <= the same boundary bound at radius 2r.
template <class F>
DefectReport star_defect(const GroupRingElement<F>& a, const BratteliTilingSystem& system, int level) {
  auto diff = le_sub(pi_level(gr_star(a), system, level), le_star(pi_level(a, system, level)));
  return detail::boundary_defect(diff, system, level, 2 * a.support_radius());
}

// Per-level gap |rk_phi(pi_i(a)) - reference| with the singleton weight and
// boundary slack reported.  The reference defaults to the Folner kernel
// estimate at a stage comparable to the deepest shape.
template <class F>
ConvergenceReport rank_convergence(const GroupRingElement<F>& a, const BratteliTilingSystem& system,
                                   const std::vector<int>& levels,
                                   std::optional<mpq_class> reference = std::nullopt) {
  mpq_class ref;
  if (reference) {
    ref = *reference;
  } else {
    int n = std::max(32, 2 * system.level_shapes.back().front().size());
    ref = folner_rank_kernel(a, {n}).stages.back().estimate.value;
  }
  int r = a.support_radius();
  ConvergenceReport report;
  report.label = "rank_convergence";
  for (int level : levels) {
    auto value = rk_phi(pi_level(a, system, level), system);
    ReportStage stage;
    stage.estimate.method = RankMethod::rk_phi;
    stage.estimate.parameter = level;
    stage.estimate.window = r;
    stage.estimate.value = value;
    stage.estimate.cert_num = 0;
    stage.estimate.cert_den = 1;
    mpq_class boundary_slack = 0;
    const auto& shapes = system.level_shapes[static_cast<std::size_t>(level)];
    for (std::size_t v = 0; v + 1 < shapes.size(); ++v)
      boundary_slack += system.weight(level, static_cast<int>(v)) *
                        make_ratio(detail::boundary_size(shapes[v], r), shapes[v].size());
    stage.slack_terms.emplace("gap", mpq_class(abs(value - ref)));
    stage.slack_terms.emplace("singleton_weight", system.singleton_weight(level));
    stage.slack_terms.emplace("boundary_slack", boundary_slack);
    stage.bound = system.singleton_weight(level) + boundary_slack;
    report.stages.push_back(std::move(stage));
  }
  detail::append_gaps(report);
  return report;
}

// ---------------------------------------------------------------------------
// Sofic graphs and representations.

struct SoficGraph {
  MarkedGroup group;
  HostGraph graph;
  std::map<int, std::vector<char>> good;  // radius -> V^r mask (cached)

  const std::vector<char>& good_mask(int r) const {
    auto it = good.find(r);
    if (it == good.end()) throw PreconditionError("V^r not computed for r = " + std::to_string(r));
    return it->second;
  }
};

// Exact ball-isomorphism scan: V^r = vertices whose r-ball is labeled-
// isomorphic to the Cayley ball B_r(1).
std::vector<char> compute_good_set(const MarkedGroup& g, const LabeledGraph& host, int r);

SoficGraph sofic_from_quotient(const MarkedGroup& g, const std::vector<std::int64_t>& moduli, int r);
SoficGraph sofic_from_folner(const MarkedGroup& g, int n, int r);

// Geodesic generator-index words for a list of group elements (BFS).
std::vector<std::vector<int>> geodesic_words(const MarkedGroup& g, const std::vector<GroupElement>& targets);

// psi_n(a): e_x -> sum a_gamma e_{x gamma} on V^r, zero columns elsewhere.
// "x gamma" follows a geodesic word for gamma through the labeled graph; the
// ball isomorphism on V^r makes the result path-independent.
template <class F>
SparseMatrix<F> psi_map(const GroupRingElement<F>& a, const SoficGraph& sofic) {
  const MarkedGroup& g = sofic.group;
  const LabeledGraph& host = *sofic.graph;
  int r = a.support_radius();
  std::vector<char> mask =
      sofic.good.count(r) ? sofic.good.at(r) : compute_good_set(g, host, r);

  auto words = geodesic_words(g, a.support());
  SparseMatrixBuilder<F> b(a.field(), host.size(), host.size());
  for (int x = 0; x < host.size(); ++x) {
    if (!mask[static_cast<std::size_t>(x)]) continue;
    std::size_t term_idx = 0;
    for (const auto& [gamma, c] : a.terms()) {
      int v = x;
      for (int s : words[term_idx]) {
        v = host.follow(v, s);
        if (v < 0) throw InvariantViolation("good vertex lost a ball edge");
      }
      b.add(v, x, c);
      ++term_idx;
    }
  }
  return b.build();
}

// ---------------------------------------------------------------------------
// tau: transporting level elements onto a quasitiled sofic graph.

struct TauTiling {
  SoficGraph sofic;
  int level = 0;                 // target level k
  Tiling top;                    // quasitiling by the system's top shapes
  std::vector<std::vector<int>> j_sets;  // disjointified parts per placement
  std::vector<RefinedTile> tiles;        // kept level-k tiles, G-vertex indices
  std::vector<long long> q_counts;       // covered vertices per level-k vertex
};

// Quasitiles the sofic graph by the system's top shapes, disjointifies into
// the J_alpha parts, refines each kept part down to `level`, and discards the
// refined tiles that stick into an overlap.  strict_disjoint placement
// recovers exact partitions where they exist.
TauTiling tau_tiling(const BratteliTilingSystem& system, const SoficGraph& sofic,
                     const QuasitileOptions& opts, int level);

template <class F>
SparseMatrix<F> tau_map(const LevelElement<F>& x, const TauTiling& tiling) {
  const F& field = x.blocks.front().field();
  int n = tiling.sofic.graph->size();
  SparseMatrixBuilder<F> b(field, n, n);
  for (const auto& tile : tiling.tiles) {
    const auto& block = x.blocks[static_cast<std::size_t>(tile.vertex)];
    for (const auto& [rc, v] : block.entries())
      b.add(tile.indices[static_cast<std::size_t>(rc.first)],
            tile.indices[static_cast<std::size_t>(rc.second)], v);
  }
  return b.build();
}

// Per-graph gap |rank(tau(x))/|V| - rk_phi(x)|, bounded exactly by the
// frequency deviation sum_A |Q_n(A)/|V| - m(A)|.
template <class F>
ConvergenceReport tau_rank_convergence(const LevelElement<F>& x, const BratteliTilingSystem& system,
                                       const std::vector<TauTiling>& graphs) {
  mpq_class target = rk_phi(x, system);
  ConvergenceReport report;
  report.label = "tau_rank";
  for (const auto& tiling : graphs) {
    if (tiling.level != x.level) throw PreconditionError("tau tiling level mismatch");
    int n = tiling.sofic.graph->size();
    int rk = rank(tau_map(x, tiling));
    mpq_class value = make_ratio(rk, n);
    mpq_class deviation = 0;
    const auto& shapes = system.level_shapes[static_cast<std::size_t>(x.level)];
    for (std::size_t v = 0; v < shapes.size(); ++v)
      deviation += abs(make_ratio(tiling.q_counts[v], n) - system.weight(x.level, static_cast<int>(v)));
    mpq_class gap = abs(value - target);
    if (gap > deviation)
      throw InvariantViolation("tau rank gap " + gap.get_str() + " exceeds the frequency deviation");
    ReportStage stage;
    stage.estimate.method = RankMethod::tau;
    stage.estimate.parameter = n;
    stage.estimate.value = value;
    stage.estimate.cert_num = rk;
    stage.estimate.cert_den = n;
    stage.bound = deviation;
    stage.bound_heuristic = false;
    stage.slack_terms.emplace("frequency_deviation", deviation);
    stage.slack_terms.emplace("gap", gap);
    report.stages.push_back(std::move(stage));
  }
  detail::append_gaps(report);
  return report;
}

// {x in set : graph distance to the complement <= r}, as a mask.
std::vector<char> graph_boundary_mask(const LabeledGraph& host, const std::vector<char>& in_set, int r);

struct FirstIdentityReport {
  mpq_class agree_fraction;  // z_n(a) / |V|
  mpq_class rank_defect;     // rank(psi - psi') / |V|
};

// psi vs the tiling-restricted psi' (columns within distance r of a tile
// boundary zeroed).  rank_defect <= 1 - agree_fraction, exactly.
template <class F>
FirstIdentityReport first_identity_defect(const GroupRingElement<F>& a, const TauTiling& tiling) {
  const SoficGraph& sofic = tiling.sofic;
  const LabeledGraph& host = *sofic.graph;
  int n = host.size();
  int r = a.support_radius();
  auto psi = psi_map(a, sofic);

  // Keep columns interior to some J_alpha.
  std::vector<char> keep(static_cast<std::size_t>(n), 0);
  for (const auto& j : tiling.j_sets) {
    std::vector<char> in_j(static_cast<std::size_t>(n), 0);
    for (int v : j) in_j[static_cast<std::size_t>(v)] = 1;
    auto bnd = graph_boundary_mask(host, in_j, r);
    for (int v : j)
      if (!bnd[static_cast<std::size_t>(v)]) keep[static_cast<std::size_t>(v)] = 1;
  }

  SparseMatrixBuilder<F> restricted(a.field(), n, n);
  for (const auto& [rc, v] : psi.entries())
    if (keep[static_cast<std::size_t>(rc.second)]) restricted.add(rc.first, rc.second, v);
  auto psi_prime = restricted.build();

  auto diff = psi - psi_prime;
  std::vector<char> col_differs(static_cast<std::size_t>(n), 0);
  for (const auto& [rc, v] : diff.entries()) col_differs[static_cast<std::size_t>(rc.second)] = 1;
  long long agree = 0;
  for (char c : col_differs) agree += c ? 0 : 1;

  FirstIdentityReport out;
  out.agree_fraction = make_ratio(agree, n);
  out.rank_defect = make_ratio(rank(diff), n);
  if (out.rank_defect > 1 - out.agree_fraction)
    throw InvariantViolation("first identity defect exceeds the disagreeing column fraction");
  return out;
}

}  // namespace frk
