#pragma once

#include <gmpxx.h>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "frk/folner.hpp"
#include "frk/graph.hpp"

namespace frk {

// Quasitiling machinery: greedy placement of labeled-isomorphic tile copies on
// finite S-labeled graphs, epsilon-cover / epsilon-disjoint checkers, and
// Bratteli tiling systems built from Folner sets.
//
// The existence theorems behind these constructions carry non-constructive
// constants, so everything here is verify-then-accept: run the tiler, check
// the postconditions, report.

struct TileShape {
  FiniteSubset shape;  // contains the identity; connected in Cay(G,S)
  int id = 0;

  int size() const { return shape.size(); }
  bool is_singleton() const { return shape.size() == 1; }
};

TileShape make_tile_shape(FiniteSubset shape, int id);

using HostGraph = std::shared_ptr<const LabeledGraph>;

struct Placement {
  int shape_id = 0;
  int anchor = 0;             // host vertex carrying the shape's identity
  std::vector<int> covered;   // host vertex per shape element (same order)
};

struct Tiling {
  HostGraph host;
  std::vector<TileShape> shapes;
  std::vector<Placement> placements;
  std::vector<int> uncovered;  // host vertices in no placement
};

struct CoverCheck {
  bool holds = false;
  mpq_class ratio;  // |union covered| / |host|
};

// |union of covered sets| / |host| > 1 - eps.  Overlaps count once.
CoverCheck check_epsilon_cover(int host_size, const std::vector<Placement>& placements,
                               const mpq_class& eps);
CoverCheck check_epsilon_cover(const Tiling& t, const mpq_class& eps);

struct DisjointCheck {
  bool verified = false;            // greedy witness found (sound, incomplete)
  mpq_class min_ratio;              // min |B_i| / |A_i| over the witness
  std::vector<std::vector<int>> shrunk;  // the disjoint B_i
};

// Greedy first-claim witness for epsilon-disjointness: B_i = A_i minus the
// earlier tiles, each |B_i|/|A_i| > 1 - eps.  A greedy failure reports "not
// verified"; the property is existential and this checker is sound but
// incomplete.
DisjointCheck check_epsilon_disjoint(const std::vector<Placement>& placements, const mpq_class& eps);

struct QuasitileOptions {
  mpq_class epsilon = mpq_class(1, 5);
  // Only fully fresh tiles (used by the Bratteli builder, which needs honest
  // partitions).
  bool strict_disjoint = false;
  // Deterministic sorted anchor order by default; a seeded shuffle for
  // robustness experiments.
  std::optional<std::uint64_t> shuffle_seed;
};

// Greedy multi-pass quasitiler: shapes from largest to smallest, anchors in
// deterministic order, a tile is placed when the host supports a labeled
// isomorphic copy and the copy is (1-eps)-fresh.  The output always passes
// check_epsilon_disjoint at its own eps by construction; the cover ratio is
// data for the caller to check.
Tiling quasitile(const MarkedGroup& g, HostGraph host, std::vector<TileShape> shapes,
                 const QuasitileOptions& opts);

// Convenience: host from a finite subset of the group.
Tiling quasitile_subset(const MarkedGroup& g, const FiniteSubset& host, std::vector<TileShape> shapes,
                        const QuasitileOptions& opts);

// ---------------------------------------------------------------------------
// Bratteli diagrams.

struct BratteliVertex {
  std::string name;
  long long size = 1;
  bool singleton = false;
};

struct BratteliDiagram {
  std::vector<std::vector<BratteliVertex>> levels;
  // mult[l][a][b]: multiplicity K(a, b) from level l vertex a to level l+1
  // vertex b; size levels-1.
  std::vector<std::vector<std::vector<long long>>> mult;
  // Optional probability weights per level (aligned with vertices).
  std::vector<std::vector<mpq_class>> weights;
};

struct BratteliValidation {
  bool size_consistent = false;   // S(b) = sum_a S(a) K(a,b), exactly
  bool out_edges_ok = false;      // every non-top vertex has an outgoing edge
  bool has_weights = false;
  mpq_class harmonic_residual;    // max |P_l(a) - sum_b S(a)K(a,b)/S(b) P_{l+1}(b)|
  bool weights_sum_ok = false;    // sum of each level's weights is exactly 1
  bool harmonic_ok = false;       // residual <= tol
};

BratteliValidation validate_bratteli(const BratteliDiagram& d, const mpq_class& tol);

// ---------------------------------------------------------------------------
// Bratteli tiling systems (levels of Folner shapes plus a singleton, realized
// partitions, empirical harmonic weights).

struct BratteliTilingSystem {
  MarkedGroup group;
  BratteliDiagram diagram;
  // Per level: the non-singleton shapes followed by the singleton E (last).
  std::vector<std::vector<TileShape>> level_shapes;
  // realizations[l][b]: partition of level l+1 vertex b's shape by level-l
  // tiles; uncovered vertices are the E_l singletons.  Singleton vertices at
  // level l+1 carry a one-vertex host with nothing placed (one E_l tile).
  std::vector<std::vector<Tiling>> realizations;
  // Empirical harmonic weights (from the largest calibration host).
  std::vector<std::vector<mpq_class>> weights;

  int depth() const { return static_cast<int>(level_shapes.size()); }
  int singleton_index(int level) const {
    return static_cast<int>(level_shapes[static_cast<std::size_t>(level)].size()) - 1;
  }
  const TileShape& shape(int level, int vertex) const {
    return level_shapes[static_cast<std::size_t>(level)][static_cast<std::size_t>(vertex)];
  }
  mpq_class weight(int level, int vertex) const {
    return weights[static_cast<std::size_t>(level)][static_cast<std::size_t>(vertex)];
  }
  mpq_class singleton_weight(int level) const { return weight(level, singleton_index(level)); }
};

// Supplies candidate Folner sets for one level; the builder retries with
// increasing `attempt` until the level's isoperimetric and singleton bounds
// hold.  `previous` is the accepted shape of the level below (empty at level 0).
using FolnerDriver =
    std::function<FiniteSubset(int level, int attempt, const std::optional<FiniteSubset>& previous)>;

FolnerDriver canonical_folner_driver(const MarkedGroup& g);

// Interval/box side lengths given per level (must divide for exact systems).
FolnerDriver explicit_sides_driver(const MarkedGroup& g, const std::vector<int>& sides);

struct BratteliBuildOptions {
  int retry_budget = 8;
  // Calibration hosts for the empirical weights; default: multiples of the
  // top shape's box, capped in size.
  std::vector<int> h_schedule_multiples = {2, 3};
  int h_size_cap = 200000;
};

// Levels are built bottom-up: level n (1-based) shapes satisfy
// i(F) <= 2^{-n}; each level n+1 shape is partitioned by level-n tiles with
// at most 2^{-n} |F| leftover singletons.  All invariants are machine-checked
// post-construction (throws InvariantViolation on failure).
BratteliTilingSystem build_bratteli_tiling_system(const MarkedGroup& g, int depth,
                                                  const FolnerDriver& driver,
                                                  const BratteliBuildOptions& opts = {});

struct EmpiricalWeights {
  // weights[level][vertex] from the largest host.
  std::vector<std::vector<mpq_class>> weights;
  // sequence[h][level][vertex] for trend inspection.
  std::vector<std::vector<std::vector<mpq_class>>> sequence;
  std::vector<Tiling> top_tilings;  // geometric top-level tiling per host
  std::vector<bool> tiled_ok;       // per host: at least one top tile placed
};

// Tiles each host by the top level (greedy, strict-disjoint), then counts
// lower-level tiles through the realized partitions (the iterated scheme).
// m_k(A) = (covered by A-translates) / |H_k|; each level sums to 1 exactly.
EmpiricalWeights empirical_harmonic(const BratteliTilingSystem& system,
                                    const std::vector<FiniteSubset>& h_list);

// Geometric refinement: the level-k tiles inside level-n vertex `vertex`'s
// shape, as index maps into that shape's element order.
struct RefinedTile {
  int vertex = 0;              // level-k vertex id
  std::vector<int> indices;    // shape-element index per level-k shape element
};

std::vector<RefinedTile> refine_to_level(const BratteliTilingSystem& system, int level_n, int vertex,
                                         int level_k);

// Level-k tiles of a host that was tiled at the top level, as host-vertex
// index maps.  Top-level leftovers become E_k singletons.
std::vector<RefinedTile> host_tiles_at_level(const BratteliTilingSystem& system, const Tiling& top,
                                             int level_k);

struct SystemValidation {
  bool iso_bounds_ok = false;        // i(F^n_j) <= 2^{-n}
  bool singleton_bounds_ok = false;  // K(E_{n-1}, F^n_j) <= 2^{-(n-1)} |F^n_j|
  bool size_consistent = false;
  bool weights_sum_ok = false;
  mpq_class harmonic_residual;
  bool singleton_weights_monotone = false;  // m(E_n) non-increasing in n
};

SystemValidation validate_system(const BratteliTilingSystem& system, const mpq_class& harmonic_tol);

}  // namespace frk
