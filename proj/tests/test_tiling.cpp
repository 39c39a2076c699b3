#include <random>

#include "doctest.h"
#include "frk/numutil.hpp"
#include "frk/tiling.hpp"

using namespace frk;

namespace {

FiniteSubset interval(const MarkedGroup& z1, int lo, int hi) {
  std::vector<GroupElement> v;
  for (int i = lo; i < hi; ++i) v.push_back(z1.element({i}));
  return FiniteSubset(z1, std::move(v));
}

FiniteSubset box2(const MarkedGroup& z2, int n) {
  std::vector<GroupElement> v;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) v.push_back(z2.element({i, j}));
  return FiniteSubset(z2, std::move(v));
}

TileShape square_tile(const MarkedGroup& z2, int side, int id) {
  return make_tile_shape(box2(z2, side), id);
}

Placement fake_placement(int shape_id, std::vector<int> covered) {
  Placement p;
  p.shape_id = shape_id;
  p.anchor = covered.empty() ? 0 : covered.front();
  p.covered = std::move(covered);
  return p;
}

}  // namespace

TEST_CASE("epsilon cover checker") {
  // Full partition of a 10-vertex host.
  std::vector<Placement> partition{fake_placement(0, {0, 1, 2, 3, 4}), fake_placement(0, {5, 6, 7, 8, 9})};
  auto full = check_epsilon_cover(10, partition, make_ratio(1, 100));
  CHECK(full.holds);
  CHECK(full.ratio == 1);

  // Single 3-tile on a path of 10: ratio 3/10 fails eps = 0.2.
  auto sparse = check_epsilon_cover(10, {fake_placement(0, {0, 1, 2})}, make_ratio(1, 5));
  CHECK(!sparse.holds);
  CHECK(sparse.ratio == make_ratio(3, 10));

  // Overlapping placements count once.
  std::vector<Placement> overlapping{fake_placement(0, {0, 1, 2, 3}), fake_placement(0, {2, 3, 4, 5})};
  auto united = check_epsilon_cover(8, overlapping, make_ratio(1, 2));
  CHECK(united.ratio == make_ratio(6, 8));
}

TEST_CASE("epsilon disjoint checker") {
  std::vector<Placement> disjoint{fake_placement(0, {0, 1}), fake_placement(0, {2, 3})};
  auto ok = check_epsilon_disjoint(disjoint, make_ratio(1, 100));
  CHECK(ok.verified);
  CHECK(ok.min_ratio == 1);

  // Two identical placements: one copy loses everything.
  std::vector<Placement> identical{fake_placement(0, {0, 1, 2}), fake_placement(0, {0, 1, 2})};
  CHECK(!check_epsilon_disjoint(identical, make_ratio(2, 5)).verified);

  // 10% pairwise overlap chain holds at eps = 0.2.
  std::vector<Placement> chain;
  for (int k = 0; k < 5; ++k) {
    std::vector<int> covered;
    for (int i = 0; i < 10; ++i) covered.push_back(9 * k + i);
    chain.push_back(fake_placement(0, std::move(covered)));
  }
  auto chained = check_epsilon_disjoint(chain, make_ratio(1, 5));
  CHECK(chained.verified);
  CHECK(chained.min_ratio == make_ratio(9, 10));
}

TEST_CASE("greedy quasitiler on intervals") {
  auto z1 = make_group("Z^1");
  QuasitileOptions opts;
  opts.epsilon = make_ratio(1, 5);

  auto t = quasitile_subset(z1, interval(z1, 0, 10), {make_tile_shape(interval(z1, 0, 3), 0)}, opts);
  CHECK(t.placements.size() == 3);
  auto cover = check_epsilon_cover(t, opts.epsilon);
  CHECK(cover.ratio == make_ratio(9, 10));
  CHECK(cover.holds);
  CHECK(check_epsilon_disjoint(t.placements, opts.epsilon).verified);

  // Host an exact multiple: perfect partition.
  auto exact = quasitile_subset(z1, interval(z1, 0, 9), {make_tile_shape(interval(z1, 0, 3), 0)}, opts);
  CHECK(exact.placements.size() == 3);
  CHECK(check_epsilon_cover(exact, opts.epsilon).ratio == 1);
  CHECK(exact.uncovered.empty());
}

TEST_CASE("quasitiler on Z^2 boxes") {
  auto z2 = make_group("Z^2");
  QuasitileOptions opts;
  opts.epsilon = make_ratio(1, 5);
  auto t = quasitile_subset(z2, box2(z2, 20), {square_tile(z2, 8, 0), square_tile(z2, 4, 1)}, opts);
  auto cover = check_epsilon_cover(t, opts.epsilon);
  CHECK(cover.holds);
  CHECK(cover.ratio >= make_ratio(4, 5));
  CHECK(check_epsilon_disjoint(t.placements, opts.epsilon).verified);
}

TEST_CASE("quasitile output is always epsilon-disjoint at its own epsilon") {
  auto z2 = make_group("Z^2");
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 6; ++trial) {
    // Punctured boxes exercise partial placements.
    auto full = box2(z2, 12);
    std::vector<GroupElement> kept;
    for (const auto& e : full.elements())
      if (rng() % 10) kept.push_back(e);
    FiniteSubset host(z2, kept);
    QuasitileOptions opts;
    opts.epsilon = make_ratio(3, 10);
    if (trial % 2) opts.shuffle_seed = trial;
    auto t = quasitile_subset(z2, host, {square_tile(z2, 4, 0), square_tile(z2, 2, 1)}, opts);
    CHECK(check_epsilon_disjoint(t.placements, opts.epsilon).verified);
    // Placements are labeled-isomorphic images: here, group translates.
    for (const auto& p : t.placements) {
      const auto& shape = p.shape_id == 0 ? t.shapes[0] : t.shapes[1];
      const auto& anchor_elem = host.at(p.anchor);
      const auto& sh = t.shapes[p.shape_id == t.shapes[0].id ? 0 : 1].shape;
      (void)shape;
      for (int i = 0; i < sh.size(); ++i)
        CHECK(host.at(p.covered[static_cast<std::size_t>(i)]) == z2.mul(anchor_elem, sh.at(i)));
    }
  }
}

TEST_CASE("bratteli validation") {
  BratteliDiagram d;
  d.levels = {{{"A", 2, false}}, {{"B", 4, false}}};
  d.mult = {{{2}}};
  d.weights = {{mpq_class(1)}, {mpq_class(1)}};
  auto v = validate_bratteli(d, 0);
  CHECK(v.size_consistent);
  CHECK(v.out_edges_ok);
  CHECK(v.harmonic_residual == 0);
  CHECK(v.harmonic_ok);

  d.weights[0][0] = make_ratio(9, 10);
  auto v2 = validate_bratteli(d, 0);
  CHECK(!v2.weights_sum_ok);
  CHECK(v2.harmonic_residual == make_ratio(1, 10));

  d.mult = {{{3}}};
  CHECK(!validate_bratteli(d, 0).size_consistent);
}

TEST_CASE("bratteli tiling system over Z") {
  auto z1 = make_group("Z^1");
  auto system = build_bratteli_tiling_system(z1, 2, canonical_folner_driver(z1));
  CHECK(system.depth() == 2);
  // One interval shape plus the singleton per level.
  CHECK(system.level_shapes[0].size() == 2);
  CHECK(system.level_shapes[1].size() == 2);
  int s0 = system.shape(0, 0).size();
  int s1 = system.shape(1, 0).size();
  CHECK(s1 % s0 == 0);
  CHECK(system.diagram.mult[0][0][0] == s1 / s0);  // exact interval tiling
  CHECK(system.diagram.mult[0][1][0] == 0);        // no singletons needed
  CHECK(system.diagram.mult[0][1][1] == 1);        // E chain
  CHECK(system.weight(0, 0) == 1);
  CHECK(system.singleton_weight(0) == 0);

  auto v = validate_system(system, 0);
  CHECK(v.iso_bounds_ok);
  CHECK(v.singleton_bounds_ok);
  CHECK(v.size_consistent);
  CHECK(v.weights_sum_ok);
  CHECK(v.harmonic_residual == 0);
  CHECK(v.singleton_weights_monotone);
}

TEST_CASE("bratteli tiling system over Z^2, depth 2") {
  auto z2 = make_group("Z^2");
  auto system = build_bratteli_tiling_system(z2, 2, canonical_folner_driver(z2));
  auto v = validate_system(system, make_ratio(1, 20));
  CHECK(v.iso_bounds_ok);
  CHECK(v.singleton_bounds_ok);
  CHECK(v.size_consistent);
  CHECK(v.harmonic_residual <= make_ratio(1, 20));
}

TEST_CASE("bratteli depth 3 with explicit sides") {
  auto z1 = make_group("Z^1");
  auto system = build_bratteli_tiling_system(z1, 3, explicit_sides_driver(z1, {4, 8, 16}));
  CHECK(system.shape(2, 0).size() == 16);
  auto v = validate_system(system, 0);
  CHECK(v.iso_bounds_ok);
  CHECK(v.singleton_bounds_ok);
  CHECK(v.size_consistent);
  CHECK(v.harmonic_residual == 0);

  // Geometric refinement partitions the top shape.
  auto tiles = refine_to_level(system, 2, 0, 0);
  CHECK(tiles.size() == 4);  // 16 / 4 intervals
  std::vector<char> seen(16, 0);
  for (const auto& t : tiles) {
    CHECK(t.vertex == 0);
    for (int idx : t.indices) {
      CHECK(!seen[static_cast<std::size_t>(idx)]);
      seen[static_cast<std::size_t>(idx)] = 1;
    }
  }
  for (char c : seen) CHECK(c == 1);
}

TEST_CASE("bratteli tiling system over H3, depth 1") {
  auto h = make_group("H3");
  auto system = build_bratteli_tiling_system(h, 1, canonical_folner_driver(h));
  CHECK(isoperimetric(system.shape(0, 0).shape) <= make_ratio(1, 2));
  auto v = validate_system(system, 0);
  CHECK(v.iso_bounds_ok);
  CHECK(v.weights_sum_ok);
}

TEST_CASE("empirical harmonic weights") {
  auto z1 = make_group("Z^1");
  // One level, one shape of size 4; H an exact multiple: m(shape) = 1.
  auto system = build_bratteli_tiling_system(z1, 1, explicit_sides_driver(z1, {4}));
  auto w = empirical_harmonic(system, {interval(z1, 0, 20)});
  CHECK(w.weights[0][0] == 1);
  CHECK(w.weights[0][1] == 0);
  CHECK(w.tiled_ok[0]);

  // Z^2 box with a remainder strip: m(E) is the measured leftover fraction.
  auto z2 = make_group("Z^2");
  auto system2 = build_bratteli_tiling_system(z2, 1, explicit_sides_driver(z2, {8}));
  auto w2 = empirical_harmonic(system2, {box2(z2, 20)});
  CHECK(w2.weights[0][1] == make_ratio(144, 400));
  CHECK(w2.weights[0][0] == make_ratio(256, 400));
}

TEST_CASE("frequency stability under puncture (finite l42)") {
  auto z1 = make_group("Z^1");
  auto system = build_bratteli_tiling_system(z1, 2, explicit_sides_driver(z1, {4, 8}));
  auto host = interval(z1, 0, 32);
  auto w = empirical_harmonic(system, {host});
  REQUIRE(w.tiled_ok[0]);

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 8; ++trial) {
    // Puncture a small fraction of the host.
    std::vector<char> in_j(static_cast<std::size_t>(host.size()), 1);
    int removed = 1 + static_cast<int>(rng() % 4);
    for (int k = 0; k < removed; ++k) in_j[rng() % static_cast<std::uint64_t>(host.size())] = 0;
    long long missing = 0;
    for (char c : in_j) missing += c ? 0 : 1;

    for (int level = 0; level < 2; ++level) {
      auto tiles = host_tiles_at_level(system, w.top_tilings[0], level);
      for (std::size_t v = 0; v + 1 < system.level_shapes[static_cast<std::size_t>(level)].size(); ++v) {
        long long inside = 0;
        for (const auto& t : tiles) {
          if (t.vertex != static_cast<int>(v)) continue;
          bool contained = true;
          for (int idx : t.indices)
            if (!in_j[static_cast<std::size_t>(idx)]) contained = false;
          if (contained) inside += static_cast<long long>(t.indices.size());
        }
        mpq_class deviation = abs(w.weights[static_cast<std::size_t>(level)][v] -
                                  make_ratio(inside, host.size()));
        mpq_class allowance =
            mpq_class(system.shape(level, static_cast<int>(v)).size()) * make_ratio(missing, host.size());
        CHECK(deviation <= allowance);
      }
    }
  }
}
