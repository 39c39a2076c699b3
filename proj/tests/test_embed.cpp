#include <random>

#include "doctest.h"
#include "frk/embed.hpp"

using namespace frk;

namespace {

const RationalField Q;

GroupRingElement<RationalField> elem(const MarkedGroup& g, const std::string& text) {
  return parse_element(g, Q, text);
}

BratteliTilingSystem z1_system(int depth) {
  auto z1 = make_group("Z^1");
  std::vector<int> sides{4, 8, 16, 32};
  sides.resize(static_cast<std::size_t>(depth));
  return build_bratteli_tiling_system(z1, depth, explicit_sides_driver(z1, sides));
}

std::mt19937_64 rng(0xe31bed);

template <class F>
LevelElement<F> random_level_element(const F& field, const BratteliTilingSystem& system, int level) {
  auto x = level_zero(field, system, level);
  for (auto& block : x.blocks) {
    int n = block.rows();
    SparseMatrixBuilder<F> b(field, n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (rng() % 3 == 0) b.add(i, j, field.from_long(static_cast<long>(rng() % 7) - 3));
    block = b.build();
  }
  return x;
}

}  // namespace

TEST_CASE("pi_level blocks") {
  auto system = z1_system(2);
  auto z1 = system.group;
  auto a = elem(z1, "g0 - 1");

  auto x = pi_level(a, system, 0);
  CHECK(x.blocks[0].rows() == 4);
  CHECK(rank(x.blocks[0]) == 2);  // columns 1 and 2 only
  CHECK(x.blocks[0].at(1, 0) == Q.zero());
  CHECK(x.blocks[0].at(2, 1) == Q.one());
  CHECK(x.blocks[0].at(1, 1) == -Q.one());
  CHECK(x.blocks[1].is_zero());  // singleton block vanishes for r >= 1

  auto one = pi_level(elem(z1, "1"), system, 0);
  CHECK(one.blocks[0] == identity_matrix(Q, 4));
  CHECK(one.blocks[1] == identity_matrix(Q, 1));

  auto zero = pi_level(gr_zero(z1, Q), system, 0);
  CHECK(zero.blocks[0].is_zero());
  CHECK(zero.blocks[1].is_zero());
}

TEST_CASE("phi_embed") {
  auto system = z1_system(2);
  auto z1 = system.group;

  // Identity maps to the identity (singleton coordinates included).
  auto id1 = phi_embed(level_identity(Q, system, 0), system);
  CHECK(id1.blocks[0] == identity_matrix(Q, 8));
  CHECK(id1.blocks[1] == identity_matrix(Q, 1));

  auto z0 = phi_embed(level_zero(Q, system, 0), system);
  CHECK(z0.blocks[0].is_zero());

  // Rank additivity along the diagonal placement.
  for (int trial = 0; trial < 10; ++trial) {
    auto x = random_level_element(Q, system, 0);
    auto y = phi_embed(x, system);
    long long expected = 0;
    for (std::size_t a = 0; a < x.blocks.size(); ++a)
      expected += system.diagram.mult[0][a][0] * rank(x.blocks[a]);
    CHECK(rank(y.blocks[0]) == expected);
  }
}

TEST_CASE("rk_phi") {
  auto system = z1_system(1);
  SparseMatrixBuilder<RationalField> b(Q, 4, 4);
  b.add(0, 0, Q.one());
  b.add(1, 1, Q.one());
  LevelElement<RationalField> x;
  x.level = 0;
  x.blocks.push_back(b.build());
  x.blocks.push_back(SparseMatrixBuilder<RationalField>(Q, 1, 1).build());
  CHECK(rk_phi(x, system) == make_ratio(2, 4));

  CHECK(rk_phi(level_identity(Q, system, 0), system) == 1);

  // Hand-weighted: sizes 2 and 4, m = (1/3, 2/3), ranks (1, 2) -> 1/2.
  LevelElement<RationalField> y;
  y.level = 0;
  SparseMatrixBuilder<RationalField> b2(Q, 2, 2);
  b2.add(0, 0, Q.one());
  y.blocks.push_back(b2.build());
  SparseMatrixBuilder<RationalField> b4(Q, 4, 4);
  b4.add(0, 1, Q.one());
  b4.add(2, 3, Q.one());
  y.blocks.push_back(b4.build());
  CHECK(rk_phi(y, {make_ratio(1, 3), make_ratio(2, 3)}) == make_ratio(1, 2));

  CHECK_THROWS_AS(rk_phi(y, {make_ratio(1, 3), make_ratio(1, 3)}), PreconditionError);
}

TEST_CASE("rk_phi is preserved by phi_embed on exact systems") {
  auto system = z1_system(3);
  GaussianRationalField qi;
  for (int level = 0; level < 2; ++level) {
    for (int trial = 0; trial < 6; ++trial) {
      auto x = random_level_element(qi, system, level);
      auto y = phi_embed(x, system);
      CHECK(rk_phi(x, system) == rk_phi(y, system));
    }
  }
}

TEST_CASE("rk_phi rank axioms at fixed level") {
  auto system = z1_system(2);
  for (int trial = 0; trial < 8; ++trial) {
    auto x = random_level_element(Q, system, 1);
    auto y = random_level_element(Q, system, 1);
    auto sum = rk_phi(le_add(x, y), system);
    CHECK(sum <= rk_phi(x, system) + rk_phi(y, system));
    auto prod = rk_phi(le_mul(x, y), system);
    CHECK(prod <= rk_phi(x, system));
    CHECK(prod <= rk_phi(y, system));
  }
}

TEST_CASE("cauchy defect") {
  auto system = z1_system(3);
  auto z1 = system.group;
  auto a = elem(z1, "g0 - 1");

  auto d0 = cauchy_defect(a, system, 0);
  CHECK(d0.defect == make_ratio(2, 8));  // two seam columns in [0,8)
  CHECK(d0.defect <= d0.sharp_bound);
  CHECK(d0.sharp_bound <= d0.bound);

  auto d1 = cauchy_defect(a, system, 1);
  CHECK(d1.defect == make_ratio(2, 16));
  CHECK(d1.defect < d0.defect);  // Cauchy: defects shrink with the level

  CHECK(cauchy_defect(elem(z1, "1"), system, 0).defect == 0);
  CHECK(cauchy_defect(gr_zero(z1, Q), system, 0).defect == 0);
}

TEST_CASE("hom defect") {
  auto system = z1_system(3);
  auto z1 = system.group;
  auto a = elem(z1, "g0 - 1");

  for (int level = 0; level < 3; ++level) {
    auto d = hom_defect(a, a, system, level);
    CHECK(d.defect <= d.bound);
  }
  auto d1 = hom_defect(a, a, system, 1);
  CHECK(d1.defect == make_ratio(2, 8));
  CHECK(d1.bound == make_ratio(4, 8));

  CHECK(hom_defect(elem(z1, "1"), elem(z1, "1"), system, 1).defect == 0);
  CHECK(hom_defect(a, gr_zero(z1, Q), system, 1).defect == 0);

  // Support collapse: a * a^{-1} = 1 hits only the singleton term.
  auto gamma = elem(z1, "g0");
  auto gamma_inv = elem(z1, "g0^-1");
  auto dc = hom_defect(gamma, gamma_inv, system, 1);
  CHECK(dc.defect <= dc.bound);
}

TEST_CASE("star defect over Q(i)") {
  auto system = z1_system(2);
  GaussianRationalField qi;
  auto z1 = system.group;
  for (const char* text : {"(0 + 1 i)*g0 - 1", "g0 + g0^-1", "(1/2 + 1/3 i)*g0^2"}) {
    auto a = parse_element(z1, qi, text);
    for (int level = 0; level < 2; ++level) {
      auto d = star_defect(a, system, level);
      CHECK(d.defect <= d.bound);
    }
  }
}

TEST_CASE("rank convergence to the Folner rank") {
  auto zc = make_group("Z^1 x C2");
  auto system = build_bratteli_tiling_system(zc, 3, canonical_folner_driver(zc));
  auto a = parse_element(zc, Q, "1 + t");
  auto report = rank_convergence(a, system, {0, 1, 2}, mpq_class(make_ratio(1, 2)));
  for (const auto& stage : report.stages) {
    CHECK(stage.slack_terms.at("gap") <= stage.bound);
  }
  // Gap strictly shrinks along these exact levels.
  CHECK(report.stages[2].slack_terms.at("gap") < report.stages[0].slack_terms.at("gap"));

  // a = 0: exactly 0 at all levels.
  auto zreport = rank_convergence(gr_zero(zc, Q), system, {0, 1, 2}, mpq_class(0));
  for (const auto& stage : zreport.stages) CHECK(stage.estimate.value == 0);

  // a = 1: values tend to 1.
  auto oreport = rank_convergence(parse_element(zc, Q, "1"), system, {0, 2}, mpq_class(1));
  CHECK(oreport.stages[1].estimate.value == 1);  // r = 0, no boundary loss
}

TEST_CASE("sofic graphs and good sets") {
  auto z1 = make_group("Z^1");

  auto cyc = sofic_from_quotient(z1, {10}, 2);
  const auto& mask = cyc.good_mask(2);
  CHECK(std::count(mask.begin(), mask.end(), 1) == 10);  // every ball is a 5-path

  auto tiny = sofic_from_quotient(z1, {4}, 2);
  const auto& tmask = tiny.good_mask(2);
  CHECK(std::count(tmask.begin(), tmask.end(), 1) == 0);  // C4 balls are not 5-paths

  auto fol = sofic_from_folner(z1, 10, 1);
  const auto& fmask = fol.good_mask(1);
  CHECK(std::count(fmask.begin(), fmask.end(), 1) == 8);
  CHECK(fmask[0] == 0);
  CHECK(fmask[9] == 0);

  CHECK(std::count(fol.good_mask(0).begin(), fol.good_mask(0).end(), 1) == 10);

  // V^r contains the r-interior of a Folner box, exactly here.
  auto z2 = make_group("Z^2");
  auto box = sofic_from_folner(z2, 6, 1);
  auto fset = folner_set(z2, 6).set;
  auto bnd = boundary(fset, 1);
  for (int v = 0; v < fset.size(); ++v)
    CHECK(static_cast<bool>(box.good_mask(1)[static_cast<std::size_t>(v)]) == !bnd.contains(fset.at(v)));
}

TEST_CASE("psi map") {
  auto z1 = make_group("Z^1");
  auto cyc = sofic_from_quotient(z1, {12}, 1);
  auto a = elem(z1, "g0 - 1");
  auto m = psi_map(a, cyc);
  CHECK(m.rows() == 12);
  CHECK(rank(m) == 11);  // circulant shift minus identity

  auto one = psi_map(elem(z1, "1"), cyc);
  CHECK(one == identity_matrix(Q, 12));

  CHECK(psi_map(gr_zero(z1, Q), cyc).is_zero());

  // Folner-graph psi: diagonal indicator of V^r for a = 1 at r = 0.
  auto fol = sofic_from_folner(z1, 8, 1);
  auto pa = psi_map(a, fol);
  // Columns on the boundary are zeroed.
  CHECK(pa.at(1, 0) == Q.zero());
  CHECK(pa.at(2, 1) == Q.one());
}

TEST_CASE("psi is an approximate homomorphism") {
  auto z1 = make_group("Z^1");
  for (int mod : {20, 40}) {
    auto cyc = sofic_from_quotient(z1, {mod}, 2);
    auto a = elem(z1, "g0 - 1");
    auto b = elem(z1, "g0 + 1");
    auto defect = psi_map(a, cyc) * psi_map(b, cyc) - psi_map(gr_mul(a, b), cyc);
    auto good2 = compute_good_set(z1, *cyc.graph, 2);
    long long bad = std::count(good2.begin(), good2.end(), 0);
    CHECK(make_ratio(rank(defect), mod) <= make_ratio(bad, mod));
  }
  // On a Folner path the bad set is the 2-boundary.
  auto fol = sofic_from_folner(z1, 30, 2);
  auto a = elem(z1, "g0 - 1");
  auto defect = psi_map(a, fol) * psi_map(a, fol) - psi_map(gr_mul(a, a), fol);
  auto good2 = compute_good_set(z1, *fol.graph, 2);
  long long bad = std::count(good2.begin(), good2.end(), 0);
  CHECK(make_ratio(rank(defect), 30) <= make_ratio(bad, 30));
}

TEST_CASE("tau transport onto quotient cycles") {
  auto z1 = make_group("Z^1");
  auto system = build_bratteli_tiling_system(z1, 2, explicit_sides_driver(z1, {5, 10}));
  auto a = elem(z1, "g0 - 1");

  QuasitileOptions strict;
  strict.epsilon = make_ratio(1, 5);
  strict.strict_disjoint = true;
  std::vector<TauTiling> tilings;
  for (int mod : {50, 100}) {
    tilings.push_back(tau_tiling(system, sofic_from_quotient(z1, {mod}, 1), strict, 0));
  }
  // Exact interval tilings: every vertex covered at level 0 by [0,5) tiles.
  CHECK(tilings[0].q_counts[0] == 50);
  CHECK(tilings[0].q_counts[1] == 0);

  auto x = pi_level(a, system, 0);
  auto report = tau_rank_convergence(x, system, tilings);
  for (const auto& stage : report.stages) {
    CHECK(stage.slack_terms.at("gap") == 0);  // exact frequencies, gap 0
  }
  CHECK(report.stages[0].estimate.value == make_ratio(3, 5));

  // Identity level element: gap equals the uncovered fraction.
  auto cyc53 = tau_tiling(system, sofic_from_quotient(z1, {53}, 1), strict, 0);
  auto id_report = tau_rank_convergence(level_identity(Q, system, 0), system, {cyc53});
  CHECK(id_report.stages[0].estimate.value == make_ratio(50, 53));
  CHECK(id_report.stages[0].slack_terms.at("gap") == make_ratio(3, 53));

  auto zero_report = tau_rank_convergence(level_zero(Q, system, 0), system, {cyc53});
  CHECK(zero_report.stages[0].estimate.value == 0);
}

TEST_CASE("first identity defect") {
  auto z1 = make_group("Z^1");
  auto system = build_bratteli_tiling_system(z1, 2, explicit_sides_driver(z1, {5, 10}));
  auto a = elem(z1, "g0 - 1");

  QuasitileOptions strict;
  strict.epsilon = make_ratio(1, 5);
  strict.strict_disjoint = true;
  auto t100 = tau_tiling(system, sofic_from_quotient(z1, {100}, 1), strict, 1);
  auto fid = first_identity_defect(a, t100);
  CHECK(fid.agree_fraction == make_ratio(80, 100));  // two boundary columns per 10-tile
  CHECK(fid.rank_defect <= 1 - fid.agree_fraction);

  auto zero_fid = first_identity_defect(gr_zero(z1, Q), t100);
  CHECK(zero_fid.agree_fraction == 1);
  CHECK(zero_fid.rank_defect == 0);

  // Finer tiles have more boundary: agreement drops.
  auto t100_fine = tau_tiling(system, sofic_from_quotient(z1, {100}, 1), strict, 0);
  // Build a one-level system with short tiles to compare.
  auto short_system = build_bratteli_tiling_system(z1, 1, explicit_sides_driver(z1, {5}));
  auto t_short = tau_tiling(short_system, sofic_from_quotient(z1, {100}, 1), strict, 0);
  auto fid_short = first_identity_defect(a, t_short);
  CHECK(fid_short.agree_fraction == make_ratio(60, 100));
  CHECK(fid_short.agree_fraction < fid.agree_fraction);
  (void)t100_fine;
}

TEST_CASE("tau with overlapping quasitiles discards overlap tiles") {
  auto z1 = make_group("Z^1");
  auto system = build_bratteli_tiling_system(z1, 2, explicit_sides_driver(z1, {5, 10}));
  auto a = elem(z1, "g0 - 1");

  // Non-strict greedy on a cycle of 54 places a sixth, overlapping tile; the
  // refined tiles that stick into an overlap get discarded, and all bounds
  // still hold.
  QuasitileOptions loose;
  loose.epsilon = make_ratio(7, 10);
  auto t = tau_tiling(system, sofic_from_quotient(z1, {54}, 1), loose, 0);
  CHECK(t.top.placements.size() == 6);
  CHECK(t.tiles.size() < 12);  // at least one refined tile discarded
  CHECK(check_epsilon_disjoint(t.top.placements, loose.epsilon).verified);

  auto x = pi_level(a, system, 0);
  auto report = tau_rank_convergence(x, system, {t});  // throws if gap > deviation
  CHECK(report.stages[0].bound >= report.stages[0].slack_terms.at("gap"));

  auto fid = first_identity_defect(a, t);
  CHECK(fid.rank_defect <= 1 - fid.agree_fraction);
}
