// Acceptance suite: one criterion per run entry, exact tolerances pinned in
// code, one PASS/FAIL line each.  Exit status is the number of failures.

#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include "frk/cli.hpp"
#include "frk/embed.hpp"
#include "frk/report.hpp"

using namespace frk;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string& what) {
  if (!cond) throw Failure(what);
}

const RationalField Q;

// --- 1. zero-divisor rank -----------------------------------------------------

void criterion_zero_divisor() {
  auto zc = make_group("Z^1 x C2");
  auto a = parse_element(zc, Q, "1 + t");
  auto kernel = folner_rank_kernel(a, {4, 8, 16, 32});
  for (const auto& stage : kernel.stages)
    require(stage.estimate.value == make_ratio(1, 2),
            "kernel estimate at n=" + std::to_string(stage.estimate.parameter) + " is not 1/2");
  for (long long m : {5, 10, 20}) {
    auto stage = quotient_rank(a, {m});
    require(stage.estimate.value == make_ratio(1, 2),
            "quotient estimate at m=" + std::to_string(m) + " is not 1/2");
  }
}

// --- 2. Lueck agreement -------------------------------------------------------

void criterion_lueck_agreement() {
  auto z1 = make_group("Z^1");
  auto a = parse_element(z1, Q, "g0 - 1");
  auto folner = folner_rank_image(a, {40}, 1).stages.back().estimate.value;
  auto quotient_value = quotient_rank(a, {40}).estimate.value;
  require(folner == make_ratio(38, 40), "folner image at n=40 is not 38/40");
  require(quotient_value == make_ratio(39, 40), "quotient at m=40 is not 39/40");
  mpq_class gap = abs(folner - quotient_value);
  require(gap == make_ratio(1, 40), "gap is not exactly 1/40");
  require(gap <= make_ratio(1, 20), "gap exceeds 0.05");
  require(abs(folner - 1) <= make_ratio(1, 20), "folner estimate not within 0.05 of 1");
  require(abs(quotient_value - 1) <= make_ratio(1, 20), "quotient estimate not within 0.05 of 1");
}

// --- 3. matrix rank extension ---------------------------------------------------

void criterion_matrix_rank() {
  auto zc = make_group("Z^1 x C2");
  auto delta = parse_matrix(zc, Q, "g0 - 1, 0; 0, 1 + t");
  auto report = matrix_rank_estimate(delta, {32}, 1);
  auto value = report.stages.back().estimate.value;
  require(abs(value - make_ratio(3, 2)) <= make_ratio(1, 10),
          "matrix estimate " + value.get_str() + " not within 0.1 of 3/2");
}

// --- 4. properness lemma --------------------------------------------------------

void criterion_properness() {
  GaussianRationalField qi;
  std::mt19937_64 rng(0xacce97);
  auto random_scalar = [&]() {
    return GaussianRational{mpq_class(static_cast<long>(rng() % 9) - 4),
                            mpq_class(static_cast<long>(rng() % 9) - 4)};
  };
  for (int trial = 0; trial < 200; ++trial) {
    int n = 1 + static_cast<int>(rng() % 6);
    SparseMatrixBuilder<GaussianRationalField> ab(qi, n, n), bb(qi, n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (rng() % 2) ab.add(i, j, random_scalar());
        if (rng() % 2) bb.add(i, j, random_scalar());
      }
    auto a = ab.build(), b = bb.build();
    int rs = rank(a * a.star() + b * b.star());
    require(rs >= rank(a) && rs >= rank(b),
            "properness failed at trial " + std::to_string(trial));
  }
}

// --- 5. quasitiling postconditions ----------------------------------------------

void criterion_quasitiling() {
  auto z2 = make_group("Z^2");
  QuasitileOptions opts;
  opts.epsilon = make_ratio(1, 5);
  auto shapes = std::vector<TileShape>{make_tile_shape(folner_set(z2, 8).set, 0),
                                       make_tile_shape(folner_set(z2, 4).set, 1)};
  for (int host_n : {20, 40}) {
    auto tiling = quasitile_subset(z2, folner_set(z2, host_n).set, shapes, opts);
    require(check_epsilon_disjoint(tiling.placements, opts.epsilon).verified,
            "epsilon-disjointness not verified on the " + std::to_string(host_n) + " box");
    auto cover = check_epsilon_cover(tiling, opts.epsilon);
    require(cover.ratio >= make_ratio(4, 5),
            "cover ratio below 0.8 on the " + std::to_string(host_n) + " box");
  }
  // Exact divisibility: 8 | 40 and the {8,4} pair fills 20 exactly.
  auto pure = quasitile_subset(z2, folner_set(z2, 40).set,
                               {make_tile_shape(folner_set(z2, 8).set, 0)}, opts);
  require(check_epsilon_cover(pure, opts.epsilon).ratio == 1,
          "exact-divisibility instance 40/8 not covered exactly");
  auto mixed = quasitile_subset(z2, folner_set(z2, 20).set, shapes, opts);
  require(check_epsilon_cover(mixed, opts.epsilon).ratio == 1,
          "composite instance 20/{8,4} not covered exactly");
}

// --- 6. Bratteli tiling-system invariants ---------------------------------------

void criterion_bratteli() {
  auto z1 = make_group("Z^1");
  auto system = build_bratteli_tiling_system(z1, 3, canonical_folner_driver(z1));
  auto v = validate_system(system, 0);
  require(v.iso_bounds_ok, "i(F^n) <= 2^-n failed over Z");
  require(v.singleton_bounds_ok, "singleton multiplicity bound failed over Z");
  require(v.size_consistent, "size consistency failed over Z");
  require(v.weights_sum_ok, "weights do not sum to 1 over Z");
  require(v.harmonic_residual == 0, "empirical harmonic residual over Z is nonzero");

  auto z2 = make_group("Z^2");
  auto system2 = build_bratteli_tiling_system(z2, 2, canonical_folner_driver(z2));
  auto v2 = validate_system(system2, make_ratio(1, 20));
  require(v2.iso_bounds_ok && v2.singleton_bounds_ok && v2.size_consistent,
          "structural invariants failed over Z^2");
  require(v2.harmonic_residual <= make_ratio(1, 20),
          "harmonic residual over Z^2 exceeds 0.05");
}

// --- 7. Cauchy and homomorphism defects -----------------------------------------

void criterion_defects() {
  auto z1 = make_group("Z^1");
  auto system = build_bratteli_tiling_system(z1, 3, canonical_folner_driver(z1));
  std::vector<GroupRingElement<RationalField>> elems{
      parse_element(z1, Q, "g0 - 1"), parse_element(z1, Q, "g0 + g0^-1 - 2"),
      parse_element(z1, Q, "1")};
  for (const auto& a : elems) {
    mpq_class prev = -1;
    for (int level = 0; level + 1 < system.depth(); ++level) {
      auto d = cauchy_defect(a, system, level);  // throws on bound violation
      require(d.defect <= std::max(d.bound, d.sharp_bound), "cauchy defect above bound");
      if (prev >= 0)
        require(d.defect <= prev, "cauchy defect not decreasing with the level");
      prev = d.defect;
    }
    for (const auto& b : elems) {
      for (int level = 0; level < system.depth(); ++level) {
        auto d = hom_defect(a, b, system, level);
        require(d.defect <= d.bound, "hom defect above bound");
      }
    }
  }
}

// --- 8. level-rank convergence ---------------------------------------------------

void criterion_level_rank() {
  auto zc = make_group("Z^1 x C2");
  auto system = build_bratteli_tiling_system(zc, 3, canonical_folner_driver(zc));
  auto a = parse_element(zc, Q, "1 + t");
  std::vector<int> levels{0, 1, 2};
  auto report = rank_convergence(a, system, levels, mpq_class(make_ratio(1, 2)));
  for (const auto& stage : report.stages) {
    require(stage.slack_terms.at("gap") <= stage.bound,
            "level " + std::to_string(stage.estimate.parameter) +
                " gap exceeds m(E_i) + boundary slack");
  }
  require(report.stages.back().slack_terms.at("gap") <= make_ratio(1, 10),
          "deepest-level gap exceeds 0.1");
}

// --- 9. sofic identities ----------------------------------------------------------

void criterion_sofic() {
  auto z1 = make_group("Z^1");
  auto system = build_bratteli_tiling_system(z1, 2, explicit_sides_driver(z1, {5, 10}));
  auto a = parse_element(z1, Q, "g0 - 1");
  QuasitileOptions opts;
  opts.epsilon = make_ratio(1, 5);
  opts.strict_disjoint = true;

  std::vector<TauTiling> top_tilings, refined_tilings;
  for (long long m : {50, 100, 200}) {
    auto sofic = sofic_from_quotient(z1, {m}, 1);
    auto tiling = tau_tiling(system, sofic, opts, 1);
    auto fid = first_identity_defect(a, tiling);  // throws if defect > 1 - agree
    require(fid.rank_defect <= 1 - fid.agree_fraction, "rank defect above column bound");
    require(fid.agree_fraction >= make_ratio(4, 5),
            "agreement below 0.8 on the cycle of " + std::to_string(m));
    top_tilings.push_back(tiling);
    refined_tilings.push_back(tau_tiling(system, sofic, opts, 0));
  }
  // tau gap <= reported frequency deviation at every stage (both levels).
  auto report_top = tau_rank_convergence(pi_level(a, system, 1), system, top_tilings);
  for (const auto& stage : report_top.stages)
    require(stage.slack_terms.at("gap") <= stage.bound, "tau gap exceeds frequency deviation");
  auto report_refined = tau_rank_convergence(pi_level(a, system, 0), system, refined_tilings);
  for (const auto& stage : report_refined.stages)
    require(stage.slack_terms.at("gap") <= stage.bound, "tau gap exceeds frequency deviation");
}

// --- 10. determinism ---------------------------------------------------------------

void criterion_determinism() {
  auto run_once = [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    require(code == 0, "command failed: " + err.str());
    return out.str();
  };
  for (const std::vector<std::string>& args :
       {std::vector<std::string>{"luck", "--group", "Z^1", "--elem", "g0 - 1", "--n", "10,20",
                                 "--m", "10,20", "--seed", "42"},
        std::vector<std::string>{"rank", "--group", "Z^1 x C2", "--elem", "1 + t", "--n", "4,8",
                                 "--seed", "42"},
        std::vector<std::string>{"bratteli", "--group", "Z^1", "--depth", "3", "--seed", "42"},
        std::vector<std::string>{"quasitile", "--group", "Z^2", "--host-n", "20", "--shapes",
                                 "8,4", "--seed", "42"}}) {
    require(run_once(args) == run_once(args), "rerun with identical seed produced different bytes");
  }
}

struct Criterion {
  int id;
  std::string title;
  double time_limit_s;
  std::function<void()> body;
};

}  // namespace

int main() {
  std::vector<Criterion> criteria{
      {1, "zero-divisor rank of 1+t is exactly 1/2", 5.0, criterion_zero_divisor},
      {2, "Folner and quotient estimates agree for g0-1 on Z", 5.0, criterion_lueck_agreement},
      {3, "2x2 mixed matrix estimate within 0.1 of 3/2", 30.0, criterion_matrix_rank},
      {4, "rank(AA*+BB*) >= max(rank A, rank B) on 200 random Q(i) pairs", 10.0,
       criterion_properness},
      {5, "quasitiling postconditions on Z^2 boxes", 30.0, criterion_quasitiling},
      {6, "Bratteli tiling-system invariants (Z depth 3, Z^2 depth 2)", 60.0, criterion_bratteli},
      {7, "Cauchy and homomorphism defects within recomputed bounds", 60.0, criterion_defects},
      {8, "level ranks of 1+t converge to 1/2 within slack", 60.0, criterion_level_rank},
      {9, "sofic identities on quotient cycles", 60.0, criterion_sofic},
      {10, "byte-identical reruns with a fixed seed", 30.0, criterion_determinism},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    std::string message;
    bool ok = true;
    try {
      c.body();
    } catch (const std::exception& e) {
      ok = false;
      message = e.what();
    }
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (ok && elapsed > c.time_limit_s) {
      ok = false;
      message = "runtime " + std::to_string(elapsed) + "s exceeds " +
                std::to_string(c.time_limit_s) + "s";
    }
    std::ostringstream line;
    line.setf(std::ios::fixed);
    line.precision(2);
    line << (ok ? "[PASS]" : "[FAIL]") << " criterion " << c.id << " (" << elapsed
         << "s): " << c.title;
    if (!ok) line << " -- " << message;
    std::cout << line.str() << "\n";
    if (!ok) ++failures;
  }
  return failures;
}
