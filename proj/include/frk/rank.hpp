#pragma once

#include <gmpxx.h>

#include <map>
#include <set>
#include <string>
#include <vector>

#include "frk/folner.hpp"
#include "frk/groupring.hpp"
#include "frk/numutil.hpp"
#include "frk/sparse.hpp"

namespace frk {

// Rank estimators for elements a of K[G] and matrices over K[G]:
//   - folner_image: rk(a) = lim dim(W_n a) / |F_n| with W_n the coordinate
//     space of F_n \ boundary_s(F_n);
//   - folner_kernel: rk(a) = 1 - lim dim{ z on F_n : z a = 0 } / |F_n|;
//   - quotient: 1 - dim Ker(pi(a)) / |G : N|  over finite quotients.
// All values are exact rationals; reported per-stage error bounds are
// engineering brackets (the convergence theorems carry no rate) and are
// flagged as heuristic.

enum class RankMethod { folner_kernel, folner_image, quotient, rk_phi, tau };

inline std::string to_string(RankMethod m) {
  switch (m) {
    case RankMethod::folner_kernel: return "folner_kernel";
    case RankMethod::folner_image: return "folner_image";
    case RankMethod::quotient: return "quotient";
    case RankMethod::rk_phi: return "rk_phi";
    case RankMethod::tau: return "tau";
  }
  return "?";
}

struct RankEstimate {
  RankMethod method = RankMethod::folner_image;
  long long parameter = 0;  // Folner index n or quotient modulus parameter
  long long window = 0;     // s for image-form estimators
  mpq_class value;          // in [0, k]
  long long cert_num = 0;   // dimension certificate: value = cert_num/cert_den
  long long cert_den = 1;
};

struct ReportStage {
  RankEstimate estimate;
  mpq_class bound;            // per-stage error bracket
  bool bound_heuristic = true;
  std::map<std::string, mpq_class> slack_terms;
};

struct ConvergenceReport {
  std::string label;
  std::vector<ReportStage> stages;    // ordered by (method, parameter)
  std::vector<mpq_class> gaps;        // successive |difference| per method run
  std::string verdict;                // empty, "consistent", or "inconsistent"
  mpq_class final_gap;
};

namespace detail {

inline RankEstimate checked_estimate(RankMethod method, long long parameter, long long window,
                                     long long num, long long den, int k) {
  RankEstimate e;
  e.method = method;
  e.parameter = parameter;
  e.window = window;
  e.cert_num = num;
  e.cert_den = den;
  e.value = make_ratio(num, den);
  if (e.value < 0 || e.value > k)
    throw InvariantViolation("rank estimate " + e.value.get_str() + " outside [0, " + std::to_string(k) + "]");
  return e;
}

inline void append_gaps(ConvergenceReport& r) {
  r.gaps.clear();
  for (std::size_t i = 1; i < r.stages.size(); ++i) {
    if (r.stages[i].estimate.method != r.stages[i - 1].estimate.method) continue;
    r.gaps.push_back(abs(r.stages[i].estimate.value - r.stages[i - 1].estimate.value));
  }
}

}  // namespace detail

// Matrix of z -> z*a from the coordinate space of W = F \ boundary_s(F) into
// the coordinate space of F.  Well-defined because supp(z) in F \ boundary_s F
// and s >= support_radius(a) force supp(z*a) inside F.
template <class F>
SparseMatrix<F> right_mult_matrix(const GroupRingElement<F>& a, const FiniteSubset& fset, int s) {
  const MarkedGroup& g = fset.owner();
  int r = a.support_radius();
  if (s < r)
    throw PreconditionError("window parameter s = " + std::to_string(s) +
                            " below support radius " + std::to_string(r));
  FiniteSubset bnd = s >= 1 ? boundary(fset, s) : FiniteSubset(g, {});
  std::vector<int> window;
  for (int v = 0; v < fset.size(); ++v)
    if (!bnd.contains(fset.at(v))) window.push_back(v);

  SparseMatrixBuilder<F> b(a.field(), fset.size(), static_cast<int>(window.size()));
  for (int col = 0; col < static_cast<int>(window.size()); ++col) {
    const GroupElement& x = fset.at(window[static_cast<std::size_t>(col)]);
    for (const auto& [gamma, c] : a.terms()) {
      int row = fset.index_of(g.mul(x, gamma));
      if (row < 0) throw InvariantViolation("image of the window left the Folner set");
      b.add(row, col, c);
    }
  }
  return b.build();
}

// Full right-multiplication matrix from F into the enlarged codomain F*supp(a),
// so that "za = 0" means zero in K[G], not zero truncated.
template <class F>
SparseMatrix<F> kernel_matrix(const GroupRingElement<F>& a, const FiniteSubset& fset) {
  const MarkedGroup& g = fset.owner();
  std::vector<GroupElement> codomain;
  for (int v = 0; v < fset.size(); ++v)
    for (const auto& [gamma, c] : a.terms()) codomain.push_back(g.mul(fset.at(v), gamma));
  FiniteSubset rows(g, std::move(codomain));
  SparseMatrixBuilder<F> b(a.field(), rows.size(), fset.size());
  for (int col = 0; col < fset.size(); ++col)
    for (const auto& [gamma, c] : a.terms())
      b.add(rows.index_of(g.mul(fset.at(col), gamma)), col, c);
  return b.build();
}

namespace detail {

// Per-stage heuristic bracket: (|boundary_s F| + window loss) / |F|, scaled by
// the matrix size k for matrix estimates.
inline mpq_class folner_stage_bound(const FiniteSubset& fset, int s, int k, long long window_size) {
  long long bnd = s >= 1 ? boundary(fset, s).size() : 0;
  long long loss = fset.size() - window_size;
  return mpq_class(k) * make_ratio(bnd + loss, fset.size());
}

}  // namespace detail

// Image-form estimator for a k x k matrix over K[G] (k = 1 recovers the
// element case).  The stage matrix maps (window space)^k into (F_n space)^k.
template <class F>
ConvergenceReport matrix_rank_estimate(const GroupRingMatrix<F>& delta, const std::vector<int>& n_list,
                                       int s) {
  const MarkedGroup& g = delta.owner();
  int k = delta.rows();
  if (delta.cols() != k) throw PreconditionError("rank estimation needs a square matrix");
  int r = delta.support_radius();
  if (s < r)
    throw PreconditionError("window parameter s = " + std::to_string(s) +
                            " below matrix support radius " + std::to_string(r));
  ConvergenceReport report;
  report.label = "folner_image";
  for (int n : n_list) {
    auto fol = folner_set(g, n);
    const FiniteSubset& fset = fol.set;
    FiniteSubset bnd = s >= 1 ? boundary(fset, s) : FiniteSubset(g, {});
    std::vector<int> window;
    for (int v = 0; v < fset.size(); ++v)
      if (!bnd.contains(fset.at(v))) window.push_back(v);

    int wn = static_cast<int>(window.size());
    SparseMatrixBuilder<F> b(delta.field(), fset.size() * k, wn * k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        for (const auto& [gamma, c] : delta.at(i, j).terms())
          for (int col = 0; col < wn; ++col) {
            int row = fset.index_of(g.mul(fset.at(window[static_cast<std::size_t>(col)]), gamma));
            if (row < 0) throw InvariantViolation("image of the window left the Folner set");
            b.add(j * fset.size() + row, i * wn + col, c);
          }
    int rk = rank(b.build());

    ReportStage stage;
    stage.estimate = detail::checked_estimate(RankMethod::folner_image, n, s, rk, fset.size(), k);
    stage.bound = detail::folner_stage_bound(fset, s, k, wn);
    if (fol.whole_group) stage.slack_terms.emplace("whole_group", mpq_class(1));
    report.stages.push_back(std::move(stage));
  }
  detail::append_gaps(report);
  return report;
}

template <class F>
GroupRingMatrix<F> element_as_matrix(const GroupRingElement<F>& a) {
  return GroupRingMatrix<F>(1, 1, {a});
}

template <class F>
ConvergenceReport folner_rank_image(const GroupRingElement<F>& a, const std::vector<int>& n_list, int s) {
  return matrix_rank_estimate(element_as_matrix(a), n_list, s);
}

// Kernel-form estimator: 1 - dim{ z on F_n : z a = 0 } / |F_n|.
template <class F>
ConvergenceReport folner_rank_kernel(const GroupRingElement<F>& a, const std::vector<int>& n_list) {
  const MarkedGroup& g = a.owner();
  int r = a.support_radius();
  ConvergenceReport report;
  report.label = "folner_kernel";
  for (int n : n_list) {
    auto fol = folner_set(g, n);
    const FiniteSubset& fset = fol.set;
    int dim = kernel_dim(kernel_matrix(a, fset));
    ReportStage stage;
    stage.estimate = detail::checked_estimate(RankMethod::folner_kernel, n, r,
                                              fset.size() - dim, fset.size(), 1);
    stage.bound = detail::folner_stage_bound(fset, r, 1, fset.size());
    if (fol.whole_group) stage.slack_terms.emplace("whole_group", mpq_class(1));
    report.stages.push_back(std::move(stage));
  }
  detail::append_gaps(report);
  return report;
}

// Lueck estimator: rank of the convolution action of pi(delta) on K[G/N]^k,
// normalized by |G/N|.  Exact at every stage.
template <class F>
ReportStage quotient_rank(const GroupRingMatrix<F>& delta, const std::vector<std::int64_t>& moduli) {
  const MarkedGroup& g = delta.owner();
  int k = delta.rows();
  if (delta.cols() != k) throw PreconditionError("rank estimation needs a square matrix");
  auto [q, pi] = quotient(g, moduli);
  auto elems = q.enumerate();
  FiniteSubset qset(q, elems);
  int qn = qset.size();

  auto projected = delta.projected(pi);
  SparseMatrixBuilder<F> b(delta.field(), qn * k, qn * k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      for (const auto& [t, c] : projected.at(i, j).terms())
        for (int u = 0; u < qn; ++u)
          b.add(j * qn + qset.index_of(q.mul(qset.at(u), t)), i * qn + u, c);
  int rk = rank(b.build());

  ReportStage stage;
  long long parameter = moduli.size() == 1 ? moduli[0] : q.order();
  stage.estimate = detail::checked_estimate(RankMethod::quotient, parameter, 0, rk, qn, k);
  stage.bound = 0;
  stage.bound_heuristic = false;

  // Injectivity warning: the quotient should be large enough that the
  // projection separates the support (diameter > 2 * support radius).
  int diameter = 0;
  {
    // Vertex-transitive, so ecc(identity) is the diameter.
    std::vector<GroupElement> frontier{q.identity()};
    std::set<GroupElement> seen{q.identity()};
    while (!frontier.empty()) {
      std::vector<GroupElement> next;
      for (const auto& x : frontier)
        for (const auto& gen : q.generators()) {
          auto y = q.mul(x, gen.element);
          if (seen.insert(y).second) next.push_back(y);
        }
      if (!next.empty()) ++diameter;
      frontier = std::move(next);
    }
  }
  if (diameter <= 2 * delta.support_radius())
    stage.slack_terms.emplace("injectivity_warning", mpq_class(1));
  return stage;
}

template <class F>
ReportStage quotient_rank(const GroupRingElement<F>& a, const std::vector<std::int64_t>& moduli) {
  return quotient_rank(element_as_matrix(a), moduli);
}

// Side-by-side Folner / quotient run.  The verdict compares the final stages:
// consistent iff |folner - quotient| <= sum of the final stage bounds.  For a
// single element both Folner forms run and the kernel form carries the
// comparison (it is the exact finite counterpart of the kernel-dimension
// limit); k x k matrices compare through the image form.
template <class F>
ConvergenceReport compare_report(const GroupRingMatrix<F>& delta, const std::vector<int>& n_list, int s,
                                 const std::vector<std::vector<std::int64_t>>& quotient_params) {
  ConvergenceReport merged;
  merged.label = "compare";
  ReportStage folner_final;
  if (delta.rows() == 1 && delta.cols() == 1) {
    ConvergenceReport kernel = folner_rank_kernel(delta.at(0, 0), n_list);
    merged.stages = kernel.stages;
    ConvergenceReport image = folner_rank_image(delta.at(0, 0), n_list, s);
    merged.stages.insert(merged.stages.end(), image.stages.begin(), image.stages.end());
    folner_final = kernel.stages.back();
  } else {
    ConvergenceReport image = matrix_rank_estimate(delta, n_list, s);
    merged.stages = image.stages;
    folner_final = image.stages.back();
  }
  ReportStage last_quotient;
  for (const auto& moduli : quotient_params) {
    last_quotient = quotient_rank(delta, moduli);
    merged.stages.push_back(last_quotient);
  }
  detail::append_gaps(merged);
  if (!quotient_params.empty()) {
    merged.final_gap = abs(folner_final.estimate.value - last_quotient.estimate.value);
    merged.verdict =
        merged.final_gap <= folner_final.bound + last_quotient.bound ? "consistent" : "inconsistent";
  }
  return merged;
}

}  // namespace frk
