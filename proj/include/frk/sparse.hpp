#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "frk/error.hpp"
#include "frk/fields.hpp"

namespace frk {

// Exact sparse matrix over one of the coefficient fields.  Built through
// SparseMatrixBuilder (repeated add() accumulates), immutable afterwards.
template <class F>
class SparseMatrix {
 public:
  using Elem = typename F::Elem;
  using EntryMap = std::map<std::pair<int, int>, Elem>;

  SparseMatrix(F field, int rows, int cols, EntryMap entries)
      : field_(std::move(field)), rows_(rows), cols_(cols), entries_(std::move(entries)) {}

  const F& field() const { return field_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const EntryMap& entries() const { return entries_; }
  std::size_t nonzeros() const { return entries_.size(); }

  Elem at(int r, int c) const {
    auto it = entries_.find({r, c});
    return it == entries_.end() ? field_.zero() : it->second;
  }

  bool is_zero() const { return entries_.empty(); }

  friend bool operator==(const SparseMatrix& a, const SparseMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.entries_ == b.entries_;
  }

  SparseMatrix operator+(const SparseMatrix& o) const {
    require_shape(o);
    EntryMap out = entries_;
    for (const auto& [rc, v] : o.entries_) {
      auto [it, inserted] = out.emplace(rc, v);
      if (!inserted) {
        it->second += v;
        if (field_.is_zero(it->second)) out.erase(it);
      }
    }
    return SparseMatrix(field_, rows_, cols_, std::move(out));
  }

  SparseMatrix operator-(const SparseMatrix& o) const {
    require_shape(o);
    EntryMap out = entries_;
    for (const auto& [rc, v] : o.entries_) {
      auto [it, inserted] = out.emplace(rc, -v);
      if (!inserted) {
        it->second -= v;
        if (field_.is_zero(it->second)) out.erase(it);
      }
    }
    return SparseMatrix(field_, rows_, cols_, std::move(out));
  }

  SparseMatrix operator*(const SparseMatrix& o) const {
    if (cols_ != o.rows_) throw PreconditionError("matrix product shape mismatch");
    // Row-major sweep against a row index of the right factor.
    std::vector<std::vector<std::pair<int, Elem>>> rhs(static_cast<std::size_t>(o.rows_));
    for (const auto& [rc, v] : o.entries_) rhs[static_cast<std::size_t>(rc.first)].emplace_back(rc.second, v);
    EntryMap out;
    for (const auto& [rc, v] : entries_) {
      for (const auto& [c, w] : rhs[static_cast<std::size_t>(rc.second)]) {
        Elem prod = v * w;
        auto [it, inserted] = out.emplace(std::make_pair(rc.first, c), prod);
        if (!inserted) it->second += prod;
      }
    }
    for (auto it = out.begin(); it != out.end();) {
      if (field_.is_zero(it->second))
        it = out.erase(it);
      else
        ++it;
    }
    return SparseMatrix(field_, rows_, o.cols_, std::move(out));
  }

  // Conjugate transpose (plain transpose over fields without conjugation).
  SparseMatrix star() const {
    EntryMap out;
    for (const auto& [rc, v] : entries_) out.emplace(std::make_pair(rc.second, rc.first), field_.conj(v));
    return SparseMatrix(field_, cols_, rows_, std::move(out));
  }

  SparseMatrix scaled(const Elem& k) const {
    EntryMap out;
    if (!field_.is_zero(k))
      for (const auto& [rc, v] : entries_) out.emplace(rc, k * v);
    return SparseMatrix(field_, rows_, cols_, std::move(out));
  }

 private:
  void require_shape(const SparseMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw PreconditionError("matrix shape mismatch");
  }

  F field_;
  int rows_ = 0, cols_ = 0;
  EntryMap entries_;
};

template <class F>
class SparseMatrixBuilder {
 public:
  using Elem = typename F::Elem;

  SparseMatrixBuilder(F field, int rows, int cols) : field_(std::move(field)), rows_(rows), cols_(cols) {
    if (rows < 0 || cols < 0) throw PreconditionError("negative matrix dimension");
  }

  void add(int r, int c, const Elem& v) {
    if (r < 0 || r >= rows_ || c < 0 || c >= cols_) throw PreconditionError("matrix index out of range");
    if (field_.is_zero(v)) return;
    auto [it, inserted] = entries_.emplace(std::make_pair(r, c), v);
    if (!inserted) {
      it->second += v;
      if (field_.is_zero(it->second)) entries_.erase(it);
    }
  }

  SparseMatrix<F> build() { return SparseMatrix<F>(field_, rows_, cols_, std::move(entries_)); }

 private:
  F field_;
  int rows_, cols_;
  typename SparseMatrix<F>::EntryMap entries_;
};

template <class F>
SparseMatrix<F> identity_matrix(const F& field, int n) {
  SparseMatrixBuilder<F> b(field, n, n);
  for (int i = 0; i < n; ++i) b.add(i, i, field.one());
  return b.build();
}

// ---------------------------------------------------------------------------
// Rank by sparse Gaussian elimination with Markowitz pivot selection.
//
// Pivot choice: minimal (nnz(row)-1)*(nnz(col)-1), ties broken by lowest
// (row, col), so results are deterministic across runs.  Rows and columns are
// scanned in increasing count order; once every unscanned entry provably costs
// more than the current best the scan stops, which yields the exact Markowitz
// minimum without touching all entries.

template <class F>
int rank(const SparseMatrix<F>& m) {
  using Elem = typename F::Elem;
  const F& field = m.field();
  const int nr = m.rows(), nc = m.cols();
  if (nr == 0 || nc == 0 || m.is_zero()) return 0;

  std::vector<std::map<int, Elem>> rows(static_cast<std::size_t>(nr));
  std::vector<std::set<int>> col_rows(static_cast<std::size_t>(nc));
  for (const auto& [rc, v] : m.entries()) {
    rows[static_cast<std::size_t>(rc.first)].emplace(rc.second, v);
    col_rows[static_cast<std::size_t>(rc.second)].insert(rc.first);
  }

  int rk = 0;
  while (true) {
    // Bucket live rows/columns by nonzero count.
    std::size_t max_count = 0;
    for (int r = 0; r < nr; ++r) max_count = std::max(max_count, rows[static_cast<std::size_t>(r)].size());
    for (int c = 0; c < nc; ++c) max_count = std::max(max_count, col_rows[static_cast<std::size_t>(c)].size());
    if (max_count == 0) break;
    std::vector<std::vector<int>> rows_by_count(max_count + 1), cols_by_count(max_count + 1);
    for (int r = 0; r < nr; ++r)
      if (!rows[static_cast<std::size_t>(r)].empty()) rows_by_count[rows[static_cast<std::size_t>(r)].size()].push_back(r);
    for (int c = 0; c < nc; ++c)
      if (!col_rows[static_cast<std::size_t>(c)].empty()) cols_by_count[col_rows[static_cast<std::size_t>(c)].size()].push_back(c);

    long long best_cost = -1;
    int pr = -1, pc = -1;
    auto consider = [&](int r, int c) {
      long long cost = (static_cast<long long>(rows[static_cast<std::size_t>(r)].size()) - 1) *
                       (static_cast<long long>(col_rows[static_cast<std::size_t>(c)].size()) - 1);
      if (best_cost < 0 || cost < best_cost ||
          (cost == best_cost && std::make_pair(r, c) < std::make_pair(pr, pc))) {
        best_cost = cost;
        pr = r;
        pc = c;
      }
    };
    for (std::size_t k = 1; k <= max_count; ++k) {
      // Entries not seen after this pass have both counts > k, so they cost
      // at least k*k; stop once that cannot improve on (or tie) the best.
      for (int r : rows_by_count[k])
        for (const auto& [c, v] : rows[static_cast<std::size_t>(r)]) consider(r, c);
      for (int c : cols_by_count[k])
        for (int r : col_rows[static_cast<std::size_t>(c)]) consider(r, c);
      if (best_cost >= 0 && static_cast<long long>(k) * static_cast<long long>(k) > best_cost) break;
    }
    if (pr < 0) break;

    ++rk;
    Elem pivot = rows[static_cast<std::size_t>(pr)].at(pc);
    Elem pivot_inv = field.inv(pivot);
    std::vector<int> victims(col_rows[static_cast<std::size_t>(pc)].begin(), col_rows[static_cast<std::size_t>(pc)].end());
    for (int r : victims) {
      if (r == pr) continue;
      auto& row = rows[static_cast<std::size_t>(r)];
      Elem factor = row.at(pc) * pivot_inv;
      for (const auto& [c, v] : rows[static_cast<std::size_t>(pr)]) {
        Elem delta = factor * v;
        auto [it, inserted] = row.emplace(c, -delta);
        if (inserted) {
          col_rows[static_cast<std::size_t>(c)].insert(r);
        } else {
          it->second -= delta;
          if (field.is_zero(it->second)) {
            row.erase(it);
            col_rows[static_cast<std::size_t>(c)].erase(r);
          }
        }
      }
    }
    // Retire the pivot row and column.
    for (const auto& [c, v] : rows[static_cast<std::size_t>(pr)]) col_rows[static_cast<std::size_t>(c)].erase(pr);
    rows[static_cast<std::size_t>(pr)].clear();
  }
  return rk;
}

template <class F>
int kernel_dim(const SparseMatrix<F>& m) {
  return m.cols() - rank(m);
}

// ---------------------------------------------------------------------------
// Multimodular rank for matrices over Q and Q(i): reduce modulo a
// deterministic, seed-derived schedule of word-sized primes and take the
// maximal modular rank.  The result is always a certified lower bound and
// equals the true rank with high probability.  Primes dividing any entry
// denominator are rejected; for Q(i) the primes are chosen = 1 (mod 4) so
// that i has a square root mod p.

struct MultimodularOptions {
  int num_primes = 3;
  std::uint64_t seed = 0;
  bool exact_fallback = false;  // when set, verify with a full exact elimination
};

struct MultimodularRank {
  long long lower_bound = 0;
  bool exact = false;  // true only when the exact path confirmed the value
  int primes_used = 0;
};

namespace detail {

inline std::uint64_t nth_schedule_prime(std::uint64_t seed, int k, bool need_1_mod_4) {
  std::uint64_t state = seed * 0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(k) + 1;
  std::uint64_t start = (splitmix64(state) % (1ull << 29)) + (1ull << 30);
  std::uint64_t p = start | 1;
  while (!is_prime_u64(p) || (need_1_mod_4 && p % 4 != 1)) p += 2;
  return p;
}

inline std::uint64_t sqrt_minus_one_mod(std::uint64_t p) {
  // p = 1 (mod 4): g^((p-1)/4) for a quadratic non-residue g.
  for (std::uint64_t g = 2;; ++g) {
    if (powmod_u64(g, (p - 1) / 2, p) == p - 1) return powmod_u64(g, (p - 1) / 4, p);
  }
}

// Reduction of one scalar mod p; false when a denominator vanishes.
inline bool reduce_mod(const mpq_class& q, const PrimeField& f, FpElem& out) {
  mpz_class den_red = q.get_den() % static_cast<unsigned long>(f.p);
  if (den_red == 0) return false;
  mpz_class num_red = q.get_num() % static_cast<long>(f.p);
  if (num_red < 0) num_red += static_cast<long>(f.p);
  FpElem num{num_red.get_ui(), f.p};
  FpElem den{den_red.get_ui(), f.p};
  out = num * f.inv(den);
  return true;
}

inline bool reduce_entry(const mpq_class& v, const PrimeField& f, std::uint64_t /*sqrt_m1*/, FpElem& out) {
  return reduce_mod(v, f, out);
}

inline bool reduce_entry(const GaussianRational& v, const PrimeField& f, std::uint64_t sqrt_m1, FpElem& out) {
  FpElem re, im;
  if (!reduce_mod(v.re, f, re) || !reduce_mod(v.im, f, im)) return false;
  out = re + im * FpElem{sqrt_m1, f.p};
  return true;
}

}  // namespace detail

template <class F>
MultimodularRank rank_multimodular(const SparseMatrix<F>& m, const MultimodularOptions& opts = {}) {
  static_assert(std::is_same_v<F, RationalField> || std::is_same_v<F, GaussianRationalField>,
                "multimodular rank is defined over Q and Q(i)");
  constexpr bool gaussian = std::is_same_v<F, GaussianRationalField>;
  MultimodularRank result;
  if (m.is_zero()) {
    result.exact = true;  // rank 0 needs no probabilistic argument
    return result;
  }
  int produced = 0;
  for (int k = 0; produced < opts.num_primes && k < opts.num_primes + 64; ++k) {
    std::uint64_t p = detail::nth_schedule_prime(opts.seed, k, gaussian);
    PrimeField f(p);
    std::uint64_t s = gaussian ? detail::sqrt_minus_one_mod(p) : 0;
    SparseMatrixBuilder<PrimeField> b(f, m.rows(), m.cols());
    bool ok = true;
    for (const auto& [rc, v] : m.entries()) {
      FpElem e;
      if (!detail::reduce_entry(v, f, s, e)) {
        ok = false;
        break;
      }
      b.add(rc.first, rc.second, e);
    }
    if (!ok) continue;  // prime rejected by a vanishing denominator
    auto reduced = b.build();
    result.lower_bound = std::max(result.lower_bound, static_cast<long long>(rank(reduced)));
    ++produced;
  }
  result.primes_used = produced;
  if (opts.exact_fallback) {
    long long exact = rank(m);
    if (exact < result.lower_bound)
      throw InvariantViolation("modular rank exceeded the exact rank");
    result.lower_bound = exact;
    result.exact = true;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Coordinate text dump: header "rows cols field", then one "row col value"
// line per nonzero in (row, col) order.

namespace detail {

inline std::string dump_scalar(const RationalField& f, const mpq_class& v) { return f.to_string(v); }
inline std::string dump_scalar(const PrimeField& f, const FpElem& v) { return f.to_string(v); }
inline std::string dump_scalar(const GaussianRationalField&, const GaussianRational& v) {
  return v.re.get_str() + "+" + v.im.get_str() + "i";
}

inline mpq_class parse_rational_text(const std::string& s) {
  mpq_class q;
  if (q.set_str(s, 10) != 0) throw ParseError("bad rational literal: " + s);
  q.canonicalize();
  return q;
}

inline void parse_scalar(const RationalField&, const std::string& s, mpq_class& out) {
  out = parse_rational_text(s);
}
inline void parse_scalar(const PrimeField& f, const std::string& s, FpElem& out) {
  out = {std::stoull(s) % f.p, f.p};
}
inline void parse_scalar(const GaussianRationalField&, const std::string& s, GaussianRational& out) {
  auto plus = s.find('+', 1);
  if (plus == std::string::npos || s.back() != 'i') throw ParseError("bad Q(i) literal: " + s);
  out.re = parse_rational_text(s.substr(0, plus));
  out.im = parse_rational_text(s.substr(plus + 1, s.size() - plus - 2));
}

}  // namespace detail

template <class F>
void dump_matrix(const SparseMatrix<F>& m, std::ostream& os) {
  os << m.rows() << " " << m.cols() << " " << m.field().name() << "\n";
  for (const auto& [rc, v] : m.entries())
    os << rc.first << " " << rc.second << " " << detail::dump_scalar(m.field(), v) << "\n";
}

template <class F>
SparseMatrix<F> load_matrix(const F& field, std::istream& is) {
  int rows, cols;
  std::string name;
  if (!(is >> rows >> cols >> name)) throw ParseError("bad matrix dump header");
  if (name != field.name()) throw ParseError("matrix dump field " + name + " does not match " + field.name());
  SparseMatrixBuilder<F> b(field, rows, cols);
  int r, c;
  std::string text;
  while (is >> r >> c >> text) {
    typename F::Elem v = field.zero();
    detail::parse_scalar(field, text, v);
    b.add(r, c, v);
  }
  return b.build();
}

}  // namespace frk
