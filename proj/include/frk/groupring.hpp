#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "frk/fields.hpp"
#include "frk/groups.hpp"

namespace frk {

// Exact arithmetic in K[G] and Mat(K[G]).  Elements are finitely supported
// maps G -> K with no stored zeros; immutable values, all operations pure.

template <class F>
class GroupRingElement {
 public:
  using Elem = typename F::Elem;
  using TermMap = std::map<GroupElement, Elem>;

  GroupRingElement(MarkedGroup g, F field) : g_(std::move(g)), field_(std::move(field)) {}
  GroupRingElement(MarkedGroup g, F field, TermMap terms)
      : g_(std::move(g)), field_(std::move(field)), terms_(std::move(terms)) {
    for (auto it = terms_.begin(); it != terms_.end();) {
      if (field_.is_zero(it->second))
        it = terms_.erase(it);
      else
        ++it;
    }
  }

  const MarkedGroup& owner() const { return g_; }
  const F& field() const { return field_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  Elem coeff(const GroupElement& x) const {
    auto it = terms_.find(x);
    return it == terms_.end() ? field_.zero() : it->second;
  }

  std::vector<GroupElement> support() const {
    std::vector<GroupElement> s;
    s.reserve(terms_.size());
    for (const auto& [g, c] : terms_) s.push_back(g);
    return s;
  }

  // Max word length over the support; 0 for the zero element.
  int support_radius() const {
    int r = 0;
    for (const auto& [x, c] : terms_) r = std::max(r, g_.word_length(x));
    return r;
  }

  friend bool operator==(const GroupRingElement& a, const GroupRingElement& b) {
    return a.terms_ == b.terms_;
  }
  friend bool operator!=(const GroupRingElement& a, const GroupRingElement& b) { return !(a == b); }

 private:
  MarkedGroup g_;
  F field_;
  TermMap terms_;
};

namespace detail {

template <class F>
void require_compatible(const GroupRingElement<F>& a, const GroupRingElement<F>& b) {
  if (!a.owner().same_group(b.owner()))
    throw PreconditionError("group ring elements with different owners");
  if (a.field().name() != b.field().name())
    throw PreconditionError("group ring elements with different fields");
}

}  // namespace detail

template <class F>
GroupRingElement<F> gr_zero(const MarkedGroup& g, const F& field) {
  return GroupRingElement<F>(g, field);
}

template <class F>
GroupRingElement<F> gr_term(const MarkedGroup& g, const F& field, const GroupElement& x,
                            const typename F::Elem& c) {
  typename GroupRingElement<F>::TermMap t;
  t.emplace(x, c);
  return GroupRingElement<F>(g, field, std::move(t));
}

template <class F>
GroupRingElement<F> gr_one(const MarkedGroup& g, const F& field) {
  return gr_term(g, field, g.identity(), field.one());
}

template <class F>
GroupRingElement<F> gr_add(const GroupRingElement<F>& a, const GroupRingElement<F>& b) {
  detail::require_compatible(a, b);
  auto terms = a.terms();
  for (const auto& [x, c] : b.terms()) {
    auto [it, inserted] = terms.emplace(x, c);
    if (!inserted) it->second += c;
  }
  return GroupRingElement<F>(a.owner(), a.field(), std::move(terms));
}

template <class F>
GroupRingElement<F> gr_neg(const GroupRingElement<F>& a) {
  typename GroupRingElement<F>::TermMap terms;
  for (const auto& [x, c] : a.terms()) terms.emplace(x, -c);
  return GroupRingElement<F>(a.owner(), a.field(), std::move(terms));
}

template <class F>
GroupRingElement<F> gr_sub(const GroupRingElement<F>& a, const GroupRingElement<F>& b) {
  return gr_add(a, gr_neg(b));
}

// Convolution product: (ab)_g = sum over s*t = g of a_s b_t.
template <class F>
GroupRingElement<F> gr_mul(const GroupRingElement<F>& a, const GroupRingElement<F>& b) {
  detail::require_compatible(a, b);
  const MarkedGroup& g = a.owner();
  typename GroupRingElement<F>::TermMap terms;
  for (const auto& [s, cs] : a.terms()) {
    for (const auto& [t, ct] : b.terms()) {
      auto [it, inserted] = terms.emplace(g.mul(s, t), cs * ct);
      if (!inserted) it->second += cs * ct;
    }
  }
  return GroupRingElement<F>(g, a.field(), std::move(terms));
}

template <class F>
GroupRingElement<F> gr_scale(const typename F::Elem& k, const GroupRingElement<F>& a) {
  typename GroupRingElement<F>::TermMap terms;
  for (const auto& [x, c] : a.terms()) terms.emplace(x, k * c);
  return GroupRingElement<F>(a.owner(), a.field(), std::move(terms));
}

// The *-involution: (a*)_g = conj(a_{g^{-1}}).  Over F_p the conjugation is
// the identity (transpose-only variant).
template <class F>
GroupRingElement<F> gr_star(const GroupRingElement<F>& a) {
  const MarkedGroup& g = a.owner();
  typename GroupRingElement<F>::TermMap terms;
  for (const auto& [x, c] : a.terms()) terms.emplace(g.inv(x), a.field().conj(c));
  return GroupRingElement<F>(g, a.field(), std::move(terms));
}

// Push an element through a quotient projection; coefficients of merged
// normal forms accumulate.
template <class F>
GroupRingElement<F> gr_project(const GroupRingElement<F>& a, const QuotientMap& pi) {
  typename GroupRingElement<F>::TermMap terms;
  for (const auto& [x, c] : a.terms()) {
    auto [it, inserted] = terms.emplace(pi(x), c);
    if (!inserted) it->second += c;
  }
  return GroupRingElement<F>(pi.to, a.field(), std::move(terms));
}

template <class F>
GroupRingElement<F> operator+(const GroupRingElement<F>& a, const GroupRingElement<F>& b) { return gr_add(a, b); }
template <class F>
GroupRingElement<F> operator-(const GroupRingElement<F>& a, const GroupRingElement<F>& b) { return gr_sub(a, b); }
template <class F>
GroupRingElement<F> operator*(const GroupRingElement<F>& a, const GroupRingElement<F>& b) { return gr_mul(a, b); }

// ---------------------------------------------------------------------------
// Matrices over the group ring.

template <class F>
class GroupRingMatrix {
 public:
  GroupRingMatrix(int rows, int cols, std::vector<GroupRingElement<F>> entries)
      : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_) != entries_.size())
      throw PreconditionError("matrix entry count does not match shape");
    for (const auto& e : entries_) {
      if (!e.owner().same_group(owner()) || e.field().name() != field().name())
        throw PreconditionError("inconsistent owner or field across matrix entries");
    }
  }

  static GroupRingMatrix zero(const MarkedGroup& g, const F& field, int rows, int cols) {
    return GroupRingMatrix(rows, cols,
                           std::vector<GroupRingElement<F>>(
                               static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols),
                               gr_zero(g, field)));
  }

  static GroupRingMatrix identity(const MarkedGroup& g, const F& field, int n) {
    auto m = zero(g, field, n, n);
    for (int i = 0; i < n; ++i) m.entries_[static_cast<std::size_t>(i * n + i)] = gr_one(g, field);
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const MarkedGroup& owner() const { return entries_.front().owner(); }
  const F& field() const { return entries_.front().field(); }

  const GroupRingElement<F>& at(int r, int c) const {
    return entries_[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(c)];
  }

  int support_radius() const {
    int r = 0;
    for (const auto& e : entries_) r = std::max(r, e.support_radius());
    return r;
  }

  GroupRingMatrix operator+(const GroupRingMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw PreconditionError("matrix shape mismatch");
    std::vector<GroupRingElement<F>> out;
    out.reserve(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) out.push_back(gr_add(entries_[i], o.entries_[i]));
    return GroupRingMatrix(rows_, cols_, std::move(out));
  }

  GroupRingMatrix operator*(const GroupRingMatrix& o) const {
    if (cols_ != o.rows_) throw PreconditionError("matrix product shape mismatch");
    auto out = zero(owner(), field(), rows_, o.cols_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < o.cols_; ++j) {
        GroupRingElement<F> acc = gr_zero(owner(), field());
        for (int k = 0; k < cols_; ++k) acc = gr_add(acc, gr_mul(at(i, k), o.at(k, j)));
        out.entries_[static_cast<std::size_t>(i * o.cols_ + j)] = std::move(acc);
      }
    return out;
  }

  // Conjugate transpose with gr_star entries.
  GroupRingMatrix star() const {
    auto out = zero(owner(), field(), cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j)
        out.entries_[static_cast<std::size_t>(j * rows_ + i)] = gr_star(at(i, j));
    return out;
  }

  friend bool operator==(const GroupRingMatrix& a, const GroupRingMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.entries_ == b.entries_;
  }

  GroupRingMatrix projected(const QuotientMap& pi) const {
    std::vector<GroupRingElement<F>> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(gr_project(e, pi));
    return GroupRingMatrix(rows_, cols_, std::move(out));
  }

 private:
  int rows_, cols_;
  std::vector<GroupRingElement<F>> entries_;
};

// ---------------------------------------------------------------------------
// Element grammar.
//
//   expr   := ['+'|'-'] term { ('+'|'-') term }
//   term   := factor { '*' factor }
//   factor := number [ 'i' ] | 'i' | generator [ '^' int ] | '(' expr ')'
//   number := int [ '/' int ]
//
// "1" is the identity word; generator names come from the group ("g0", "t",
// "x", ...).  The canonical printer emits this grammar and round-trips.

namespace detail {

struct Token {
  enum class Kind { number, ident, op, end } kind;
  std::string text;
  std::size_t pos;
};

inline std::vector<Token> lex_element(const std::string& s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = i;
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      out.push_back({Token::Kind::number, s.substr(start, i - start), start});
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = i;
      while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
      out.push_back({Token::Kind::ident, s.substr(start, i - start), start});
      continue;
    }
    if (std::string("+-*/^()").find(c) != std::string::npos) {
      out.push_back({Token::Kind::op, std::string(1, c), i});
      ++i;
      continue;
    }
    throw ParseError(std::string("unexpected character '") + c + "' in element", i);
  }
  out.push_back({Token::Kind::end, "", s.size()});
  return out;
}

template <class F>
class ElementParser {
 public:
  ElementParser(const MarkedGroup& g, const F& field, const std::string& text)
      : g_(g), field_(field), toks_(lex_element(text)) {}

  GroupRingElement<F> parse() {
    auto e = expr();
    if (!at_end()) throw ParseError("trailing input in element", toks_[pos_].pos);
    return e;
  }

 private:
  bool at_end() const { return toks_[pos_].kind == detail::Token::Kind::end; }
  const Token& peek() const { return toks_[pos_]; }
  Token eat() { return toks_[pos_++]; }
  bool eat_op(const std::string& o) {
    if (peek().kind == Token::Kind::op && peek().text == o) {
      ++pos_;
      return true;
    }
    return false;
  }

  GroupRingElement<F> expr() {
    bool negate = false;
    if (eat_op("-"))
      negate = true;
    else
      eat_op("+");
    auto acc = term();
    if (negate) acc = gr_neg(acc);
    while (true) {
      if (eat_op("+")) {
        acc = gr_add(acc, term());
      } else if (eat_op("-")) {
        acc = gr_sub(acc, term());
      } else {
        break;
      }
    }
    return acc;
  }

  GroupRingElement<F> term() {
    auto acc = factor();
    while (eat_op("*")) acc = gr_mul(acc, factor());
    return acc;
  }

  long integer_exponent() {
    bool neg = eat_op("-");
    if (peek().kind != Token::Kind::number) throw ParseError("expected exponent", peek().pos);
    long v = std::stol(eat().text);
    return neg ? -v : v;
  }

  GroupRingElement<F> factor() {
    const Token& t = peek();
    if (t.kind == Token::Kind::number) return number_factor();
    if (t.kind == Token::Kind::ident) {
      if (t.text == "i") {
        eat();
        return imaginary_unit();
      }
      return generator_power();
    }
    if (eat_op("(")) {
      auto inner = expr();
      if (!eat_op(")")) throw ParseError("expected ')'", peek().pos);
      return inner;
    }
    throw ParseError("expected term in element", t.pos);
  }

  GroupRingElement<F> number_factor() {
    std::size_t pos = peek().pos;
    long num = std::stol(eat().text);
    long den = 1;
    if (eat_op("/")) {
      if (peek().kind != Token::Kind::number) throw ParseError("expected denominator", peek().pos);
      den = std::stol(eat().text);
      if (den == 0) throw ParseError("zero denominator", pos);
    }
    auto scalar = field_.from_ratio(num, den);
    auto value = gr_term(g_, field_, g_.identity(), scalar);
    // Juxtaposed imaginary unit: "2/3 i".
    if (peek().kind == Token::Kind::ident && peek().text == "i") {
      eat();
      value = gr_mul(value, imaginary_unit());
    }
    return value;
  }

  GroupRingElement<F> imaginary_unit() {
    if constexpr (std::is_same_v<F, GaussianRationalField>) {
      return gr_term(g_, field_, g_.identity(), field_.imaginary_unit());
    } else {
      throw ParseError("imaginary unit requires the Qi field");
    }
  }

  GroupRingElement<F> generator_power() {
    const Token tok = eat();
    const Generator* gen = nullptr;
    for (const auto& cand : g_.generators()) {
      if (cand.name == tok.text) {
        gen = &cand;
        break;
      }
    }
    if (!gen) throw ParseError("unknown generator '" + tok.text + "'", tok.pos);
    long e = 1;
    if (eat_op("^")) e = integer_exponent();
    GroupElement base = e >= 0 ? gen->element : g_.inv(gen->element);
    GroupElement acc = g_.identity();
    for (long k = 0; k < std::abs(e); ++k) acc = g_.mul(acc, base);
    return gr_term(g_, field_, acc, field_.one());
  }

  const MarkedGroup& g_;
  const F& field_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace detail

template <class F>
GroupRingElement<F> parse_element(const MarkedGroup& g, const F& field, const std::string& text) {
  return detail::ElementParser<F>(g, field, text).parse();
}

// Rows separated by ';', entries by ','.
template <class F>
GroupRingMatrix<F> parse_matrix(const MarkedGroup& g, const F& field, const std::string& text) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> row;
  std::string cur;
  for (char c : text) {
    if (c == ',' || c == ';') {
      row.push_back(cur);
      cur.clear();
      if (c == ';') {
        cells.push_back(row);
        row.clear();
      }
    } else {
      cur += c;
    }
  }
  row.push_back(cur);
  cells.push_back(row);
  std::size_t cols = cells.front().size();
  std::vector<GroupRingElement<F>> entries;
  for (const auto& r : cells) {
    if (r.size() != cols) throw ParseError("ragged matrix rows");
    for (const auto& cell : r) entries.push_back(parse_element(g, field, cell));
  }
  return GroupRingMatrix<F>(static_cast<int>(cells.size()), static_cast<int>(cols), std::move(entries));
}

// ---------------------------------------------------------------------------
// Canonical printer: terms ordered by word length then lexicographic normal
// form; coefficients 1 and -1 elided on non-identity words.

namespace detail {

inline std::string word_string(const MarkedGroup& g, const GroupElement& x) {
  if (x == g.identity()) return "1";
  std::string out;
  const auto& data = *g.data();
  auto append_power = [&](const std::string& name, std::int64_t e) {
    if (e == 0) return;
    if (!out.empty()) out += "*";
    out += name;
    if (e != 1) out += "^" + std::to_string(e);
  };
  if (data.kind == GroupKind::heisenberg3) {
    append_power("x", x.coords()[0]);
    append_power("y", x.coords()[1]);
    append_power("z", x.coords()[2]);
  } else {
    // Free coordinates print signed exponents; torsion stays in [0, m).
    for (std::size_t i = 0; i < x.coords().size(); ++i)
      append_power(data.coord_names[i], x.coords()[i]);
  }
  return out;
}

}  // namespace detail

template <class F>
std::string to_string(const GroupRingElement<F>& a) {
  if (a.is_zero()) return "0";
  const MarkedGroup& g = a.owner();
  const F& field = a.field();
  std::vector<std::pair<std::pair<int, GroupElement>, typename F::Elem>> ordered;
  for (const auto& [x, c] : a.terms())
    ordered.push_back({{g.word_length(x), x}, c});
  std::sort(ordered.begin(), ordered.end(),
            [](const auto& l, const auto& r) { return l.first < r.first; });

  std::string out;
  bool first = true;
  for (const auto& [key, c] : ordered) {
    const GroupElement& x = key.second;
    bool neg = field.is_negative(c);
    auto mag = field.abs_value(c);
    std::string body;
    std::string word = detail::word_string(g, x);
    if (word == "1") {
      body = field.to_string(mag);
    } else if (mag == field.one()) {
      body = word;
    } else {
      body = field.to_string(mag) + "*" + word;
    }
    if (first) {
      out += neg ? "-" + body : body;
      first = false;
    } else {
      out += neg ? " - " : " + ";
      out += body;
    }
  }
  return out;
}

template <class F>
std::string to_string(const GroupRingMatrix<F>& m) {
  std::string out;
  for (int i = 0; i < m.rows(); ++i) {
    if (i) out += "; ";
    for (int j = 0; j < m.cols(); ++j) {
      if (j) out += ", ";
      out += to_string(m.at(i, j));
    }
  }
  return out;
}

}  // namespace frk
