#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <utility>

#include "frk/error.hpp"
#include "frk/numutil.hpp"

namespace frk {

// Exact coefficient fields.  Every scalar in the library is one of these;
// there is no floating point on any computational path.
//
// A field is a small context object F with
//   F::Elem                        the scalar type (+, -, *, /, ==)
//   F.zero(), F.one(), F.from_long(), F.from_ratio()
//   F.is_zero(e), F.conj(e), F.inv(e), F.to_string(e), F.name()
// The context carries runtime parameters (the prime p); elements of F_p also
// carry p so that mixed-modulus arithmetic is caught.

// ---------------------------------------------------------------------------
// Q: arbitrary-precision rationals (GMP, always canonical).

struct RationalField {
  using Elem = mpq_class;
  static constexpr bool has_conjugation = false;  // involution is the identity

  Elem zero() const { return mpq_class(0); }
  Elem one() const { return mpq_class(1); }
  Elem from_long(long v) const { return mpq_class(v); }
  Elem from_ratio(long num, long den) const {
    if (den == 0) throw PreconditionError("rational with zero denominator");
    mpq_class q(num, den);
    q.canonicalize();
    return q;
  }
  bool is_zero(const Elem& e) const { return sgn(e) == 0; }
  Elem conj(const Elem& e) const { return e; }
  Elem inv(const Elem& e) const {
    if (is_zero(e)) throw PreconditionError("division by zero in Q");
    return Elem(1 / e);
  }
  bool is_negative(const Elem& e) const { return sgn(e) < 0; }
  Elem abs_value(const Elem& e) const { return Elem(abs(e)); }
  std::string to_string(const Elem& e) const { return e.get_str(); }
  std::string name() const { return "Q"; }
};

// ---------------------------------------------------------------------------
// Q(i): Gaussian rationals.

struct GaussianRational {
  mpq_class re, im;

  GaussianRational() : re(0), im(0) {}
  GaussianRational(mpq_class r, mpq_class i) : re(std::move(r)), im(std::move(i)) {}

  friend GaussianRational operator+(const GaussianRational& a, const GaussianRational& b) {
    return {mpq_class(a.re + b.re), mpq_class(a.im + b.im)};
  }
  friend GaussianRational operator-(const GaussianRational& a, const GaussianRational& b) {
    return {mpq_class(a.re - b.re), mpq_class(a.im - b.im)};
  }
  GaussianRational operator-() const { return {mpq_class(-re), mpq_class(-im)}; }
  friend GaussianRational operator*(const GaussianRational& a, const GaussianRational& b) {
    return {mpq_class(a.re * b.re - a.im * b.im), mpq_class(a.re * b.im + a.im * b.re)};
  }
  friend bool operator==(const GaussianRational& a, const GaussianRational& b) {
    return a.re == b.re && a.im == b.im;
  }
  friend bool operator!=(const GaussianRational& a, const GaussianRational& b) { return !(a == b); }
  GaussianRational& operator+=(const GaussianRational& o) { return *this = *this + o; }
  GaussianRational& operator-=(const GaussianRational& o) { return *this = *this - o; }
  GaussianRational& operator*=(const GaussianRational& o) { return *this = *this * o; }
};

struct GaussianRationalField {
  using Elem = GaussianRational;
  static constexpr bool has_conjugation = true;

  Elem zero() const { return {}; }
  Elem one() const { return {mpq_class(1), mpq_class(0)}; }
  Elem imaginary_unit() const { return {mpq_class(0), mpq_class(1)}; }
  Elem from_long(long v) const { return {mpq_class(v), mpq_class(0)}; }
  Elem from_ratio(long num, long den) const {
    if (den == 0) throw PreconditionError("rational with zero denominator");
    mpq_class q(num, den);
    q.canonicalize();
    return {q, mpq_class(0)};
  }
  bool is_zero(const Elem& e) const { return sgn(e.re) == 0 && sgn(e.im) == 0; }
  Elem conj(const Elem& e) const { return {e.re, mpq_class(-e.im)}; }
  Elem inv(const Elem& e) const {
    mpq_class n(e.re * e.re + e.im * e.im);
    if (sgn(n) == 0) throw PreconditionError("division by zero in Q(i)");
    return {mpq_class(e.re / n), mpq_class(-e.im / n)};
  }
  // "Negative" drives printing only: real negatives get a leading minus.
  bool is_negative(const Elem& e) const { return sgn(e.im) == 0 && sgn(e.re) < 0; }
  Elem abs_value(const Elem& e) const {
    return is_negative(e) ? Elem{mpq_class(-e.re), mpq_class(0)} : e;
  }
  std::string to_string(const Elem& e) const {
    if (sgn(e.im) == 0) return e.re.get_str();
    std::string s = "(" + e.re.get_str();
    s += sgn(e.im) < 0 ? " - " : " + ";
    s += mpq_class(abs(e.im)).get_str();
    s += " i)";
    return s;
  }
  std::string name() const { return "Qi"; }
};

inline GaussianRational operator/(const GaussianRational& a, const GaussianRational& b) {
  return a * GaussianRationalField{}.inv(b);
}

// ---------------------------------------------------------------------------
// F_p: prime fields with word-sized p.  Elements carry their modulus.

struct FpElem {
  std::uint64_t v = 0;
  std::uint64_t p = 0;

  friend FpElem operator+(const FpElem& a, const FpElem& b) {
    check(a, b);
    std::uint64_t s = a.v + b.v;
    return {s >= a.p ? s - a.p : s, a.p};
  }
  friend FpElem operator-(const FpElem& a, const FpElem& b) {
    check(a, b);
    return {a.v >= b.v ? a.v - b.v : a.v + a.p - b.v, a.p};
  }
  FpElem operator-() const { return {v == 0 ? 0 : p - v, p}; }
  friend FpElem operator*(const FpElem& a, const FpElem& b) {
    check(a, b);
    return {mulmod_u64(a.v, b.v, a.p), a.p};
  }
  friend bool operator==(const FpElem& a, const FpElem& b) { return a.v == b.v && a.p == b.p; }
  friend bool operator!=(const FpElem& a, const FpElem& b) { return !(a == b); }
  FpElem& operator+=(const FpElem& o) { return *this = *this + o; }
  FpElem& operator-=(const FpElem& o) { return *this = *this - o; }
  FpElem& operator*=(const FpElem& o) { return *this = *this * o; }

 private:
  static void check(const FpElem& a, const FpElem& b) {
    if (a.p != b.p) throw PreconditionError("mixed moduli in F_p arithmetic");
  }
};

struct PrimeField {
  std::uint64_t p;
  using Elem = FpElem;
  static constexpr bool has_conjugation = false;

  explicit PrimeField(std::uint64_t prime) : p(prime) {
    if (p > (1ull << 62)) throw PreconditionError("prime field modulus too large");
    if (!is_prime_u64(p)) throw PreconditionError("prime field modulus " + std::to_string(p) + " is not prime");
  }

  Elem zero() const { return {0, p}; }
  Elem one() const { return {1 % p, p}; }
  Elem from_long(long v) const {
    long long r = static_cast<long long>(v % static_cast<long long>(p));
    if (r < 0) r += static_cast<long long>(p);
    return {static_cast<std::uint64_t>(r), p};
  }
  Elem from_ratio(long num, long den) const {
    Elem d = from_long(den);
    if (d.v == 0) throw PreconditionError("denominator vanishes mod p");
    return from_long(num) * inv(d);
  }
  bool is_zero(const Elem& e) const { return e.v == 0; }
  Elem conj(const Elem& e) const { return e; }  // transpose-only involution
  Elem inv(const Elem& e) const {
    if (e.v == 0) throw PreconditionError("division by zero in F_p");
    return {powmod_u64(e.v, p - 2, p), p};
  }
  bool is_negative(const Elem&) const { return false; }
  Elem abs_value(const Elem& e) const { return e; }
  std::string to_string(const Elem& e) const { return std::to_string(e.v); }
  std::string name() const { return "F" + std::to_string(p); }
};

inline FpElem operator/(const FpElem& a, const FpElem& b) {
  if (a.p != b.p) throw PreconditionError("mixed moduli in F_p arithmetic");
  return a * PrimeField(a.p).inv(b);
}

// ---------------------------------------------------------------------------
// Runtime field tag for CLI / serialization dispatch.

struct FieldTag {
  enum class Kind { rational, gaussian, prime } kind = Kind::rational;
  std::uint64_t p = 0;

  std::string name() const {
    switch (kind) {
      case Kind::rational: return "Q";
      case Kind::gaussian: return "Qi";
      case Kind::prime: return "F" + std::to_string(p);
    }
    return "?";
  }

  static FieldTag parse(const std::string& s) {
    if (s == "Q") return {Kind::rational, 0};
    if (s == "Qi" || s == "Q(i)") return {Kind::gaussian, 0};
    if (s.size() > 1 && s[0] == 'F') {
      std::uint64_t p = 0;
      for (std::size_t i = 1; i < s.size(); ++i) {
        if (s[i] < '0' || s[i] > '9') throw ParseError("bad field name: " + s);
        p = p * 10 + static_cast<std::uint64_t>(s[i] - '0');
      }
      return {Kind::prime, p};
    }
    throw ParseError("unknown field: " + s + " (expected Q, Qi, or F<p>)");
  }
};

template <class Fn>
auto with_field(const FieldTag& tag, Fn&& fn) {
  switch (tag.kind) {
    case FieldTag::Kind::rational: return fn(RationalField{});
    case FieldTag::Kind::gaussian: return fn(GaussianRationalField{});
    case FieldTag::Kind::prime: return fn(PrimeField{tag.p});
  }
  throw Error("unreachable field tag");
}

}  // namespace frk
