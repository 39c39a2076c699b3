#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

namespace frk {

inline std::uint64_t mulmod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

inline std::uint64_t powmod_u64(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  base %= m;
  while (exp) {
    if (exp & 1) r = mulmod_u64(r, base, m);
    base = mulmod_u64(base, base, m);
    exp >>= 1;
  }
  return r;
}

// Deterministic Miller-Rabin, valid for all 64-bit inputs.
inline bool is_prime_u64(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) { d >>= 1; ++s; }
  for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    std::uint64_t x = powmod_u64(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < s; ++i) {
      x = mulmod_u64(x, x, n);
      if (x == n - 1) { composite = false; break; }
    }
    if (composite) return false;
  }
  return true;
}

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Exact rational from a count ratio; always canonical.
inline mpq_class make_ratio(long num, long den) {
  mpq_class q(num, den);
  q.canonicalize();
  return q;
}

inline mpq_class make_ratio(const mpz_class& num, const mpz_class& den) {
  mpq_class q(num, den);
  q.canonicalize();
  return q;
}

// 2^{-k} as an exact rational.
inline mpq_class pow2_inv(int k) {
  mpz_class d = 1;
  mpz_mul_2exp(d.get_mpz_t(), d.get_mpz_t(), static_cast<mp_bitcnt_t>(k));
  return make_ratio(mpz_class(1), d);
}

// Fixed-point decimal rendering (12 digits, round half away from zero).
// Deterministic across runs; used for every "decimal" field in reports.
inline std::string decimal_string(const mpq_class& q, int digits = 12) {
  mpz_class scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  mpz_class num = abs(q.get_num()) * scale;
  mpz_class quo, rem;
  mpz_fdiv_qr(quo.get_mpz_t(), rem.get_mpz_t(), num.get_mpz_t(), q.get_den().get_mpz_t());
  if (2 * rem >= q.get_den()) quo += 1;
  mpz_class ip = quo / scale;
  mpz_class fp = quo % scale;
  std::string frac = fp.get_str();
  frac.insert(frac.begin(), static_cast<std::size_t>(digits) - frac.size(), '0');
  std::string s;
  if (sgn(q) < 0 && (ip != 0 || fp != 0)) s += "-";
  s += ip.get_str();
  s += ".";
  s += frac;
  return s;
}

}  // namespace frk
