#pragma once

#include <boost/container/small_vector.hpp>

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "frk/error.hpp"

namespace frk {

// Finitely generated amenable groups from a fixed catalog, with decidable
// normal forms.  An element's normal form is a coordinate tuple:
//   - abelian kinds: one coordinate per (free or cyclic) factor;
//   - Heisenberg3: the triple (a,b,c) meaning x^a y^b z^c with [x,y] = z,
//     so (a1,b1,c1)(a2,b2,c2) = (a1+a2, b1+b2, c1+c2 - a2*b1).
// Groups and elements are immutable values and safe to share across threads.

enum class GroupKind {
  free_abelian,
  free_abelian_times_finite,
  finite_abelian,
  heisenberg3,
};

using Coords = boost::container::small_vector<std::int64_t, 4>;

class MarkedGroup;

class GroupElement {
 public:
  GroupElement() = default;
  GroupElement(std::shared_ptr<const struct GroupData> data, Coords coords)
      : data_(std::move(data)), coords_(std::move(coords)) {}

  const Coords& coords() const { return coords_; }
  MarkedGroup owner() const;

  friend bool operator==(const GroupElement& a, const GroupElement& b) {
    return a.coords_ == b.coords_;
  }
  friend bool operator!=(const GroupElement& a, const GroupElement& b) { return !(a == b); }
  // Lexicographic on normal forms; the canonical deterministic order.
  friend bool operator<(const GroupElement& a, const GroupElement& b) {
    return a.coords_ < b.coords_;
  }

  const std::shared_ptr<const struct GroupData>& data() const { return data_; }

 private:
  std::shared_ptr<const struct GroupData> data_;
  Coords coords_;
};

// One symmetric generator: display name plus its element.  S is closed under
// inversion and deduplicated (an involution appears once).
struct Generator {
  std::string name;       // e.g. "g0", "t", "x", and "g0^-1" for formal inverses
  GroupElement element;
  int inverse_index = 0;  // index in S of the inverse generator
};

struct GroupData {
  GroupKind kind = GroupKind::free_abelian;
  // Abelian kinds: per-coordinate modulus, 0 = infinite factor.
  std::vector<std::int64_t> moduli;
  std::vector<std::string> coord_names;
  // Heisenberg: single modulus for all three coordinates, 0 = infinite.
  std::int64_t heis_mod = 0;

  std::vector<Generator> gens;  // the marked symmetric generating set S
  std::string descriptor;       // canonical descriptor text
};

class MarkedGroup {
 public:
  MarkedGroup() = default;
  explicit MarkedGroup(std::shared_ptr<const GroupData> data) : data_(std::move(data)) {}

  GroupKind kind() const { return data_->kind; }
  const std::string& descriptor() const { return data_->descriptor; }
  const std::vector<Generator>& generators() const { return data_->gens; }
  int degree() const { return static_cast<int>(data_->gens.size()); }
  int inverse_generator(int s) const { return data_->gens[static_cast<std::size_t>(s)].inverse_index; }

  GroupElement identity() const;
  GroupElement element(Coords coords) const;  // normalizes the tuple
  GroupElement mul(const GroupElement& a, const GroupElement& b) const;
  GroupElement inv(const GroupElement& a) const;

  bool is_finite() const;
  // Order of a finite group; throws for infinite kinds.
  std::int64_t order() const;
  // All elements of a finite group in canonical (sorted) order.
  std::vector<GroupElement> enumerate() const;

  // Word-metric length |g| in Cay(G,S).  Closed form for abelian kinds,
  // breadth-first search for Heisenberg.
  int word_length(const GroupElement& g) const;

  bool same_group(const MarkedGroup& other) const;
  const std::shared_ptr<const GroupData>& data() const { return data_; }

 private:
  std::shared_ptr<const GroupData> data_;
};

// -- catalog ----------------------------------------------------------------

// Descriptor grammar (also the CLI syntax):
//   descriptor := product [ '%' modulus ]
//   product    := atom { 'x' atom }
//   atom       := 'Z' [ '^' int ] | 'C' int | 'H3'
//   modulus    := int | '(' int { ',' int } ')'
// Examples: "Z^2", "Z^1 x C2", "H3", "Z^2 % (5,5)".
MarkedGroup make_group(const std::string& descriptor);

MarkedGroup make_free_abelian(int d);
MarkedGroup make_free_abelian_times_finite(int d, const std::vector<std::int64_t>& orders);
MarkedGroup make_finite_abelian(const std::vector<std::int64_t>& orders);
MarkedGroup make_heisenberg();

// Product over a word in generator names ("g0", "g0^-1", ...), left to right;
// the empty word is the identity.
GroupElement word_eval(const MarkedGroup& g, const std::vector<std::string>& word);

// Surjective projection onto a finite quotient.
struct QuotientMap {
  MarkedGroup from, to;
  GroupElement operator()(const GroupElement& x) const;
};

// Quotient by the kind's canonical normal subgroup family: (m_i Z)^d for free
// abelian coordinates, divisors of the orders for finite factors, reduction of
// all three coordinates mod m for Heisenberg (single modulus).
std::pair<MarkedGroup, QuotientMap> quotient(const MarkedGroup& g, const std::vector<std::int64_t>& moduli);

}  // namespace frk
