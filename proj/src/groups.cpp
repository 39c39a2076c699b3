#include "frk/groups.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <queue>
#include <set>
#include <sstream>

namespace frk {

namespace {

std::int64_t mod_reduce(std::int64_t v, std::int64_t m) {
  if (m == 0) return v;
  std::int64_t r = v % m;
  return r < 0 ? r + m : r;
}

Coords normalize(const GroupData& d, Coords c) {
  if (d.kind == GroupKind::heisenberg3) {
    if (c.size() != 3) throw PreconditionError("Heisenberg element needs 3 coordinates");
    for (auto& v : c) v = mod_reduce(v, d.heis_mod);
    return c;
  }
  if (c.size() != d.moduli.size()) throw PreconditionError("coordinate count mismatch");
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = mod_reduce(c[i], d.moduli[i]);
  return c;
}

Coords mul_coords(const GroupData& d, const Coords& a, const Coords& b) {
  Coords r;
  if (d.kind == GroupKind::heisenberg3) {
    r = {a[0] + b[0], a[1] + b[1], a[2] + b[2] - b[0] * a[1]};
  } else {
    r.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  }
  return normalize(d, std::move(r));
}

Coords inv_coords(const GroupData& d, const Coords& a) {
  Coords r;
  if (d.kind == GroupKind::heisenberg3) {
    r = {-a[0], -a[1], -a[2] - a[0] * a[1]};
  } else {
    r.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = -a[i];
  }
  return normalize(d, std::move(r));
}

// Builds S from the named generators: inverses appended, duplicates merged
// (an involution is its own inverse and appears once).  The identity never
// enters S, which rules out modulus-1 factors upstream.
void build_generating_set(const std::shared_ptr<GroupData>& d,
                          const std::vector<std::pair<std::string, Coords>>& named) {
  std::vector<Generator> gens;
  std::map<Coords, int> seen;
  auto push = [&](const std::string& name, Coords c) -> int {
    c = normalize(*d, std::move(c));
    auto it = seen.find(c);
    if (it != seen.end()) return it->second;
    int idx = static_cast<int>(gens.size());
    seen.emplace(c, idx);
    gens.push_back(Generator{name, GroupElement(d, c), idx});
    return idx;
  };
  for (const auto& [name, coords] : named) {
    Coords c = normalize(*d, coords);
    Coords ci = inv_coords(*d, c);
    bool identity = std::all_of(c.begin(), c.end(), [](std::int64_t v) { return v == 0; });
    if (identity) throw PreconditionError("generator equals the identity (modulus 1 factor?)");
    int a = push(name, c);
    int b = push(name + "^-1", ci);
    gens[static_cast<std::size_t>(a)].inverse_index = b;
    gens[static_cast<std::size_t>(b)].inverse_index = a;
  }
  d->gens = std::move(gens);
}

std::vector<std::pair<std::string, Coords>> abelian_generator_names(const GroupData& d) {
  std::vector<std::pair<std::string, Coords>> named;
  for (std::size_t i = 0; i < d.moduli.size(); ++i) {
    Coords c(d.moduli.size(), 0);
    c[i] = 1;
    named.emplace_back(d.coord_names[i], c);
  }
  return named;
}

std::string join_descriptor(int free_rank, const std::vector<std::int64_t>& orders) {
  std::ostringstream os;
  bool first = true;
  if (free_rank > 0) {
    os << "Z^" << free_rank;
    first = false;
  }
  for (auto o : orders) {
    if (!first) os << " x ";
    os << "C" << o;
    first = false;
  }
  return os.str();
}

}  // namespace

MarkedGroup GroupElement::owner() const { return MarkedGroup(data_); }

GroupElement MarkedGroup::identity() const {
  Coords c(data_->kind == GroupKind::heisenberg3 ? 3 : data_->moduli.size(), 0);
  return GroupElement(data_, std::move(c));
}

GroupElement MarkedGroup::element(Coords coords) const {
  return GroupElement(data_, normalize(*data_, std::move(coords)));
}

GroupElement MarkedGroup::mul(const GroupElement& a, const GroupElement& b) const {
  return GroupElement(data_, mul_coords(*data_, a.coords(), b.coords()));
}

GroupElement MarkedGroup::inv(const GroupElement& a) const {
  return GroupElement(data_, inv_coords(*data_, a.coords()));
}

bool MarkedGroup::is_finite() const {
  if (data_->kind == GroupKind::heisenberg3) return data_->heis_mod > 0;
  return std::all_of(data_->moduli.begin(), data_->moduli.end(),
                     [](std::int64_t m) { return m > 0; });
}

std::int64_t MarkedGroup::order() const {
  if (!is_finite()) throw PreconditionError("order() on an infinite group");
  if (data_->kind == GroupKind::heisenberg3) return data_->heis_mod * data_->heis_mod * data_->heis_mod;
  std::int64_t n = 1;
  for (auto m : data_->moduli) n *= m;
  return n;
}

std::vector<GroupElement> MarkedGroup::enumerate() const {
  std::int64_t n = order();
  std::vector<GroupElement> out;
  out.reserve(static_cast<std::size_t>(n));
  if (data_->kind == GroupKind::heisenberg3) {
    std::int64_t m = data_->heis_mod;
    for (std::int64_t a = 0; a < m; ++a)
      for (std::int64_t b = 0; b < m; ++b)
        for (std::int64_t c = 0; c < m; ++c) out.emplace_back(data_, Coords{a, b, c});
  } else {
    Coords c(data_->moduli.size(), 0);
    while (true) {
      out.emplace_back(data_, c);
      std::size_t i = 0;
      for (; i < c.size(); ++i) {
        if (++c[i] < data_->moduli[i]) break;
        c[i] = 0;
      }
      if (i == c.size()) break;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

int MarkedGroup::word_length(const GroupElement& g) const {
  const GroupData& d = *data_;
  if (d.kind != GroupKind::heisenberg3) {
    std::int64_t len = 0;
    for (std::size_t i = 0; i < g.coords().size(); ++i) {
      std::int64_t v = g.coords()[i];
      std::int64_t m = d.moduli[i];
      len += (m == 0) ? std::abs(v) : std::min(v, m - v);
    }
    return static_cast<int>(len);
  }
  // Heisenberg: explicit BFS from the identity.
  if (g == identity()) return 0;
  std::set<Coords> visited{identity().coords()};
  std::vector<Coords> frontier{identity().coords()};
  constexpr int kMaxRadius = 64;
  for (int r = 1; r <= kMaxRadius; ++r) {
    std::vector<Coords> next;
    for (const auto& c : frontier) {
      for (const auto& gen : d.gens) {
        Coords nc = mul_coords(d, c, gen.element.coords());
        if (visited.insert(nc).second) {
          if (nc == g.coords()) return r;
          next.push_back(std::move(nc));
        }
      }
    }
    frontier = std::move(next);
  }
  throw Error("word_length: search radius exhausted");
}

bool MarkedGroup::same_group(const MarkedGroup& other) const {
  if (data_ == other.data_) return true;
  return data_->kind == other.data_->kind && data_->moduli == other.data_->moduli &&
         data_->heis_mod == other.data_->heis_mod;
}

// -- constructors -------------------------------------------------------------

MarkedGroup make_free_abelian(int d) {
  if (d < 1) throw PreconditionError("free abelian rank must be >= 1");
  return make_free_abelian_times_finite(d, {});
}

MarkedGroup make_free_abelian_times_finite(int d, const std::vector<std::int64_t>& orders) {
  if (d < 0) throw PreconditionError("free rank must be >= 0");
  for (auto o : orders)
    if (o < 2) throw PreconditionError("finite factor order must be >= 2");
  auto data = std::make_shared<GroupData>();
  data->kind = d > 0 ? (orders.empty() ? GroupKind::free_abelian : GroupKind::free_abelian_times_finite)
                     : GroupKind::finite_abelian;
  data->moduli.assign(static_cast<std::size_t>(d), 0);
  data->moduli.insert(data->moduli.end(), orders.begin(), orders.end());
  for (int i = 0; i < d; ++i) data->coord_names.push_back("g" + std::to_string(i));
  if (orders.size() == 1) {
    data->coord_names.push_back("t");
  } else {
    for (std::size_t i = 0; i < orders.size(); ++i) data->coord_names.push_back("t" + std::to_string(i));
  }
  data->descriptor = join_descriptor(d, orders);
  build_generating_set(data, abelian_generator_names(*data));
  return MarkedGroup(data);
}

MarkedGroup make_finite_abelian(const std::vector<std::int64_t>& orders) {
  if (orders.empty()) throw PreconditionError("finite abelian group needs at least one factor");
  return make_free_abelian_times_finite(0, orders);
}

namespace {

MarkedGroup make_heisenberg_mod(std::int64_t m) {
  auto data = std::make_shared<GroupData>();
  data->kind = GroupKind::heisenberg3;
  data->heis_mod = m;
  data->coord_names = {"x", "y", "z"};
  data->descriptor = m == 0 ? "H3" : "H3 % " + std::to_string(m);
  build_generating_set(data, {{"x", Coords{1, 0, 0}}, {"y", Coords{0, 1, 0}}, {"z", Coords{0, 0, 1}}});
  return MarkedGroup(data);
}

}  // namespace

MarkedGroup make_heisenberg() { return make_heisenberg_mod(0); }

GroupElement word_eval(const MarkedGroup& g, const std::vector<std::string>& word) {
  GroupElement acc = g.identity();
  for (const auto& sym : word) {
    const Generator* found = nullptr;
    for (const auto& gen : g.generators()) {
      if (gen.name == sym) {
        found = &gen;
        break;
      }
    }
    if (!found) throw PreconditionError("unknown generator symbol: " + sym);
    acc = g.mul(acc, found->element);
  }
  return acc;
}

// -- quotients ----------------------------------------------------------------

GroupElement QuotientMap::operator()(const GroupElement& x) const {
  return to.element(Coords(x.coords()));
}

std::pair<MarkedGroup, QuotientMap> quotient(const MarkedGroup& g, const std::vector<std::int64_t>& moduli) {
  for (auto m : moduli)
    if (m < 2) throw PreconditionError("quotient modulus must be >= 2");
  const GroupData& d = *g.data();
  if (d.kind == GroupKind::heisenberg3) {
    if (d.heis_mod != 0) throw PreconditionError("quotient of a finite Heisenberg group is not supported");
    if (moduli.size() != 1) throw PreconditionError("Heisenberg quotient takes a single modulus");
    MarkedGroup q = make_heisenberg_mod(moduli[0]);
    return {q, QuotientMap{g, q}};
  }
  std::size_t free_count = 0;
  for (auto m : d.moduli)
    if (m == 0) ++free_count;
  if (free_count == 0) {
    // Finite abelian: quotient of each order by a divisor.
    if (moduli.size() != d.moduli.size()) throw PreconditionError("need one modulus per finite factor");
    for (std::size_t i = 0; i < moduli.size(); ++i)
      if (d.moduli[i] % moduli[i] != 0)
        throw PreconditionError("quotient modulus must divide the factor order");
  } else if (moduli.size() != free_count) {
    throw PreconditionError("need one modulus per free coordinate");
  }

  auto data = std::make_shared<GroupData>();
  data->kind = GroupKind::finite_abelian;
  data->coord_names = d.coord_names;
  data->moduli = d.moduli;
  std::size_t j = 0;
  for (auto& m : data->moduli) {
    if (free_count == 0 || m == 0) m = moduli[j++];
  }
  std::ostringstream os;
  os << d.descriptor << " % (";
  for (std::size_t i = 0; i < moduli.size(); ++i) os << (i ? "," : "") << moduli[i];
  os << ")";
  data->descriptor = os.str();
  build_generating_set(data, abelian_generator_names(*data));
  MarkedGroup q(data);
  return {q, QuotientMap{g, q}};
}

// -- descriptor parsing ---------------------------------------------------------

namespace {

struct DescCursor {
  const std::string& s;
  std::size_t i = 0;
  void skip_ws() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  bool eat(char c) {
    skip_ws();
    if (i < s.size() && s[i] == c) {
      ++i;
      return true;
    }
    return false;
  }
  std::int64_t integer() {
    skip_ws();
    std::size_t start = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i == start) throw ParseError("expected integer in group descriptor", start);
    return std::stoll(s.substr(start, i - start));
  }
};

}  // namespace

MarkedGroup make_group(const std::string& descriptor) {
  DescCursor c{descriptor};
  bool heis = false;
  int free_rank = 0;
  std::vector<std::int64_t> orders;
  while (true) {
    c.skip_ws();
    if (c.i < descriptor.size() && descriptor[c.i] == 'Z') {
      ++c.i;
      free_rank += c.eat('^') ? static_cast<int>(c.integer()) : 1;
    } else if (c.i + 1 < descriptor.size() && descriptor[c.i] == 'H' && descriptor[c.i + 1] == '3') {
      c.i += 2;
      heis = true;
    } else if (c.i < descriptor.size() && descriptor[c.i] == 'C') {
      ++c.i;
      orders.push_back(c.integer());
    } else {
      throw ParseError("expected Z, C<k>, or H3 in group descriptor", c.i);
    }
    c.skip_ws();
    if (c.i < descriptor.size() && descriptor[c.i] == 'x') {
      ++c.i;
      continue;
    }
    break;
  }
  if (heis && (free_rank > 0 || !orders.empty()))
    throw ParseError("H3 cannot be combined with other factors");
  if (free_rank < 0) throw ParseError("negative free rank");

  std::vector<std::int64_t> quot;
  c.skip_ws();
  if (c.i < descriptor.size() && descriptor[c.i] == '%') {
    ++c.i;
    if (c.eat('(')) {
      quot.push_back(c.integer());
      while (c.eat(',')) quot.push_back(c.integer());
      if (!c.eat(')')) throw ParseError("expected ')' in quotient moduli", c.i);
    } else {
      quot.push_back(c.integer());
    }
  }
  c.skip_ws();
  if (c.i != descriptor.size()) throw ParseError("trailing characters in group descriptor", c.i);

  MarkedGroup base;
  if (heis) {
    base = make_heisenberg();
  } else if (free_rank == 0) {
    base = make_finite_abelian(orders);
  } else {
    base = make_free_abelian_times_finite(free_rank, orders);
  }
  if (quot.empty()) return base;
  if (!heis && quot.size() == 1 && free_rank > 1) quot.assign(static_cast<std::size_t>(free_rank), quot[0]);
  return quotient(base, quot).first;
}

}  // namespace frk
