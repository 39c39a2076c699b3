#include <random>

#include "doctest.h"
#include "frk/folner.hpp"
#include "frk/numutil.hpp"

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

}  // namespace

TEST_CASE("boundary examples") {
  auto z1 = make_group("Z^1");
  auto f = interval(z1, 0, 10);
  auto b = boundary(f, 1);
  CHECK(b.size() == 2);
  CHECK(b.contains(z1.element({0})));
  CHECK(b.contains(z1.element({9})));

  auto z2 = make_group("Z^2");
  CHECK(boundary(box2(z2, 5), 1).size() == 16);  // n^2 - (n-2)^2

  FiniteSubset single(z2, {z2.identity()});
  for (int r : {1, 2, 5}) CHECK(boundary(single, r) == single);

  // Nesting: boundary_r inside boundary_{r+1} inside F.
  auto f2 = box2(z2, 8);
  for (int r = 1; r <= 4; ++r) {
    auto br = boundary(f2, r);
    auto br1 = boundary(f2, r + 1);
    for (const auto& e : br.elements()) {
      CHECK(br1.contains(e));
      CHECK(f2.contains(e));
    }
  }
}

TEST_CASE("isoperimetric constants") {
  auto z2 = make_group("Z^2");
  CHECK(isoperimetric(box2(z2, 10)) == make_ratio(36, 100));
  FiniteSubset single(z2, {z2.identity()});
  CHECK(isoperimetric(single) == 1);
  auto z1 = make_group("Z^1");
  for (int n : {2, 5, 9}) CHECK(isoperimetric(interval(z1, 0, n)) == make_ratio(2, n));
  CHECK_THROWS_AS(isoperimetric(FiniteSubset(z1, {})), PreconditionError);
}

TEST_CASE("canonical Folner sets") {
  auto z1 = make_group("Z^1");
  auto f = folner_set(z1, 10);
  CHECK(!f.whole_group);
  CHECK(f.set == interval(z1, 0, 10));

  auto zc = make_group("Z^1 x C2");
  CHECK(folner_set(zc, 10).set.size() == 20);

  auto h = make_group("H3");
  CHECK(folner_set(h, 4).set.size() == 256);

  auto c6 = make_group("C2 x C3");
  auto whole = folner_set(c6, 3);
  CHECK(whole.whole_group);
  CHECK(whole.set.size() == 6);
}

TEST_CASE("Folner sequence isoperimetric decay") {
  for (const char* desc : {"Z^1", "Z^2", "Z^1 x C2"}) {
    auto g = make_group(desc);
    mpq_class prev = 2;
    for (int n : {2, 4, 8, 16, 32}) {
      auto i = isoperimetric(folner_set(g, n).set);
      CHECK(i <= prev);
      prev = i;
    }
    CHECK(prev <= make_ratio(1, 8));
  }
  // Heisenberg boxes (n, n, n^2); boundaries are thick but i still decays.
  auto h = make_group("H3");
  mpq_class prev = 2;
  for (int n : {2, 4, 8, 16, 32}) {
    auto i = isoperimetric(folner_set(h, n).set);
    CHECK(i < prev);
    prev = i;
  }
  CHECK(prev < make_ratio(1, 4));
}

TEST_CASE("boundary degradation bound on punctured boxes") {
  // If B inside A with |B|/|A| > 1-eps and i(A) < eps, then
  // i(B) < (d+1) * eps / (1-eps).
  auto z2 = make_group("Z^2");
  std::mt19937_64 rng(99);
  auto a = box2(z2, 20);
  mpq_class eps = isoperimetric(a) + make_ratio(1, 100);
  int d = z2.degree();
  for (int trial = 0; trial < 10; ++trial) {
    // Remove strictly fewer than eps * |A| random elements.
    mpq_class max_remove = eps * a.size();
    int remove = static_cast<int>(max_remove.get_d()) - 1;
    std::vector<GroupElement> kept = a.elements();
    for (int k = 0; k < remove; ++k)
      kept.erase(kept.begin() + static_cast<long>(rng() % kept.size()));
    FiniteSubset b(z2, kept);
    REQUIRE(make_ratio(b.size(), a.size()) > 1 - eps);
    mpq_class bound = (d + 1) * eps / (1 - eps);
    CHECK(isoperimetric(b) < bound);
  }
}
