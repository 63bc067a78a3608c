#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "mpmsa/geometry.hpp"

using namespace mpmsa;

namespace {

// Open 1D interval (c - r, c + r) per coordinate; two cubes meet iff every gap is negative.
bool cubes_meet(const Point& a, const Point& b, double r) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) >= 2 * r) return false;
  return true;
}

Point particle_of(const Point& x, int j, int d) { return Point(x.begin() + j * d, x.begin() + (j + 1) * d); }

// y is J-separable from x, straight from the definition on a single test's terms.
bool j_separable(const Point& y, const Point& x, const std::vector<int>& J, int n, int d, double r) {
  for (int j : J) {
    const Point yj = particle_of(y, j, d);
    for (int k = 0; k < n; ++k) {
      if (std::find(J.begin(), J.end(), k) == J.end() && cubes_meet(yj, particle_of(y, k, d), r)) return false;
      if (cubes_meet(yj, particle_of(x, k, d), r)) return false;
    }
  }
  return true;
}

bool separable_by_hand(const MPBox& a, const MPBox& b, double R, int N) {
  int gap = 0;
  for (std::size_t i = 0; i < a.center.size(); ++i)
    gap = std::max(gap, std::abs(a.center[i] - b.center[i]) - 2 * a.radius);
  if (gap <= 2 * N * (a.radius + R)) return false;
  for (int mask = 1; mask < (1 << a.n); ++mask) {
    std::vector<int> J;
    for (int j = 0; j < a.n; ++j)
      if (mask >> j & 1) J.push_back(j);
    const double r = a.radius + R;
    if (j_separable(b.center, a.center, J, a.n, a.d, r) || j_separable(a.center, b.center, J, a.n, a.d, r))
      return true;
  }
  return false;
}

Point random_point(std::mt19937_64& rng, int D, int lo, int hi) {
  std::uniform_int_distribution<int> u(lo, hi);
  Point p(static_cast<std::size_t>(D));
  for (auto& c : p) c = u(rng);
  return p;
}

}  // namespace

TEST_CASE("projection onto single particles") {
  const MPBox box{{0, 10}, 2, 2, 1};
  const MPBox p = projection(box, 1);
  CHECK(p.center == Point{10});
  CHECK(p.radius == 2);
  const auto all = full_projection(box);
  REQUIRE(all.size() == 2);
  CHECK(all[0].center == Point{0});
  CHECK(all[1].center == Point{10});
  CHECK_THROWS_AS(projection(box, 2), std::out_of_range);
}

TEST_CASE("box validation") {
  CHECK_THROWS(make_box({0}, 0, 1, 1));
  CHECK_THROWS(make_box({0, 0}, 2, 1, 1));
  CHECK(make_box({0, 0}, 3, 2, 1).lattice_count() == 25);
}

TEST_CASE("box distance is the max-norm gap between open cubes") {
  CHECK(box_distance(MPBox{{0}, 2, 1, 1}, MPBox{{10}, 2, 1, 1}) == 6);
  CHECK(box_distance(MPBox{{0, 0}, 2, 2, 1}, MPBox{{1, 30}, 2, 2, 1}) == 26);
  CHECK(box_distance(MPBox{{0}, 2, 1, 1}, MPBox{{3}, 2, 1, 1}) == 0);
}

TEST_CASE("separability examples") {
  const double R = 1;
  const int N = 2;
  SUBCASE("mixed coordinates block every J") {
    const MPBox a{{0, 20}, 2, 2, 1}, b{{22, -2}, 2, 2, 1};
    CHECK_FALSE(separable_by_hand(a, b, R, N));
    CHECK_FALSE(is_separable_pair(a, b, R, N).separable);
  }
  SUBCASE("far second particle") {
    const MPBox a{{0, 0}, 2, 2, 1}, b{{0, 100}, 2, 2, 1};
    CHECK(separable_by_hand(a, b, R, N));
    const auto v = is_separable_pair(a, b, R, N);
    CHECK(v.separable);
    CHECK(v.witness == std::vector<int>{1});
    CHECK(v.direction == Direction::SecondFromFirst);
  }
  SUBCASE("identical boxes") {
    const MPBox a{{3, 7}, 2, 2, 1};
    CHECK_FALSE(is_separable_pair(a, a, R, N).separable);
  }
  CHECK_THROWS(is_separable_pair(MPBox{{0, 0}, 2, 2, 1}, MPBox{{0, 0}, 3, 2, 1}, R, N));
}

TEST_CASE("separability agrees with the definition on random pairs") {
  std::mt19937_64 rng(11);
  std::size_t separable = 0;
  for (int t = 0; t < 3000; ++t) {
    const int n = 2 + t % 2, d = 1 + (t / 2) % 2, L = 1 + t % 3, N = n + t % 2;
    const MPBox a{random_point(rng, n * d, -30, 30), L, n, d};
    const MPBox b{random_point(rng, n * d, -30, 30), L, n, d};
    const auto v = is_separable_pair(a, b, 1.0, N);
    REQUIRE(v.separable == separable_by_hand(a, b, 1.0, N));
    if (v.separable) {
      ++separable;
      const MPBox& y = v.direction == Direction::SecondFromFirst ? b : a;
      const MPBox& x = v.direction == Direction::SecondFromFirst ? a : b;
      CHECK(j_separable(y.center, x.center, v.witness, n, d, L + 1.0));
    }
  }
  CHECK(separable > 100);
}

TEST_CASE("non-separable cover") {
  CHECK(kappa(2) == 4);
  CHECK(kappa(3) == 27);
  CHECK(non_separable_cover({0, 5}, 2, 1, 2, 1.0).size() <= 4);
  CHECK(non_separable_cover({0, 5, -3}, 3, 1, 2, 1.0).size() <= 27);
  CHECK_THROWS(non_separable_cover({0}, 1, 1, 2, 1.0));
  for (const auto& b : non_separable_cover({0, 5}, 2, 1, 3, 1.0)) CHECK(b.radius <= 2 * 2 * (3 + 1));

  std::mt19937_64 rng(5);
  const int L = 2, N = 2;
  const double R = 1;
  std::size_t tested = 0;
  for (int t = 0; t < 2000; ++t) {
    const Point x = random_point(rng, 2, -10, 10), y = random_point(rng, 2, -80, 80);
    const auto cover = non_separable_cover(x, 2, 1, L, R);
    if (std::any_of(cover.begin(), cover.end(), [&](const MPBox& c) { return contains(c, y); })) continue;
    const MPBox a{x, L, 2, 1}, b{y, L, 2, 1};
    if (box_distance(a, b) <= 2 * N * (L + R)) continue;
    ++tested;
    CHECK(is_separable_pair(a, b, R, N).separable);
  }
  CHECK(tested > 500);
}

TEST_CASE("centered-box criterion") {
  // □_{L+R}(y) misses □_{|x|+L+R}(0) and dist > 2N(L+R)  =>  separable. With only
  // dist > 2NL the definition's own distance clause can fail, so the stronger gap is used.
  std::mt19937_64 rng(9);
  const int L = 2, N = 2;
  const double R = 1;
  std::size_t tested = 0;
  for (int t = 0; t < 4000; ++t) {
    const Point x = random_point(rng, 2, -6, 6), y = random_point(rng, 2, -40, 40);
    const int r = max_norm(x) + L + static_cast<int>(R);
    bool meets = true;
    for (int c = 0; c < 2; ++c) meets = meets && std::abs(y[c]) < r + L + R;
    if (meets) continue;
    const MPBox a{x, L, 2, 1}, b{y, L, 2, 1};
    if (box_distance(a, b) <= 2 * N * (L + R)) continue;
    ++tested;
    CHECK(is_separable_pair(a, b, R, N).separable);
  }
  CHECK(tested > 100);
}

TEST_CASE("annuli family") {
  const auto A = annuli_family({0, 0}, 8, 2, 1.0);
  REQUIRE(A.size() == 9);
  CHECK(A[0].width() == 73);
  CHECK(A[0].inner == 8);
  for (std::size_t j = 1; j < A.size(); ++j) CHECK(A[j].inner == A[j - 1].outer);
  CHECK(A.back().outer == 8 + 9 * 73);
  CHECK(annuli_family({0}, 3, 2, 1.0, 5)[0].width() == 5);
  CHECK(annuli_family({0}, 3, 3, 1.0).size() == 55);
}

TEST_CASE("odd annuli pigeonhole") {
  // Among the κ+1 odd-indexed annuli one holds no center of a box non-separable from □_L(x).
  std::mt19937_64 rng(21);
  const int L = 2, N = 2, n = 2;
  const double R = 1;
  for (int t = 0; t < 3; ++t) {
    const Point x = random_point(rng, 2, -4, 4);
    const auto A = annuli_family(x, L, n, R);
    bool some_clean = false;
    for (std::size_t j = 0; j < A.size() && !some_clean; j += 2) {
      bool clean = true;
      for (int y0 = x[0] - A[j].outer; y0 <= x[0] + A[j].outer && clean; ++y0)
        for (int y1 = x[1] - A[j].outer; y1 <= x[1] + A[j].outer && clean; ++y1) {
          const Point y{y0, y1};
          if (!A[j].contains(y)) continue;
          clean = is_separable_pair(MPBox{x, L, n, 1}, MPBox{y, L, n, 1}, R, N).separable;
        }
      some_clean = clean;
    }
    CHECK(some_clean);
  }
}

TEST_CASE("clump decomposition") {
  using Clumps = std::vector<std::vector<int>>;
  CHECK(clump_decomposition({0, 1, 100}, 3, 1, 2, 1.0) == Clumps{{0, 1}, {2}});
  CHECK(clump_decomposition({4, 4, 4}, 3, 1, 2, 1.0) == Clumps{{0, 1, 2}});
  CHECK(clump_decomposition({0, 7, 14}, 3, 1, 2, 1.0) == Clumps{{0}, {1}, {2}});
  // Chains link through a middle particle.
  CHECK(clump_decomposition({0, 6, 12}, 3, 1, 2, 1.0) == Clumps{{0, 1, 2}});
  CHECK(clump_decomposition({0, 6, 12}, 3, 1, 2, 1.0, CubeClosure::Open) == Clumps{{0}, {1}, {2}});

  std::mt19937_64 rng(3);
  for (int t = 0; t < 300; ++t) {
    const int n = 2 + t % 4, d = 1 + t % 2, L = 1 + t % 3;
    const Point y = random_point(rng, n * d, -15, 15);
    const auto clumps = clump_decomposition(y, n, d, L, 1.0);
    std::set<int> seen;
    for (const auto& c : clumps)
      for (int j : c) CHECK(seen.insert(j).second);
    CHECK(static_cast<int>(seen.size()) == n);
    CHECK(static_cast<int>(clumps.size()) <= n);
    for (const auto& c : clumps) {
      // Diameter of each clump's positions stays within 2n(L+R).
      for (int j : c)
        for (int k : c) CHECK(max_norm(particle_of(y, j, d), particle_of(y, k, d)) <= 2 * n * (L + 1));
    }
    // Maximality: particles in different clumps never touch.
    for (std::size_t a = 0; a < clumps.size(); ++a)
      for (std::size_t b = a + 1; b < clumps.size(); ++b)
        for (int j : clumps[a])
          for (int k : clumps[b])
            CHECK(max_norm(particle_of(y, j, d), particle_of(y, k, d)) > 2 * (L + 1));
  }
}

TEST_CASE("interaction classification") {
  SUBCASE("examples") {
    const auto pi = classify_interaction(MPBox{{0, 10}, 2, 2, 1}, 2.0, 2);
    CHECK(pi.tag == InteractionTag::PI);
    CHECK(pi.partition == std::vector<int>{0});
    CHECK(pi.min_cross_gap == doctest::Approx(6.0));
    CHECK(classify_interaction(MPBox{{0, 1}, 2, 2, 1}, 2.0, 2).tag == InteractionTag::FI);
    CHECK(classify_interaction(MPBox{{7}, 3, 1, 1}, 2.0, 2).tag == InteractionTag::FI);
  }
  SUBCASE("FI iff the lattice box meets the diagonal neighbourhood") {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 400; ++t) {
      const int n = 2 + t % 2, L = 1 + t % 3, N = n;
      const double r0 = 1.0 + t % 2;
      const MPBox b{random_point(rng, n, -12, 12), L, n, 1};
      bool meets = false;
      for (const auto& x : lattice_points(b)) {
        int spread = 0;
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) spread = std::max(spread, std::abs(x[j] - x[k]));
        meets = meets || spread <= N * r0;
      }
      CHECK((classify_interaction(b, r0, N).tag == InteractionTag::FI) == meets);
    }
  }
  SUBCASE("FI boxes have bounded center spread") {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 400; ++t) {
      const int n = 2 + t % 2, L = 1 + t % 4, N = 3;
      const double r0 = 1.5;
      const MPBox b{random_point(rng, n, -10, 10), L, n, 1};
      if (classify_interaction(b, r0, N).tag != InteractionTag::FI) continue;
      int diam = 0;
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) diam = std::max(diam, std::abs(b.center[j] - b.center[k]));
      CHECK(diam <= N * r0 + 2 * (L - 1));
    }
  }
}

TEST_CASE("separable FI pairs have disjoint projections") {
  std::mt19937_64 rng(12);
  const int L = 2, N = 2;
  const double r0 = 1.0, R = 1.0;
  std::size_t pairs = 0;
  for (int t = 0; t < 20000 && pairs < 1000; ++t) {
    const Point ua = random_point(rng, 2, -40, 40), ub = random_point(rng, 2, -40, 40);
    const MPBox a{ua, L, 2, 1}, b{ub, L, 2, 1};
    if (classify_interaction(a, r0, N).tag != InteractionTag::FI) continue;
    if (classify_interaction(b, r0, N).tag != InteractionTag::FI) continue;
    if (!is_separable_pair(a, b, R, N).separable) continue;
    ++pairs;
    CHECK(fi_projection_disjointness(a, b, R));
  }
  CHECK(pairs > 100);
  const MPBox a{{0, 1}, L, 2, 1}, b{{4, 5}, L, 2, 1};
  CHECK_FALSE(fi_projection_disjointness(a, b, R));
  CHECK_FALSE(fi_projection_disjointness(a, a, R));
}

TEST_CASE("outer layer and interior") {
  CHECK(interior(MPBox{{0}, 9, 1, 1}).radius == 3);
  CHECK_THROWS(interior(MPBox{{0}, 3, 1, 1}));
  const MPBox b{{0, 0}, 4, 2, 1};
  const auto out = outer_layer(b);
  CHECK(out.size() == 49 - 9);
  for (const auto& p : out) {
    CHECK(max_norm(p) >= 2);
    CHECK(max_norm(p) <= 3);
  }
  CHECK(inner_boundary(b).size() == 49 - 25);
}
