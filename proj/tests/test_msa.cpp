#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>

#include "mpmsa/msa.hpp"

using namespace mpmsa;

namespace {

Model chain_model(int N, double g) {
  Model m;
  m.N = N;
  m.d = 1;
  m.interaction = InteractionSpec::pairwise(1.0, 1.0);
  m.alloy.law = Distribution::uniform(g);
  return m;
}

SingularityField field_with(const MPBox& ambient, int ell, std::set<Point> singular) {
  return injected_field(ambient, ell, [&](const Point& c) { return singular.count(c) != 0; });
}

}  // namespace

TEST_CASE("scale sequences") {
  CHECK(scale_sequence(10, 3) == std::vector<int>{10, 31, 172, 2255});
  CHECK(scale_sequence(4, 3) == std::vector<int>{4, 8, 22, 103});
  CHECK(scale_sequence(7, 0) == std::vector<int>{7});
  for (int L0 = 2; L0 <= 60; ++L0) {
    const auto s = scale_sequence(L0, 3);
    for (std::size_t k = 1; k < s.size(); ++k) {
      const long double v = std::pow(static_cast<long double>(s[k - 1]), 1.5L);
      CHECK(s[k] == static_cast<int>(std::floor(v)));
    }
  }
  CHECK_THROWS(scale_sequence(1, 2));
  CHECK_THROWS(scale_sequence(4, -1));
  CHECK_THROWS_AS(scale_sequence(10, 6), std::overflow_error);
}

TEST_CASE("radial descent bound") {
  CHECK(radial_descent_bound(0.5, 31, 0, 8, 2.0) == doctest::Approx(2.0 * std::pow(0.5, 7.0 / 8.0)));
  CHECK(radial_descent_bound(0.5, 40, 4, 4, 1.0) == doctest::Approx(std::pow(0.5, 6.0)));
  CHECK_THROWS(radial_descent_bound(0.5, 24, 0, 8, 1.0));
  CHECK_THROWS(radial_descent_bound(0.5, 24, 0, 0, 1.0));
}

TEST_CASE("box functions index lattice points") {
  const MPBox box = make_box({1, -2}, 4, 2, 1);
  const auto f = make_box_function(box, [](const Point& p) { return 10.0 * p[0] + p[1]; });
  CHECK(f.values.size() == 49);
  for (const auto& p : lattice_points(box)) CHECK(f.at(p) == 10.0 * p[0] + p[1]);
  CHECK_THROWS_AS(f.index(Point{5, 0}), std::out_of_range);
}

TEST_CASE("covering annuli") {
  const MPBox box = make_box({0}, 20, 1, 1);
  const auto a = covering_annuli(box, {Point{3}, Point{-4}, Point{4}, Point{10}});
  REQUIRE(a.size() == 2);
  CHECK(a[0].inner == 3);
  CHECK(a[0].outer == 5);
  CHECK(a[1].width() == 1);
  CHECK(covering_annuli(box, {}).empty());
}

TEST_CASE("subharmonicity: constants and spikes") {
  const MPBox box = make_box({0, 0}, 10, 2, 1);
  const auto one = make_box_function(box, [](const Point&) { return 1.0; });
  SUBCASE("a constant is 1-subharmonic and nothing less") {
    auto c = verify_subharmonic(one, 1.0, 2.0, 2, {});
    CHECK(c.holds);
    CHECK(c.checked == 15 * 15);
    CHECK(c.W == 0);
    CHECK(c.descent_checked);
    CHECK_FALSE(verify_subharmonic(one, 0.9, 2.0, 2, {}).holds);
  }
  SUBCASE("a spike fails condition (i) or (ii) where it sits") {
    const Point p{3, 1};
    const auto spike = make_box_function(box, [&](const Point& x) { return x == p ? 1.0 : 0.0; });
    auto c = verify_subharmonic(spike, 0.5, 2.0, 2, {});
    CHECK_FALSE(c.holds);
    CHECK(c.counterexample == p);
    CHECK(c.failed_condition == "(i)");
    auto s = verify_subharmonic(spike, 0.5, 2.0, 2, {p});
    CHECK(s.failed_condition == "(ii)");
    CHECK(s.W == 1);
  }
  SUBCASE("input validation") {
    auto bad = one;
    bad.values[3] = -1.0;
    CHECK_THROWS(verify_subharmonic(bad, 1.0, 2.0, 2, {}));
    CHECK_THROWS(verify_subharmonic(one, 1.0, 2.0, 0, {}));
  }
}

TEST_CASE("subharmonicity: outward growth has a sharp constant") {
  // f = e^{a|x|}: the worst ratio f(x)/max over the ball is e^{-aℓ}, at |x| = L-1-ℓ.
  const double a = 0.3;
  const int ell = 2;
  const MPBox box = make_box({0}, 16, 1, 1);
  const auto f = make_box_function(box, [&](const Point& x) { return std::exp(a * max_norm(x)); });
  const double Q = std::exp(-a * ell);
  const auto c = verify_subharmonic(f, Q, 2.0, ell, {});
  CHECK(c.holds);
  CHECK(c.descent_holds);
  const auto tight = verify_subharmonic(f, 0.99 * Q, 2.0, ell, {});
  CHECK_FALSE(tight.holds);
  CHECK(max_norm(*tight.counterexample) == 16 - 1 - ell);
  // The sphere |w - x| = 2ℓ+1 leaves the box near the edge.
  CHECK_FALSE(verify_subharmonic(f, Q, 2.0, ell, {}, ReferenceShell::Sphere).holds);
}

TEST_CASE("sub-box centers and fields") {
  const MPBox amb = make_box({0}, 40, 1, 1);
  CHECK(sub_box_centers(amb, 2).size() == 77);
  CHECK(sub_box_centers(amb, 2, 4).size() == 19);
  const auto f = field_with(amb, 2, {Point{0}, Point{5}});
  CHECK(f.singular_centers() == std::vector<Point>{Point{0}, Point{5}});
  CHECK(f.is_singular(Point{5}));
  CHECK_FALSE(f.is_singular(Point{6}));
}

TEST_CASE("S-chains and enveloping boxes") {
  const MPBox amb = make_box({0}, 40, 1, 1);
  // From v1 = 0 the chain steps to distance ℓ+ℓ+1 = 5, then 7, then 9.
  const auto f = field_with(amb, 2, {Point{0}, Point{5}, Point{7}, Point{-20}});
  const auto chains = find_s_chains(f);
  REQUIRE(chains.size() == 2);
  CHECK(chains[0].centers == std::vector<Point>{Point{-20}});
  CHECK(chains[1].centers == std::vector<Point>{Point{0}, Point{5}, Point{7}});
  CHECK(max_chain_length(chains) == 3);

  const auto e = enveloping_box(chains[1], f);
  CHECK(e.box.radius == 9);
  CHECK(e.within_margin);
  CHECK(e.boundary_ns);

  const auto g = field_with(amb, 2, {Point{0}, Point{5}, Point{7}, Point{12}});
  const auto eg = enveloping_box(find_s_chains(g)[0], g);
  CHECK_FALSE(eg.boundary_ns);
  CHECK(eg.adjacent_singular == std::vector<Point>{Point{12}});
  CHECK_THROWS(enveloping_box(SChain{}, g));
}

TEST_CASE("bad boxes need a singular box in every annulus") {
  // n = 1, ℓ = 2: width 5, annuli [7,12) and [17,22); 2-boxes fit at distance 9..10 and 19..20.
  const MPBox amb = make_box({0}, 30, 1, 1);
  const auto bad = detect_bad_box(Point{0}, field_with(amb, 2, {Point{0}, Point{-10}, Point{19}}), 1);
  CHECK(bad.bad);
  REQUIRE(bad.annuli.size() == 2);
  CHECK(bad.annuli[0].inner == 7);
  CHECK(bad.witnesses[1] == Point{19});

  const auto good = detect_bad_box(Point{0}, field_with(amb, 2, {Point{0}, Point{-10}, Point{21}}), 1);
  CHECK_FALSE(good.bad);
  CHECK_FALSE(good.witnesses[1].has_value());
  CHECK_FALSE(detect_bad_box(Point{0}, field_with(amb, 2, {Point{-10}, Point{19}}), 1).bad);
  CHECK(detect_bad_box(Point{0}, field_with(amb, 2, {Point{0}, Point{-15}}), 1, 10).witnesses[0] == Point{-15});
}

TEST_CASE("tunnelling") {
  const MPBox factor = make_box({0}, 20, 1, 1);
  auto singular_at = [](std::set<Point> s) {
    return SubBoxOracle([s](const MPBox& b, double) { return s.count(b.center) != 0; });
  };
  const auto far = classify_tunneling(factor, 2, {0.1, 0.2}, 1.0, 2, singular_at({Point{-10}, Point{10}}));
  CHECK(far.tunneling);
  CHECK(far.energy == 0.1);
  CHECK(far.pair->first == Point{-10});
  CHECK_FALSE(classify_tunneling(factor, 2, {0.1}, 1.0, 2, singular_at({Point{0}, Point{1}})).tunneling);
  CHECK_FALSE(classify_tunneling(factor, 2, {}, 1.0, 2, singular_at({Point{-10}, Point{10}})).tunneling);

  // Only particle 1's factor (centered at 40) has separable singular boxes.
  const MPBox pair = make_box({0, 40}, 20, 2, 1);
  const auto pt = classify_partial_tunneling(pair, 2, {0.3}, 1.0, 2, singular_at({Point{30}, Point{50}}));
  CHECK(pt.tunneling);
  CHECK(pt.factor == std::vector<int>{1});
  CHECK_THROWS(classify_partial_tunneling(factor, 2, {0.3}, 1.0, 2, singular_at({})));
}

TEST_CASE("separable singular counts") {
  const MPBox box = make_box({0, 0}, 12, 2, 1);
  const auto none = count_singular_separable(box, 2, 0.0, 1.0, 1.0, 2, [](const MPBox&, double) { return false; });
  CHECK(none.nu_S == 0);
  CHECK(none.candidates == 21 * 21);
  const auto one = count_singular_separable(box, 2, 0.0, 1.0, 1.0, 2,
                                            [](const MPBox& b, double) { return b.center == Point{0, 0}; });
  CHECK(one.nu_S == 1);
  CHECK(one.nu_FI == 1);
  CHECK(one.nu_PI == 0);
  const auto all = count_singular_separable(box, 2, 0.0, 1.0, 1.0, 2, [](const MPBox&, double) { return true; });
  CHECK(all.singular == all.candidates);
  CHECK(all.nu_S >= 1);
  CHECK(all.nu_S <= static_cast<int>(all.singular));
}

TEST_CASE("FI candidates agree with direct classification") {
  for (const auto& box : {make_box({0, 0}, 14, 2, 1), make_box({3, -9}, 12, 2, 1), make_box({0, 4, 9}, 7, 3, 1)}) {
    for (int ell : {2, 3}) {
      std::vector<Point> direct;
      for (const auto& c : sub_box_centers(box, ell))
        if (classify_interaction(MPBox{c, ell, box.n, box.d}, 1.0, 2).tag == InteractionTag::FI) direct.push_back(c);
      auto fast = fi_candidate_centers(box, ell, 1.0, 2);
      std::sort(fast.begin(), fast.end());
      std::sort(direct.begin(), direct.end());
      CHECK(fast == direct);
    }
  }
}

TEST_CASE("energy grids") {
  const auto g = make_energy_grid(0.0, 1.0, 5);
  CHECK(g.spacing == doctest::Approx(0.25));
  CHECK(g.points().size() == 5);
  CHECK(g.points().back() == doctest::Approx(1.0));
  // Fixed spacing nests the grids of smaller intervals.
  const auto half = make_energy_grid(0.0, 0.5, 5, 0.25).points();
  const auto full = g.points();
  CHECK(std::equal(half.begin(), half.end(), full.begin()));
  CHECK_THROWS(make_energy_grid(0.0, -1.0, 5));
  CHECK_THROWS(make_energy_grid(0.0, 1.0, 1));

  const auto S = eigensolve(assemble<double>(make_box({0}, 4, 1, 1), 1.0, InteractionSpec::none(), AlloySpec{},
                                            nullptr, 1));
  auto Sb = S;
  Sb.box = make_box({0}, 4, 1, 1);
  const auto probes = probe_energies(make_energy_grid(0.0, 1.0, 3), {&Sb});
  CHECK(std::is_sorted(probes.begin(), probes.end()));
  CHECK(probes.size() > 3);
  for (double E : probes) CHECK((E >= 0.0 && E <= 1.0));
}

TEST_CASE("separable partner boxes") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto [a, b] = sample_separable_pair(2, 1, 6, 1.0, 2, seed);
    CHECK(is_separable_pair(a, b, 1.0, 2).separable);
    CHECK(box_distance(a, b) > 2 * 2 * (6 + 1));
    const auto again = sample_separable_pair(2, 1, 6, 1.0, 2, seed);
    CHECK(again.first == a);
    CHECK(again.second == b);
  }
}

TEST_CASE("property estimates") {
  const Model model = chain_model(2, 5.0);
  const auto scales = scale_sequence(4, 1);
  MSAParams p;
  p.energy_points = 8;
  SUBCASE("argument checks") {
    CHECK_THROWS_AS(estimate_property(Property::DS, model, 1, 0, scales, p, 0, 1), std::invalid_argument);
    CHECK_THROWS(estimate_property(Property::DS, model, 3, 0, scales, p, 4, 1));
    CHECK_THROWS(estimate_property(Property::DS, model, 1, 2, scales, p, 4, 1));
    CHECK_THROWS(estimate_property(Property::PT, model, 1, 0, scales, p, 4, 1));
    MSAParams capped = p;
    capped.dense_limit = 5;
    CHECK_THROWS_AS(estimate_property(Property::DS, model, 1, 0, scales, capped, 4, 1), std::length_error);
  }
  SUBCASE("rows are consistent") {
    const auto r = estimate_property(Property::W1, model, 1, 1, scales, p, 20, 100);
    CHECK(r.seed_lo == 100);
    CHECK(r.seed_hi == 119);
    CHECK(r.outcomes.size() == 20);
    CHECK(r.frequency == doctest::Approx(r.events / 20.0));
    CHECK(r.ci.lo <= r.frequency);
    CHECK(r.ci.hi >= r.frequency);
    CHECK(r.target == doctest::Approx(1.0 / 8.0));
    CHECK(r.verdict == (r.ci.hi <= r.target ? "pass" : r.ci.lo > r.target ? "fail" : "inconclusive"));
  }
  SUBCASE("threads do not change outcomes") {
    const auto a = estimate_property(Property::DS, model, 1, 1, scales, p, 12, 5, 1);
    const auto b = estimate_property(Property::DS, model, 1, 1, scales, p, 12, 5, 3);
    CHECK(a.outcomes == b.outcomes);
  }
  SUBCASE("a larger energy interval can only add events") {
    MSAParams wide = p;
    p.spacing = wide.spacing = 0.05;
    p.E0 = wide.E0 = ground_energy_for(model, 1, scales[1]);
    p.eta = 0.2;
    wide.eta = 0.6;
    for (Property prop : {Property::DS, Property::W2}) {
      const auto small = estimate_property(prop, model, 1, 1, scales, p, 30, 1);
      const auto big = estimate_property(prop, model, 1, 1, scales, wide, 30, 1);
      for (std::size_t t = 0; t < 30; ++t) CHECK(small.outcomes[t] <= big.outcomes[t]);
    }
  }
}

TEST_CASE("induction reports") {
  const Model model = chain_model(2, 5.0);
  MSAParams p;
  p.energy_points = 4;
  CHECK(induction_report(model, {}, p, 4, 1).rows.empty());
  const auto rep = induction_report(model, scale_sequence(4, 1), p, 4, 1, 1, false);
  CHECK(rep.rows.size() == 4);
  REQUIRE(rep.steps.size() == 2);
  for (const auto& s : rep.steps) CHECK(s.holds == (!s.pass_k || s.pass_k1));
  CHECK_FALSE(rep.notes.empty());
}

TEST_CASE("parallel_for visits every index once") {
  std::vector<std::atomic<int>> hits(500);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS(parallel_for(10, 2, [](std::size_t i) {
    if (i == 7) throw std::runtime_error("boom");
  }));
}
