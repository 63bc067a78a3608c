#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "mpmsa/analysis.hpp"

using namespace mpmsa;

namespace {

CellNorms synthetic(const MPBox& box, const std::function<double(const Point&)>& f) {
  CellNorms c;
  for (const auto& p : lattice_points(box)) {
    c.cells.push_back(p);
    c.norms.push_back(f(p));
  }
  return c;
}

Model chain_model(int N, double g) {
  Model m;
  m.N = N;
  m.d = 1;
  m.interaction = InteractionSpec::pairwise(1.0, 1.0);
  m.alloy.law = Distribution::uniform(g);
  return m;
}

}  // namespace

TEST_CASE("cell norms") {
  SUBCASE("a delta sits in one cell") {
    const Grid g = box_grid(make_box({0, 0}, 4, 2, 1), 1.0);
    Eigen::VectorXd psi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.size()));
    psi(10) = 1.0;
    const auto c = cell_norms(psi, g);
    CHECK(c.norms.size() == g.size());
    CHECK(std::count(c.norms.begin(), c.norms.end(), 1.0) == 1);
    std::vector<double> x;
    g.point(10, x);
    CHECK(peak_cell(c) == Point{static_cast<int>(x[0]), static_cast<int>(x[1])});
  }
  SUBCASE("a flat vector at mesh 1/2 spreads by cell size") {
    const Grid g = box_grid(make_box({0}, 3, 1, 1), 0.5);
    const auto M = static_cast<Eigen::Index>(g.size());
    const Eigen::VectorXd psi = Eigen::VectorXd::Constant(M, 1.0 / std::sqrt(static_cast<double>(M)));
    const auto cells = build_cells(g);
    const auto c = cell_norms(psi, cells);
    for (std::size_t i = 0; i < c.cells.size(); ++i)
      CHECK(c.norms[i] == doctest::Approx(std::sqrt(cells.members[i].size() / static_cast<double>(M))));
  }
  SUBCASE("the free chain ground state") {
    const MPBox box = make_box({0}, 16, 1, 1);
    const auto S = eigensolve(assemble<double>(box, 1.0, InteractionSpec::none(), AlloySpec{}, nullptr, 1));
    const auto c = cell_norms(S.vectors.col(0), *S.cells);
    const double scale = std::sqrt(2.0 / 32.0);
    for (std::size_t i = 0; i < c.cells.size(); ++i) {
      const int j = c.cells[i][0] + 15;
      CHECK(c.norms[i] == doctest::Approx(scale * std::sin(std::numbers::pi * (j + 1) / 32.0)).epsilon(1e-10));
    }
    CHECK(peak_cell(c) == Point{0});
  }
  SUBCASE("unnormalized vectors are rejected") {
    const Grid g = box_grid(make_box({0}, 3, 1, 1), 1.0);
    CHECK_THROWS(cell_norms(Eigen::VectorXd::Ones(5), g));
    CHECK_THROWS(cell_norms(Eigen::VectorXd::Ones(3), g));
  }
}

TEST_CASE("decay fits recover a synthetic mass") {
  const MPBox box = make_box({0, 0}, 10, 2, 1);
  const auto c = synthetic(box, [](const Point& p) { return 2.0 * std::exp(-0.3 * max_norm(p)); });
  for (FitMode mode : {FitMode::AllCells, FitMode::Envelope}) {
    const auto f = fit_decay(c, Point{0, 0}, mode);
    CHECK(f.mass == doctest::Approx(0.3));
    CHECK(f.prefactor == doctest::Approx(2.0));
    CHECK(f.r2 == doctest::Approx(1.0));
    CHECK(f.radii == 10);
  }
  CHECK(fit_decay(c, Point{0, 0}, FitMode::Envelope).points == 10);
  CHECK(fit_decay(c, Point{0, 0}, FitMode::AllCells).points == 361);

  const auto flat = synthetic(box, [](const Point&) { return 0.05; });
  CHECK(fit_decay(flat, Point{0, 0}).mass == doctest::Approx(0.0));

  const auto tiny = synthetic(make_box({0, 0}, 3, 2, 1), [](const Point&) { return 1.0; });
  CHECK_THROWS(fit_decay(tiny, Point{0, 0}));
  CHECK_THROWS(fit_decay(c, std::vector<Point>{}));
}

TEST_CASE("particle orbits") {
  CHECK(particle_orbit({1, 2, 3}, 3, 1).size() == 6);
  CHECK(particle_orbit({4, 4}, 2, 1) == std::vector<Point>{Point{4, 4}});
  CHECK(particle_orbit({0, 1, 2, 3}, 2, 2) == std::vector<Point>{Point{0, 1, 2, 3}, Point{2, 3, 0, 1}});
  CHECK(particle_orbit({5, -1, 5}, 3, 1).front() == Point{5, -1, 5});
  CHECK(particle_orbit({5, -1, 5}, 3, 1).size() == 3);
}

TEST_CASE("mirror peaks fit cleanly only with orbit radii") {
  const MPBox box = make_box({0, 0}, 12, 2, 1);
  const Point a{-4, 5};
  const auto orbit = particle_orbit(a, 2, 1);
  const auto c = synthetic(box, [&](const Point& p) {
    return std::exp(-0.4 * std::min(max_norm(p, orbit[0]), max_norm(p, orbit[1])));
  });
  const auto both = fit_decay(c, orbit, FitMode::Envelope);
  CHECK(both.mass == doctest::Approx(0.4));
  CHECK(both.r2 == doctest::Approx(1.0));
  const auto one = fit_decay(c, a, FitMode::Envelope);
  CHECK(one.r2 < 0.99);
}

TEST_CASE("decay table rows") {
  const Model model = chain_model(2, 5.0);
  const auto rows = decay_table(model, {0, 0}, {14, 14}, 3, 4, 0.5);
  REQUIRE(rows.size() == 3);
  for (std::size_t j = 0; j < rows.size(); ++j) {
    CHECK(rows[j].index == static_cast<int>(j));
    CHECK(rows[j].seed == 4);
    CHECK(rows[j].fit.r2 >= 0.0);
    if (j) CHECK(rows[j - 1].fit.energy <= rows[j].fit.energy);
  }
  const auto again = decay_table(model, {0, 0}, {14, 14}, 3, 4, 0.5);
  CHECK(again[2].fit.mass == rows[2].fit.mass);
}

TEST_CASE("GRI constants") {
  std::vector<GriSample> s{{1, 1, 0.1, 0.2, 0.4}, {2, 2, 0.2, 0.9, 0.1}, {3, 1, 0.3, 0.3, 0.3}};
  const auto m = measure_gri_constant(s);
  CHECK(m.C0 == 0.9);
  CHECK(m.max_dgri == 0.4);
  CHECK(m.violations == 0);
  CHECK(measure_gri_constant(s, 0.35).violations == 2);

  GriSuite bad;
  bad.L = 6;
  CHECK_THROWS(sample_gri(chain_model(2, 5.0), bad, 2, 1));
}

TEST_CASE("GRI samples are positive and reproducible") {
  const Model model = chain_model(2, 5.0);
  GriSuite suite;
  const auto a = sample_gri(model, suite, 4, 77);
  const auto b = sample_gri(model, suite, 4, 77);
  REQUIRE(a.size() == 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].gri > 0.0);
    CHECK(a[i].dgri > 0.0);
    CHECK(a[i].gri == b[i].gri);
  }
}

TEST_CASE("calibration bookkeeping") {
  CalibrationSuite suite;
  suite.batch = 3;
  suite.l_star_scales = {8};
  suite.l_star_trials = 2;
  const auto rep = calibrate(chain_model(2, 5.0), suite, 10);
  CHECK(rep.stability >= 1.0);
  CHECK(rep.calibration.C0 == std::max(rep.batch_a.C0, rep.batch_b.C0));
  CHECK(rep.batch_a.samples == 3);
  REQUIRE(rep.l_star_sweep.size() == 1);
  CHECK(rep.calibration.L_star == (rep.l_star_sweep[0].violations ? 9 : 8));
}

TEST_CASE("interaction width sweep") {
  const Model model = chain_model(2, 5.0);
  MSAParams p;
  p.energy_points = 4;
  CHECK(interaction_width_effect(model, 1, 4, {}, {0.5}, p, 4, 1).rows.empty());
  const auto t = interaction_width_effect(model, 1, 4, {0.0, 5.0}, {0.1, 0.3}, p, 6, 1);
  CHECK(t.rows.size() == 4);
  REQUIRE(t.thresholds.size() == 2);
  for (const auto& [g, best] : t.thresholds)
    if (best) CHECK((*best == 0.1 || *best == 0.3));
}
