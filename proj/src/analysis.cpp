#include "mpmsa/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

namespace mpmsa {

CellNorms cell_norms(const Eigen::VectorXd& psi, const CellMap& cells) {
  if (std::abs(psi.norm() - 1.0) > 1e-8) throw std::invalid_argument("eigenvector is not normalized");
  CellNorms out;
  out.cells = cells.cells;
  out.norms.reserve(cells.cells.size());
  for (const auto& members : cells.members) {
    double s = 0.0;
    for (std::size_t i : members) {
      const double v = psi(static_cast<Eigen::Index>(i));
      s += v * v;
    }
    out.norms.push_back(std::sqrt(s));
  }
  return out;
}

CellNorms cell_norms(const Eigen::VectorXd& psi, const Grid& grid) {
  if (static_cast<std::size_t>(psi.size()) != grid.size()) throw std::invalid_argument("vector does not match grid");
  return cell_norms(psi, build_cells(grid));
}

Point peak_cell(const CellNorms& c) {
  if (c.cells.empty()) throw std::invalid_argument("no cells");
  return c.cells[static_cast<std::size_t>(std::max_element(c.norms.begin(), c.norms.end()) - c.norms.begin())];
}

std::vector<Point> particle_orbit(const Point& u, int n, int d) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<Point> out;
  do {
    Point v(u.size());
    for (int j = 0; j < n; ++j)
      for (int c = 0; c < d; ++c) v[j * d + c] = u[perm[j] * d + c];
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(std::move(v));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

DecayFit fit_decay(const CellNorms& c, const Point& center, FitMode mode) {
  return fit_decay(c, std::vector<Point>{center}, mode);
}

DecayFit fit_decay(const CellNorms& c, const std::vector<Point>& centers, FitMode mode) {
  if (centers.empty()) throw std::invalid_argument("decay fit needs a center");
  std::map<int, double> envelope;
  std::vector<double> x, y;
  for (std::size_t i = 0; i < c.cells.size(); ++i) {
    if (c.norms[i] < 1e-14) continue;
    int r = max_norm(c.cells[i], centers.front());
    for (const auto& u : centers) r = std::min(r, max_norm(c.cells[i], u));
    if (mode == FitMode::AllCells) {
      x.push_back(r);
      y.push_back(std::log(c.norms[i]));
    }
    auto [it, fresh] = envelope.try_emplace(r, c.norms[i]);
    if (!fresh) it->second = std::max(it->second, c.norms[i]);
  }
  if (envelope.size() < 4) throw std::invalid_argument("decay fit needs >= 4 distinct radii");
  if (mode == FitMode::Envelope)
    for (const auto& [r, v] : envelope) {
      x.push_back(r);
      y.push_back(std::log(v));
    }
  const auto f = linear_fit(x, y);
  DecayFit out;
  out.mass = -f.slope;
  out.prefactor = std::exp(f.intercept);
  out.r2 = f.r2;
  out.points = f.points;
  out.radii = envelope.size();
  return out;
}

std::vector<DecayRow> decay_table(const Model& model, const Point& lo, const std::vector<int>& extent, int count,
                                  std::uint64_t seed, double eta, FitMode mode) {
  const Grid grid = lattice_grid(model.N, model.d, lo, extent);
  const auto dis = sample_disorder(model.alloy, disorder_region(grid, model.alloy.bump), seed);
  const auto H = assemble<double>(grid, model.interaction, model.alloy, &dis, model.N);
  const auto S = eigensolve_lowest(H, count);
  const auto H0 = assemble<double>(grid, model.interaction, AlloySpec{}, nullptr, model.N);
  const double E0 = eigensolve_lowest(H0, 1).values(0);
  std::vector<DecayRow> rows;
  for (int j = 0; j < count; ++j) {
    DecayRow r;
    r.seed = seed;
    r.index = j;
    const auto norms = cell_norms(S.vectors.col(j), *S.cells);
    r.center = peak_cell(norms);
    r.fit = fit_decay(norms, particle_orbit(r.center, grid.n, grid.d), mode);
    r.fit.energy = S.values(j);
    r.in_window = S.values(j) <= E0 + eta;
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<GriSample> sample_gri(const Model& model, const GriSuite& suite, std::size_t count, std::uint64_t seed0) {
  if (suite.L < 8) throw std::invalid_argument("GRI suite needs L >= 8");
  if (suite.n_values.empty()) throw std::invalid_argument("GRI suite needs particle numbers");
  std::vector<GriSample> out;
  std::map<int, double> ground;
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t seed = seed0 + i;
    const int n = suite.n_values[i % suite.n_values.size()];
    const int D = n * model.d, L = suite.L;
    std::mt19937_64 rng(site_key(seed, Point{0x6772, n}));
    auto uniform_int = [&](int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); };
    const int ell = uniform_int(4, L - 4);
    const MPBox big{Point(static_cast<std::size_t>(D), 0), L, n, model.d};
    MPBox small{Point(static_cast<std::size_t>(D), 0), ell, n, model.d};
    for (auto& c : small.center) c = uniform_int(-(L - 3 - ell), L - 3 - ell);
    if (!ground.count(n)) ground[n] = ground_energy_for(model, n, L);
    Instance inst(model, seed);
    const auto& Sb = inst.spectrum(big);
    const auto& Ss = inst.spectrum(small);
    std::uniform_real_distribution<double> ue(ground[n], ground[n] + suite.eta);
    double E;
    do {
      E = ue(rng);
    } while (distance_to_spectrum(Sb.values, E) < 1e-6 || distance_to_spectrum(Ss.values, E) < 1e-6);
    // Entries below ~1e-11 ||G|| are eigendecomposition roundoff, not signal.
    const Resolvent Gb(Sb, E);
    const double floor = 1e-11 / distance_to_spectrum(Sb.values, E);
    Point y(static_cast<std::size_t>(D));
    bool resolved = false;
    for (int attempt = 0; attempt < 1000 && !resolved; ++attempt) {
      do {
        for (auto& c : y) c = uniform_int(-(L - 1), L - 1);
      } while (max_norm(y, small.center) < ell);
      resolved = Gb.block(small.center, y) >= floor;
    }
    if (!resolved) {
      y = small.center;
      y[0] += ell;
    }
    GriSample s;
    s.seed = seed;
    s.n = n;
    s.E = E;
    s.gri = gri_ratio(Ss, Sb, E, {small.center}, {y});
    s.dgri = dgri_ratio(Sb, Ss, E, y);
    out.push_back(s);
  }
  return out;
}

GriConstant measure_gri_constant(const std::vector<GriSample>& samples, std::optional<double> constant) {
  GriConstant g;
  g.samples = samples.size();
  for (const auto& s : samples) {
    g.max_gri = std::max(g.max_gri, s.gri);
    g.max_dgri = std::max(g.max_dgri, s.dgri);
  }
  g.C0 = constant ? *constant : std::max(g.max_gri, g.max_dgri);
  for (const auto& s : samples)
    if (s.gri > g.C0 || s.dgri > g.C0) ++g.violations;
  return g;
}

CalibrationReport calibrate(const Model& model, const CalibrationSuite& suite, std::uint64_t seed0) {
  CalibrationReport rep;
  rep.batch_a = measure_gri_constant(sample_gri(model, suite.gri, suite.batch, seed0));
  rep.batch_b = measure_gri_constant(sample_gri(model, suite.gri, suite.batch, seed0 + suite.batch));
  const double hi = std::max(rep.batch_a.C0, rep.batch_b.C0), lo = std::min(rep.batch_a.C0, rep.batch_b.C0);
  rep.stability = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  rep.calibration.C0 = hi;
  rep.calibration.origin = "gri suite, seeds " + std::to_string(seed0) + ".." +
                           std::to_string(seed0 + 2 * suite.batch - 1);

  Calibration probe = rep.calibration;
  probe.L_star = 1;
  for (int L : suite.l_star_scales) {
    LStarRow row;
    row.L = L;
    const int ell = static_cast<int>(std::ceil(std::pow(static_cast<double>(L), 1.0 / kAlpha) - 1e-9));
    const double E0 = ground_energy_for(model, 1, L);
    for (std::size_t t = 0; t < suite.l_star_trials; ++t) {
      const std::uint64_t seed = seed0 + 2 * suite.batch + static_cast<std::uint64_t>(L) * 100003ULL + t;
      Instance inst(model, seed);
      const MPBox box{Point(static_cast<std::size_t>(model.d), 0), L, 1, model.d};
      const double E = E0 + suite.eta * (0.5 + static_cast<double>(t)) / static_cast<double>(suite.l_star_trials);
      try {
        const auto r = check_ns_lemma(inst, box, E, suite.m, ell, probe, suite.policy, suite.K);
        if (!r.applicable) continue;
        ++row.applicable;
        if (!r.ns) ++row.violations;
      } catch (const ResonantEnergy&) {
      }
    }
    rep.l_star_sweep.push_back(row);
  }
  int L_star = suite.l_star_scales.empty() ? 1 : suite.l_star_scales.front();
  for (const auto& row : rep.l_star_sweep)
    if (row.violations > 0) L_star = row.L + 1;
  rep.calibration.L_star = L_star;
  return rep;
}

WidthTable interaction_width_effect(const Model& model, int n, int L0, const std::vector<double>& gs,
                                    const std::vector<double>& etas, const MSAParams& params, std::size_t trials,
                                    std::uint64_t seed0, int threads) {
  WidthTable table;
  if (gs.empty() || etas.empty()) return table;
  const double eta_max = *std::max_element(etas.begin(), etas.end());
  MSAParams p = params;
  if (!(p.spacing > 0.0)) p.spacing = eta_max > 0.0 ? eta_max / (params.energy_points - 1) : 1.0;
  if (!p.E0) p.E0 = ground_energy_for(model, n, L0);
  const std::vector<int> scales{L0};
  for (double g : gs) {
    Model m = model;
    m.alloy.law = g > 0.0 ? Distribution::uniform(g) : Distribution::point_mass(0.0);
    std::optional<double> best;
    for (double eta : etas) {
      p.eta = eta;
      const auto row = estimate_property(Property::DS, m, n, 0, scales, p, trials, seed0, threads);
      WidthRow w{g, eta, row.frequency, row.ci, row.target, row.point_pass};
      if (w.pass && (!best || eta > *best)) best = eta;
      table.rows.push_back(w);
    }
    table.thresholds.emplace_back(g, best);
  }
  return table;
}

}  // namespace mpmsa
