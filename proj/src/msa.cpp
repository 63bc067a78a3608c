#include "mpmsa/msa.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace mpmsa {

std::vector<int> scale_sequence(int L0, int k_max) {
  if (L0 < 2) throw std::invalid_argument("scale sequence needs L0 >= 2");
  if (k_max < 0) throw std::invalid_argument("k_max must be >= 0");
  std::vector<int> out{L0};
  for (int k = 1; k <= k_max; ++k) {
    const auto L = static_cast<std::uint64_t>(out.back());
    const std::uint64_t cube = L * L * L;
    auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(cube)));
    while (r * r > cube) --r;
    while ((r + 1) * (r + 1) <= cube) ++r;
    if (r > static_cast<std::uint64_t>(std::numeric_limits<int>::max()))
      throw std::overflow_error("scale exceeds int range");
    out.push_back(static_cast<int>(r));
  }
  return out;
}

double radial_descent_bound(double Q, int L, int W, int ell, double max_f) {
  if (ell < 1) throw std::invalid_argument("descent needs ell >= 1");
  if (L <= W + 3 * ell) throw std::invalid_argument("descent bound is vacuous for L <= W + 3 ell");
  return std::pow(Q, static_cast<double>(L - W - 3 * ell) / ell) * max_f;
}

std::size_t BoxFunction::index(const Point& p) const {
  const int D = box.n * box.d, r = box.radius - 1, side = 2 * box.radius - 1;
  std::size_t idx = 0;
  for (int i = 0; i < D; ++i) {
    const int off = p[i] - box.center[i] + r;
    if (off < 0 || off >= side) throw std::out_of_range("point outside the lattice box");
    idx = idx * static_cast<std::size_t>(side) + static_cast<std::size_t>(off);
  }
  return idx;
}

BoxFunction make_box_function(const MPBox& box, const std::function<double(const Point&)>& f) {
  BoxFunction out{box, {}};
  out.values.reserve(box.lattice_count());
  for_each_lattice_point(box, [&](const Point& p) { out.values.push_back(f(p)); });
  return out;
}

std::vector<Annulus> covering_annuli(const MPBox& box, const std::vector<Point>& S) {
  std::set<int> radii;
  for (const auto& s : S) radii.insert(max_norm(s, box.center));
  std::vector<Annulus> out;
  for (int r : radii) {
    if (!out.empty() && out.back().outer == r)
      out.back().outer = r + 1;
    else
      out.push_back(Annulus{box.center, r, r + 1});
  }
  return out;
}

SubharmonicCertificate verify_subharmonic(const BoxFunction& f, double Q, double A, int ell,
                                          const std::vector<Point>& S, ReferenceShell shell) {
  const MPBox& box = f.box;
  if (ell < 1) throw std::invalid_argument("subharmonicity needs ell >= 1");
  if (f.values.size() != box.lattice_count()) throw std::invalid_argument("function size does not match the box");
  for (double v : f.values)
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("function must be finite and nonnegative");

  SubharmonicCertificate c;
  c.Q = Q;
  c.A = A;
  c.ell = ell;
  c.covering = covering_annuli(box, S);
  for (const auto& a : c.covering) c.W += a.width();
  const std::set<Point> inS(S.begin(), S.end());
  const auto points = lattice_points(box);
  const int reach = box.radius - 1 - ell;
  const int span = 2 * box.radius;
  std::vector<double> shell_max(static_cast<std::size_t>(span));
  const auto slack = [](double lhs, double rhs) { return lhs <= rhs * (1.0 + 1e-12); };
  c.holds = true;

  for (std::size_t i = 0; i < points.size() && c.holds; ++i) {
    const Point& x = points[i];
    if (max_norm(x, box.center) > reach) continue;
    std::fill(shell_max.begin(), shell_max.end(), 0.0);
    for (std::size_t j = 0; j < points.size(); ++j) {
      const int r = max_norm(points[j], x);
      shell_max[r] = std::max(shell_max[r], f.values[j]);
    }
    auto range_max = [&](int lo, int hi) {
      double m = 0.0;
      for (int r = std::max(lo, 0); r <= hi && r < span; ++r) m = std::max(m, shell_max[r]);
      return m;
    };
    ++c.checked;
    const double fx = f.values[i];
    if (!inS.count(x)) {
      const double ref = shell == ReferenceShell::Ball ? range_max(1, 2 * ell + 1) : range_max(2 * ell + 1, 2 * ell + 1);
      if (!slack(fx, Q * ref)) {
        c.holds = false;
        c.counterexample = x;
        c.failed_condition = "(i)";
      }
    } else {
      bool ok = false;
      const int rho_max = static_cast<int>(std::floor(A * ell + 1e-9));
      for (int rho = ell; rho <= rho_max && !ok; ++rho) ok = slack(fx, Q * range_max(rho, rho + 2 * ell + 1));
      if (!ok) {
        c.holds = false;
        c.counterexample = x;
        c.failed_condition = "(ii)";
      }
    }
  }

  std::ostringstream log;
  log << "checked " << c.checked << " points, |S| = " << S.size() << ", W = " << c.W;
  c.log.push_back(log.str());
  if (!c.holds) {
    std::ostringstream fail;
    fail << "condition " << c.failed_condition << " fails at (";
    for (std::size_t i = 0; i < c.counterexample->size(); ++i) fail << (i ? "," : "") << (*c.counterexample)[i];
    fail << ")";
    c.log.push_back(fail.str());
  }

  c.max_f = *std::max_element(f.values.begin(), f.values.end());
  c.f_center = f.at(box.center);
  if (box.radius > c.W + 3 * ell) {
    c.descent_checked = true;
    c.descent_bound = radial_descent_bound(Q, box.radius, c.W, ell, c.max_f);
    c.descent_holds = slack(c.f_center, c.descent_bound);
    if (c.holds && !c.descent_holds) c.log.push_back("radial descent bound violated");
  }
  return c;
}

bool SingularityField::is_singular(const Point& c) const {
  auto it = singular.find(c);
  return it != singular.end() && it->second;
}

std::vector<Point> SingularityField::singular_centers() const {
  std::vector<Point> out;
  for (const auto& [c, s] : singular)
    if (s) out.push_back(c);
  return out;
}

std::vector<Point> sub_box_centers(const MPBox& ambient, int ell, int stride) {
  if (ell < 1 || stride < 1) throw std::invalid_argument("sub-box centers need ell >= 1 and stride >= 1");
  std::vector<Point> out;
  if (ell > ambient.radius) return out;
  const int D = ambient.n * ambient.d;
  const int reach = (ambient.radius - ell) / stride;
  std::vector<int> t(D, -reach);
  while (true) {
    Point c = ambient.center;
    for (int i = 0; i < D; ++i) c[i] += t[i] * stride;
    out.push_back(std::move(c));
    int i = D - 1;
    for (; i >= 0; --i) {
      if (t[i] < reach) {
        ++t[i];
        break;
      }
      t[i] = -reach;
    }
    if (i < 0) break;
  }
  return out;
}

SubBoxOracle instance_oracle(Instance& inst, double m) {
  return [&inst, m](const MPBox& b, double E) {
    try {
      return !classify_singularity(inst.spectrum(b), E, m, inst.model().N, ResonancePolicy::Classify).ns;
    } catch (const ResonantEnergy&) {
      return true;
    }
  };
}

SingularityField injected_field(const MPBox& ambient, int ell, const std::function<bool(const Point&)>& singular,
                                int stride) {
  SingularityField f{ambient, ell, {}};
  for (auto& c : sub_box_centers(ambient, ell, stride)) {
    const bool s = singular(c);
    f.singular.emplace(std::move(c), s);
  }
  return f;
}

SingularityField singularity_field(Instance& inst, const MPBox& ambient, int ell, double E, double m, int stride) {
  auto oracle = instance_oracle(inst, m);
  return injected_field(
      ambient, ell, [&](const Point& c) { return oracle(MPBox{c, ell, ambient.n, ambient.d}, E); }, stride);
}

std::vector<SChain> find_s_chains(const SingularityField& field) {
  const auto S = field.singular_centers();
  const int ell = field.ell;
  std::set<Point> visited;
  std::vector<SChain> chains;
  for (const auto& v1 : S) {
    if (visited.count(v1)) continue;
    SChain chain{{v1}};
    std::set<Point> members{v1};
    int r = ell;
    while (true) {
      const Point* next = nullptr;
      for (const auto& w : S)
        if (!members.count(w) && max_norm(w, v1) == r + ell + 1) {
          next = &w;
          break;
        }
      if (!next) break;
      chain.centers.push_back(*next);
      members.insert(*next);
      r += ell;
    }
    visited.insert(members.begin(), members.end());
    chains.push_back(std::move(chain));
  }
  return chains;
}

std::size_t max_chain_length(const std::vector<SChain>& chains) {
  std::size_t s = 0;
  for (const auto& c : chains) s = std::max(s, c.length());
  return s;
}

EnvelopingBox enveloping_box(const SChain& chain, const SingularityField& field) {
  if (chain.centers.empty()) throw std::invalid_argument("enveloping box needs a nonempty chain");
  const Point& v1 = chain.centers.front();
  const int ell = field.ell;
  int extent = 0;
  for (const auto& v : chain.centers) extent = std::max(extent, max_norm(v, v1));
  const MPBox& amb = field.ambient;
  EnvelopingBox e;
  e.box = MPBox{v1, extent + ell, amb.n, amb.d};
  e.within_margin = contains_box(amb, MPBox{v1, e.box.radius + 2 * ell + 1, amb.n, amb.d});
  for (const auto& [w, s] : field.singular)
    if (s && max_norm(w, v1) == e.box.radius + ell + 1) e.adjacent_singular.push_back(w);
  e.boundary_ns = e.adjacent_singular.empty();
  return e;
}

BadBoxEvidence detect_bad_box(const Point& v, const SingularityField& field, int n, int width) {
  const int ell = field.ell;
  const int B = width > 0 ? width : 2 * n * ell + 1;
  const auto count = kappa(n) + 1;
  BadBoxEvidence ev;
  bool all = field.is_singular(v);
  const auto S = field.singular_centers();
  for (std::uint64_t j = 1; j <= count; ++j) {
    Annulus a{v, ell + static_cast<int>(2 * j - 1) * B, ell + static_cast<int>(2 * j) * B};
    std::optional<Point> w;
    for (const auto& c : S)
      if (a.contains_box(MPBox{c, ell, field.ambient.n, field.ambient.d})) {
        w = c;
        break;
      }
    if (!w) all = false;
    ev.annuli.push_back(std::move(a));
    ev.witnesses.push_back(std::move(w));
  }
  ev.bad = all;
  return ev;
}

namespace {

// f(x) = max_{y in ∂⁻B} D(x, y; E) over the lattice box.
BoxFunction boundary_green_profile(const SpectralData<double>& S, double E) {
  const MPBox& box = *S.box;
  const auto boundary = inner_boundary(box);
  const auto points = lattice_points(box);
  Resolvent G(S, E);
  bool unit_cells = true;
  for (const auto& m : G.cells().members) unit_cells = unit_cells && m.size() == 1;
  BoxFunction f{box, std::vector<double>(points.size(), 0.0)};
  if (unit_cells) {
    const Eigen::MatrixXd blk = G.block(points, boundary).cwiseAbs();
    for (std::size_t i = 0; i < points.size(); ++i) f.values[i] = blk.row(static_cast<Eigen::Index>(i)).maxCoeff();
    return f;
  }
  for (std::size_t i = 0; i < points.size(); ++i)
    for (const auto& y : boundary) f.values[i] = std::max(f.values[i], G.block(points[i], y));
  return f;
}

}  // namespace

GreenSubharmonic build_green_subharmonic(Instance& inst, const MPBox& box, double E, double m, int ell,
                                         const Calibration& cal, const CNRPolicy& policy, double A,
                                         ReferenceShell shell) {
  if (ell < 1 || ell >= box.radius) throw std::invalid_argument("subharmonic construction needs 1 <= ell < L");
  const auto& S = inst.spectrum(box);
  require_off_spectrum(S.values, E);
  GreenSubharmonic out;
  const auto cnr = classify_cnr(inst, box, E, policy);
  if (!cnr.cnr) {
    out.failed_hypothesis = "box is not E-CNR: resonant " + to_string(*cnr.resonant);
    return out;
  }
  const auto field = singularity_field(inst, box, ell, E, m);
  out.S = field.singular_centers();
  for (const auto& v : out.S)
    if (detect_bad_box(v, field, box.n).bad) {
      out.failed_hypothesis = "contains an (E,m)-bad box";
      return out;
    }
  out.hypotheses = true;
  out.f = boundary_green_profile(S, E);
  out.Q = subharmonic_q(cal, m, ell, box.n, box.d, inst.model().N);
  out.certificate = verify_subharmonic(out.f, out.Q, A, ell, out.S, shell);
  return out;
}

NsLemmaCheck check_ns_lemma(Instance& inst, const MPBox& box, double E, double m, int ell, const Calibration& cal,
                            const CNRPolicy& policy, double K) {
  NsLemmaCheck r;
  if (box.radius < cal.L_star) {
    r.reason = "L below calibrated L*";
    return r;
  }
  if (!classify_cnr(inst, box, E, policy).cnr) {
    r.reason = "box is not E-CNR";
    return r;
  }
  const auto field = singularity_field(inst, box, ell, E, m);
  for (const auto& a : covering_annuli(box, field.singular_centers())) r.W += a.width();
  if (r.W > K * std::pow(static_cast<double>(box.radius), 1.0 / kAlpha)) {
    r.reason = "singular boxes not covered by thin annuli";
    return r;
  }
  r.applicable = true;
  r.ns = classify_singularity(inst.spectrum(box), E, m, inst.model().N).ns;
  return r;
}

TunnelingResult classify_tunneling(const MPBox& factor, int Lk, const std::vector<double>& energies, double R, int N,
                                   const SubBoxOracle& singular, int stride) {
  TunnelingResult t;
  const auto centers = sub_box_centers(factor, Lk, stride);
  for (double E : energies) {
    std::vector<MPBox> S;
    for (const auto& c : centers) {
      MPBox b{c, Lk, factor.n, factor.d};
      if (singular(b, E)) S.push_back(std::move(b));
    }
    for (std::size_t i = 0; i < S.size(); ++i)
      for (std::size_t j = i + 1; j < S.size(); ++j)
        if (is_separable_pair(S[i], S[j], R, N).separable) {
          t.tunneling = true;
          t.energy = E;
          t.pair = std::make_pair(S[i].center, S[j].center);
          return t;
        }
  }
  return t;
}

TunnelingResult classify_partial_tunneling(const MPBox& box, int Lk, const std::vector<double>& energies, double R,
                                           int N, const SubBoxOracle& singular, int stride) {
  if (box.n < 2) throw std::invalid_argument("partial tunnelling needs n >= 2");
  const unsigned full = (1u << box.n) - 1;
  for (unsigned mask = 1; mask < full; mask += 2) {
    std::vector<int> J, Jc;
    for (int j = 0; j < box.n; ++j) (mask >> j & 1u ? J : Jc).push_back(j);
    for (const auto* part : {&J, &Jc}) {
      auto t = classify_tunneling(sub_box(box, *part), Lk, energies, R, N, singular, stride);
      if (t.tunneling) {
        t.factor = *part;
        return t;
      }
    }
  }
  return {};
}

SeparableCounts count_singular_separable(const MPBox& box, int ell, double E, double r0, double R, int N,
                                         const SubBoxOracle& singular, int stride) {
  SeparableCounts out;
  std::vector<MPBox> S;
  for (const auto& c : sub_box_centers(box, ell, stride)) {
    ++out.candidates;
    MPBox b{c, ell, box.n, box.d};
    if (singular(b, E)) S.push_back(std::move(b));
  }
  out.singular = S.size();
  auto separable_from_all = [&](const MPBox& b, const std::vector<MPBox>& chosen) {
    for (const auto& c : chosen)
      if (!is_separable_pair(c, b, R, N).separable) return false;
    return true;
  };
  auto greedy = [&](std::vector<MPBox> chosen, const std::function<bool(const MPBox&)>& keep) {
    for (const auto& b : S) {
      if (!keep(b) || std::find(chosen.begin(), chosen.end(), b) != chosen.end()) continue;
      if (separable_from_all(b, chosen)) chosen.push_back(b);
    }
    return chosen;
  };
  const auto all = greedy({}, [](const MPBox&) { return true; });
  auto is_fi = [&](const MPBox& b) { return classify_interaction(b, r0, N).tag == InteractionTag::FI; };
  std::vector<MPBox> seed_pi, seed_fi;
  for (const auto& b : all) (is_fi(b) ? seed_fi : seed_pi).push_back(b);
  out.nu_S = static_cast<int>(all.size());
  out.nu_PI = static_cast<int>(greedy(seed_pi, [&](const MPBox& b) { return !is_fi(b); }).size());
  out.nu_FI = static_cast<int>(greedy(seed_fi, is_fi).size());
  return out;
}

std::vector<Point> fi_candidate_centers(const MPBox& box, int ell, double r0, int N, int stride) {
  std::vector<Point> out;
  for (auto& c : sub_box_centers(box, ell, stride)) {
    if (static_cast<double>(distance_to_diagonal(c, box.n, box.d, r0, N)) > ell + r0) continue;
    if (classify_interaction(MPBox{c, ell, box.n, box.d}, r0, N).tag == InteractionTag::FI) out.push_back(std::move(c));
  }
  return out;
}

std::vector<double> EnergyGrid::points() const {
  std::vector<double> out;
  if (!(spacing > 0.0)) throw std::invalid_argument("energy grid needs a positive spacing");
  const double top = E0 + eta + 1e-12 * std::max(1.0, std::abs(eta));
  for (std::size_t i = 0;; ++i) {
    const double E = E0 + static_cast<double>(i) * spacing;
    if (E > top) break;
    out.push_back(E);
  }
  return out;
}

EnergyGrid make_energy_grid(double E0, double eta, int n_points, double spacing) {
  if (!(eta >= 0.0)) throw std::invalid_argument("eta must be nonnegative");
  if (spacing <= 0.0) {
    if (n_points < 2) throw std::invalid_argument("energy grid needs >= 2 points");
    spacing = eta > 0.0 ? eta / (n_points - 1) : 1.0;
  }
  return EnergyGrid{E0, eta, spacing};
}

std::vector<double> probe_energies(const EnergyGrid& grid, const std::vector<const SpectralData<double>*>& spectra) {
  auto out = grid.points();
  const double lo = grid.E0, hi = grid.E0 + grid.eta;
  for (const auto* S : spectra) {
    const double t = resonance_threshold(S->box.value().radius) * (1.0 + 1e-9);
    for (Eigen::Index i = 0; i < S->values.size(); ++i)
      for (double E : {S->values(i) - t, S->values(i) + t})
        if (E >= lo && E <= hi) out.push_back(E);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string to_string(Property p) {
  switch (p) {
    case Property::DS: return "DS";
    case Property::W1: return "W1";
    case Property::W2: return "W2";
    case Property::PT: return "PT";
  }
  return "?";
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& f) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (threads == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < count;) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

namespace {

std::mt19937_64 geometry_rng(std::uint64_t seed) {
  return std::mt19937_64(site_key(seed ^ 0x47656f6d65747279ULL, Point{0x5eed}));
}

Point random_point(std::mt19937_64& rng, int D, int half) {
  std::uniform_int_distribution<int> u(-half, half);
  Point p(D);
  for (auto& c : p) c = u(rng);
  return p;
}

// PI box of radius L whose cross interaction vanishes on a split.
MPBox sample_pi_box(int n, int d, int L, double r0, int N, std::uint64_t seed) {
  auto rng = geometry_rng(seed ^ 0x5049ULL);
  const int half = 2 * n * L + static_cast<int>(std::ceil(r0)) + 2;
  while (true) {
    MPBox b{random_point(rng, n * d, half), L, n, d};
    const auto cls = classify_interaction(b, r0, N);
    if (cls.tag == InteractionTag::PI && !cls.partition.empty()) return b;
  }
}

// Union of intervals (λ - t, λ + t) ∩ I over the box and its CNR family.
std::vector<std::pair<double, double>> resonant_set(Instance& inst, const MPBox& box, const CNRPolicy& policy,
                                                    double lo, double hi) {
  std::vector<std::pair<double, double>> out;
  auto add = [&](const MPBox& b) {
    const auto& S = inst.spectrum(b);
    const double t = resonance_threshold(b.radius);
    for (Eigen::Index i = 0; i < S.values.size(); ++i) {
      const double a = S.values(i) - t, z = S.values(i) + t;
      if (a < hi && z > lo) out.emplace_back(std::max(a, lo), std::min(z, hi));
    }
  };
  add(box);
  for (const auto& b : cnr_family(box, policy)) add(b);
  std::sort(out.begin(), out.end());
  return out;
}

bool intervals_intersect(const std::vector<std::pair<double, double>>& a,
                         const std::vector<std::pair<double, double>>& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (std::max(a[i].first, b[j].first) < std::min(a[i].second, b[j].second)) return true;
    if (a[i].second < b[j].second)
      ++i;
    else
      ++j;
  }
  return false;
}

}  // namespace

std::pair<MPBox, MPBox> sample_separable_pair(int n, int d, int L, double R, int N, std::uint64_t seed) {
  auto rng = geometry_rng(seed);
  const int D = n * d;
  MPBox a{random_point(rng, D, L), L, n, d};
  const double sep = 2.0 * N * (L + R);
  const int half = static_cast<int>(std::ceil(2.0 * sep)) + 2 * L + 2;
  while (true) {
    Point c = random_point(rng, D, half);
    for (int i = 0; i < D; ++i) c[i] += a.center[i];
    MPBox b{std::move(c), L, n, d};
    if (box_distance(a, b) <= sep) continue;
    if (n >= 2) {
      bool covered = false;
      for (const auto& cb : non_separable_cover(a.center, n, d, L, R))
        if (contains(MPBox{cb.center, cb.radius + 1, n, d}, b.center)) {
          covered = true;
          break;
        }
      if (covered) continue;
    }
    if (is_separable_pair(a, b, R, N).separable) return {a, b};
  }
}

double ground_energy_for(const Model& model, int n, int L) {
  MPBox box{Point(static_cast<std::size_t>(n * model.d), 0), L, n, model.d};
  return ground_energy_reference(model.interaction, box, model.h, model.N).value;
}

namespace {

double property_target(Property prop, const MSAParams& params, int n, int d, const std::vector<int>& scales, int k) {
  const double Lk = scales[k];
  switch (prop) {
    case Property::DS: return std::pow(Lk, -2.0 * params.p);
    case Property::W1:
    case Property::W2: return std::pow(Lk, -params.q);
    case Property::PT: {
      const double side = 2.0 * scales[k + 1] - 1.0;
      const double count = std::pow(side, n * d);
      return 0.5 * count * count * std::pow(Lk, -2.0 * params.p);
    }
  }
  return 0.0;
}

}  // namespace

PropertyRow estimate_property(Property prop, const Model& model, int n, int k, const std::vector<int>& scales,
                              const MSAParams& params, std::size_t trials, std::uint64_t seed0, int threads) {
  if (trials == 0) throw std::invalid_argument("estimate needs trials >= 1");
  if (n < 1 || n > model.N) throw std::invalid_argument("particle number outside 1..N");
  if (k < 0 || static_cast<std::size_t>(k) >= scales.size()) throw std::invalid_argument("scale index out of range");
  if (prop == Property::PT && (n < 2 || static_cast<std::size_t>(k + 1) >= scales.size()))
    throw std::invalid_argument("PT needs n >= 2 and scale k+1");
  if (n * model.d > params.max_nd) throw std::length_error("cap n*d <= " + std::to_string(params.max_nd) + " exceeded");
  const int L = scales[k];
  const int Lbox = prop == Property::PT ? scales[k + 1] : L;
  const MPBox probe{Point(static_cast<std::size_t>(n * model.d), 0), Lbox, n, model.d};
  if (box_grid(probe, model.h).size() > params.dense_limit)
    throw std::length_error("scale L=" + std::to_string(Lbox) + " exceeds the dense cap " +
                            std::to_string(params.dense_limit));

  PropertyRow row;
  row.property = prop;
  row.n = n;
  row.k = k;
  row.L = L;
  row.trials = trials;
  row.seed_lo = seed0;
  row.seed_hi = seed0 + trials - 1;
  row.E0 = params.E0 ? *params.E0 : ground_energy_for(model, n, Lbox);
  row.eta = params.eta;
  const auto grid = make_energy_grid(row.E0, params.eta, params.energy_points, params.spacing);
  row.spacing = grid.spacing;
  row.grid_points = static_cast<int>(grid.points().size());
  row.target = property_target(prop, params, n, model.d, scales, k);
  const double R = 2.0 * model.alloy.bump.half_width;
  const double lo = grid.E0, hi = grid.E0 + grid.eta;

  row.outcomes.assign(trials, 0);
  parallel_for(trials, threads, [&](std::size_t t) {
    const std::uint64_t seed = seed0 + t;
    Instance inst(model, seed);
    bool bad = false;
    switch (prop) {
      case Property::DS: {
        const auto [a, b] = sample_separable_pair(n, model.d, L, R, model.N, seed);
        const auto& Sa = inst.spectrum(a);
        const auto& Sb = inst.spectrum(b);
        auto oracle = instance_oracle(inst, params.m);
        for (double E : probe_energies(grid, {&Sa, &Sb}))
          if (oracle(a, E) && oracle(b, E)) {
            bad = true;
            break;
          }
        break;
      }
      case Property::W1: {
        const auto box = sample_separable_pair(n, model.d, L, R, model.N, seed).first;
        const double E = grid.E0 + params.w1_energy * grid.eta;
        bad = !classify_cnr(inst, box, E, params.policy).cnr;
        break;
      }
      case Property::W2: {
        const auto [a, b] = sample_separable_pair(n, model.d, L, R, model.N, seed);
        bad = intervals_intersect(resonant_set(inst, a, params.policy, lo, hi),
                                  resonant_set(inst, b, params.policy, lo, hi));
        break;
      }
      case Property::PT: {
        const MPBox box = sample_pi_box(n, model.d, scales[k + 1], model.interaction.r0(), model.N, seed);
        std::vector<const SpectralData<double>*> factors;
        std::vector<MPBox> parts;
        for (int j = 0; j < n; ++j) parts.push_back(sub_box(box, {j}));
        for (const auto& p : parts) factors.push_back(&inst.spectrum(p));
        const auto energies = probe_energies(grid, factors);
        bad = classify_partial_tunneling(box, L, energies, R, model.N, instance_oracle(inst, params.m), params.stride)
                  .tunneling;
        break;
      }
    }
    row.outcomes[t] = bad ? 1 : 0;
  });

  for (char o : row.outcomes) row.events += static_cast<std::size_t>(o);
  row.frequency = static_cast<double>(row.events) / static_cast<double>(trials);
  row.ci = wilson_interval(row.events, trials);
  row.point_pass = row.frequency <= row.target;
  row.verdict = row.ci.hi <= row.target ? "pass" : row.ci.lo > row.target ? "fail" : "inconclusive";
  return row;
}

MSAReport induction_report(const Model& model, const std::vector<int>& scales, const MSAParams& params,
                           std::size_t trials, std::uint64_t seed0, int threads, bool include_wegner) {
  MSAReport rep;
  if (scales.empty()) return rep;
  rep.notes.push_back("empirical instantiation at desk scale; the full induction over all k and N is out of reach");
  auto fits = [&](int n, int L) {
    if (n * model.d > params.max_nd) return false;
    const MPBox probe{Point(static_cast<std::size_t>(n * model.d), 0), L, n, model.d};
    return box_grid(probe, model.h).size() <= params.dense_limit;
  };
  std::map<std::pair<int, int>, const PropertyRow*> ds;
  std::vector<std::pair<int, int>> ds_keys;
  for (int k = 0; k < static_cast<int>(scales.size()); ++k)
    for (int n = 1; n <= model.N; ++n) {
      if (!fits(n, scales[k])) {
        rep.notes.push_back("n=" + std::to_string(n) + ", k=" + std::to_string(k) + " skipped: over desk cap");
        continue;
      }
      MSAParams p = params;
      if (!p.E0) p.E0 = ground_energy_for(model, n, scales[k]);
      rep.rows.push_back(estimate_property(Property::DS, model, n, k, scales, p, trials, seed0, threads));
      ds_keys.emplace_back(n, k);
      if (include_wegner) {
        rep.rows.push_back(estimate_property(Property::W1, model, n, k, scales, p, trials, seed0, threads));
        rep.rows.push_back(estimate_property(Property::W2, model, n, k, scales, p, trials, seed0, threads));
        if (n >= 2 && k + 1 < static_cast<int>(scales.size()) && fits(n, scales[k + 1]))
          rep.rows.push_back(estimate_property(Property::PT, model, n, k, scales, p, trials, seed0, threads));
      }
    }
  for (const auto& r : rep.rows)
    if (r.property == Property::DS) ds[{r.n, r.k}] = &r;
  for (const auto& [n, k] : ds_keys) {
    auto next = ds.find({n, k + 1});
    if (next == ds.end()) continue;
    const auto& a = *ds[{n, k}];
    const auto& b = *next->second;
    StepVerdict s;
    s.n = n;
    s.k = k;
    s.freq_k = a.frequency;
    s.freq_k1 = b.frequency;
    s.pass_k = a.point_pass;
    s.pass_k1 = b.point_pass;
    s.holds = !s.pass_k || s.pass_k1;
    rep.steps.push_back(s);
  }
  return rep;
}

}  // namespace mpmsa
