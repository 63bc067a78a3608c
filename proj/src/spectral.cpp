#include "mpmsa/spectral.hpp"

#include <set>

#include "mpmsa/stats.hpp"

namespace mpmsa {

double gamma_exponent(double m, int L, int n, int N) {
  if (!(m > 0.0) || L < 1 || n < 1 || n > N) throw std::invalid_argument("gamma needs m > 0, L >= 1, 1 <= n <= N");
  return m * L * std::pow(1.0 + std::pow(static_cast<double>(L), -0.25), N - n + 1);
}

double resonance_threshold(int L) { return std::exp(-std::pow(static_cast<double>(L), kBeta)); }

Resolvent::Resolvent(const SpectralData<double>& S, double E)
    : Resolvent(S, E, S.cells ? S.cells : std::make_shared<const CellMap>(build_cells(S.grid))) {}

Resolvent::Resolvent(const SpectralData<double>& S, double E, std::shared_ptr<const CellMap> cells)
    : S_(&S), E_(E), cells_(std::move(cells)) {
  if (!S.complete) throw std::logic_error("resolvent needs the full spectrum");
  require_off_spectrum(S.values, E);
  weights_ = (S.values.array() - E).inverse();
}

std::vector<std::size_t> Resolvent::indices(const std::vector<Point>& cells) const {
  std::vector<std::size_t> out;
  for (const auto& c : cells) {
    const auto& m = cells_->at(c);
    out.insert(out.end(), m.begin(), m.end());
  }
  return out;
}

double Resolvent::block(const Point& v, const Point& w) const {
  const auto& rv = cells_->at(v);
  const auto& cw = cells_->at(w);
  const auto& V = S_->vectors;
  if (rv.size() == 1 && cw.size() == 1) {
    const auto a = static_cast<Eigen::Index>(rv[0]), b = static_cast<Eigen::Index>(cw[0]);
    return std::abs((V.row(a).array() * weights_.transpose().array() * V.row(b).array()).sum());
  }
  return spectral_norm(block(std::vector<Point>{v}, std::vector<Point>{w}));
}

Eigen::MatrixXd Resolvent::block(const std::vector<Point>& rows, const std::vector<Point>& cols) const {
  const auto ri = indices(rows), ci = indices(cols);
  const auto& V = S_->vectors;
  Eigen::MatrixXd left(static_cast<Eigen::Index>(ri.size()), V.cols());
  Eigen::MatrixXd right(static_cast<Eigen::Index>(ci.size()), V.cols());
  for (std::size_t i = 0; i < ri.size(); ++i)
    left.row(static_cast<Eigen::Index>(i)) = V.row(static_cast<Eigen::Index>(ri[i])).cwiseProduct(weights_.transpose());
  for (std::size_t i = 0; i < ci.size(); ++i) right.row(static_cast<Eigen::Index>(i)) = V.row(static_cast<Eigen::Index>(ci[i]));
  return left * right.transpose();
}

double GreenBlockTable::at(const Point& v, const Point& w) const {
  auto find = [&](const Point& p) {
    for (std::size_t i = 0; i < points.size(); ++i)
      if (points[i] == p) return static_cast<Eigen::Index>(i);
    throw std::out_of_range("point outside the table");
  };
  return D(find(v), find(w));
}

GreenBlockTable green_block_table(const SpectralData<double>& S, double E) {
  if (!S.box) throw std::invalid_argument("green table needs a box spectrum");
  if (!S.complete) throw std::logic_error("green table needs the full spectrum");
  require_off_spectrum(S.values, E);
  const CellMap cells = build_cells(S.grid);
  const Eigen::VectorXd w = (S.values.array() - E).inverse();
  const Eigen::MatrixXd G = S.vectors * w.asDiagonal() * S.vectors.transpose();
  GreenBlockTable t{*S.box, E, cells.cells, Eigen::MatrixXd(cells.cells.size(), cells.cells.size())};
  for (std::size_t a = 0; a < cells.cells.size(); ++a)
    for (std::size_t b = 0; b <= a; ++b) {
      const auto& ra = cells.members[a];
      const auto& rb = cells.members[b];
      Eigen::MatrixXd blk(ra.size(), rb.size());
      for (std::size_t i = 0; i < ra.size(); ++i)
        for (std::size_t j = 0; j < rb.size(); ++j)
          blk(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
              G(static_cast<Eigen::Index>(ra[i]), static_cast<Eigen::Index>(rb[j]));
      const double v = spectral_norm(blk);
      t.D(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
      t.D(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = v;
    }
  return t;
}

Resonance classify_resonance(const SpectralData<double>& S, double E, int L) {
  return distance_to_spectrum(S.values, E) >= resonance_threshold(L) ? Resonance::NR : Resonance::R;
}

std::string to_string(CNRPolicy::Kind k) {
  return k == CNRPolicy::Kind::Concentric ? "concentric" : "concentric+strided";
}

CNRPolicy::Kind cnr_policy_from_string(const std::string& s) {
  if (s == "concentric") return CNRPolicy::Kind::Concentric;
  if (s == "concentric+strided") return CNRPolicy::Kind::ConcentricStrided;
  throw std::invalid_argument("unknown CNR policy '" + s + "'");
}

std::vector<MPBox> cnr_family(const MPBox& box, const CNRPolicy& policy) {
  const int L = box.radius;
  const int lmin = static_cast<int>(std::ceil(std::pow(static_cast<double>(L), 1.0 / kAlpha) - 1e-9));
  std::set<MPBox> seen;
  std::vector<MPBox> out;
  auto add = [&](const MPBox& b) {
    if (seen.insert(b).second) out.push_back(b);
  };
  for (int l = lmin; l < L; ++l) add(MPBox{box.center, l, box.n, box.d});
  if (policy.kind == CNRPolicy::Kind::ConcentricStrided) {
    const int stride = (L + 7) / 8;
    const int D = box.n * box.d;
    for (double r = lmin; static_cast<int>(std::ceil(r - 1e-9)) < L; r *= 1.5) {
      const int l = static_cast<int>(std::ceil(r - 1e-9));
      const int reach = (L - l) / stride;
      std::vector<int> t(D, -reach);
      while (true) {
        Point c = box.center;
        for (int i = 0; i < D; ++i) c[i] += t[i] * stride;
        add(MPBox{c, l, box.n, box.d});
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
    }
  }
  return out;
}

Instance::Instance(Model model, std::uint64_t seed) : model_(std::move(model)), seed_(seed) {}

DisorderSample Instance::disorder_for(const MPBox& box) const {
  return sample_disorder(model_.alloy, disorder_region(box, model_.h, model_.alloy.bump), seed_);
}

GridHamiltonian<double> Instance::hamiltonian(const MPBox& box) const {
  const auto dis = disorder_for(box);
  auto H = assemble<double>(box, model_.h, model_.interaction, model_.alloy, &dis, model_.N);
  return H;
}

const SpectralData<double>& Instance::spectrum(const MPBox& box) {
  auto it = cache_.find(box);
  if (it != cache_.end()) return it->second;
  return cache_.emplace(box, eigensolve(hamiltonian(box))).first->second;
}

CNRResult classify_cnr(Instance& inst, const MPBox& box, double E, const CNRPolicy& policy) {
  CNRResult r;
  r.nr = classify_resonance(inst.spectrum(box), E, box.radius) == Resonance::NR;
  if (!r.nr) {
    r.resonant = box;
    return r;
  }
  for (const auto& sub : cnr_family(box, policy)) {
    r.examined.push_back(sub);
    if (classify_resonance(inst.spectrum(sub), E, sub.radius) == Resonance::R) {
      r.resonant = sub;
      return r;
    }
  }
  r.cnr = true;
  return r;
}

SingularityResult classify_singularity(const SpectralData<double>& S, double E, double m, int N,
                                       ResonancePolicy policy) {
  if (!S.box) throw std::invalid_argument("singularity needs a box spectrum");
  const MPBox& box = *S.box;
  require_off_spectrum(S.values, E);
  if (policy == ResonancePolicy::Refuse && classify_resonance(S, E, box.radius) == Resonance::R)
    throw ResonantEnergy("energy within e^{-L^beta} of the spectrum; classification refused");
  SingularityResult r;
  r.threshold = std::exp(-gamma_exponent(m, box.radius, box.n, N));
  Resolvent G(S, E);
  r.max_block = -1.0;
  for (const auto& y : outer_layer(box)) {
    const double v = G.block(box.center, y);
    if (v > r.max_block) {
      r.max_block = v;
      r.worst = y;
    }
  }
  r.ns = r.max_block <= r.threshold;
  return r;
}

BoxClassification classify_box(Instance& inst, const MPBox& box, double E, double m, const CNRPolicy& policy) {
  BoxClassification c;
  c.box = box;
  c.E = E;
  c.m = m;
  c.policy = policy;
  const auto& S = inst.spectrum(box);
  c.distance_to_spectrum = distance_to_spectrum(S.values, E);
  auto cnr = classify_cnr(inst, box, E, policy);
  c.nr = cnr.nr;
  c.cnr = cnr.cnr;
  c.family = cnr.examined;
  c.threshold = std::exp(-gamma_exponent(m, box.radius, box.n, inst.model().N));
  if (c.nr) {
    auto s = classify_singularity(S, E, m, inst.model().N);
    c.ns = s.ns;
    c.max_block = s.max_block;
  }
  return c;
}

DecayRate combes_thomas_check(const SpectralData<double>& S, double E, double delta, const Point& source) {
  if (!(delta > 0.0) || S.values(0) - E < delta * (1.0 - 1e-12))
    throw std::invalid_argument("energy is not below the spectrum by delta");
  Resolvent G(S, E);
  std::vector<double> r, y;
  for (const auto& w : G.cells().cells) {
    const int dist = max_norm(w, source);
    if (dist == 0) continue;
    const double v = G.block(source, w);
    if (v <= 0.0) continue;
    r.push_back(dist);
    y.push_back(std::log(v));
  }
  const auto fit = linear_fit(r, y);
  return DecayRate{-fit.slope, std::exp(fit.intercept), fit.r2, fit.points};
}

WeylCount weyl_cutoff(const Eigen::VectorXd& eigenvalues, double delta, double eta, int n_prime, int d,
                      std::size_t volume) {
  WeylCount w;
  const double cut = eta + delta;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i)
    if (eigenvalues(i) <= cut + 1e-12 * std::max(1.0, std::abs(cut))) ++w.count;
  w.bound = std::pow(delta, 0.5 * n_prime * d) * static_cast<double>(volume);
  w.holds = static_cast<double>(w.count) <= w.bound;
  return w;
}

double gri_ratio(const SpectralData<double>& small, const SpectralData<double>& big, double E,
                 const std::vector<Point>& A, const std::vector<Point>& B) {
  if (!small.box || !big.box) throw std::invalid_argument("GRI needs box spectra");
  const MPBox& sb = *small.box;
  if (!contains_box(*big.box, sb)) throw std::invalid_argument("GRI needs nested boxes");
  const MPBox core = interior(sb);
  for (const auto& a : A)
    if (!contains(core, a)) throw std::invalid_argument("GRI source set must lie in the interior box");
  for (const auto& b : B)
    if (max_norm(b, sb.center) < sb.radius || !contains(*big.box, b))
      throw std::invalid_argument("GRI target set must lie in the big box outside the small one");
  const auto out = outer_layer(sb);
  Resolvent Gb(big, E), Gs(small, E);
  const double num = spectral_norm(Gb.block(B, A));
  const double d1 = spectral_norm(Gb.block(B, out));
  const double d2 = spectral_norm(Gs.block(out, A));
  return num / (d1 * d2);
}

double dgri_ratio(const SpectralData<double>& big, const SpectralData<double>& small, double E, const Point& y) {
  if (!small.box || !big.box) throw std::invalid_argument("DGRI needs box spectra");
  const MPBox& L = *big.box;
  const MPBox& l = *small.box;
  if (L.radius < 4 || !contains_box(MPBox{L.center, L.radius - 3, L.n, L.d}, l))
    throw std::invalid_argument("DGRI needs the small box inside the (L-3)-box");
  Resolvent Gb(big, E), Gs(small, E);
  const double lhs = Gb.block(l.center, y);
  const auto out = outer_layer(l);
  std::vector<double> to_y(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) to_y[i] = Gb.block(out[i], y);
  double rhs = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    double reach = 0.0;
    for (std::size_t j = 0; j < out.size(); ++j)
      if (max_norm(out[i], out[j]) <= 1) reach = std::max(reach, to_y[j]);
    rhs += Gs.block(l.center, out[i]) * reach;
  }
  return lhs / rhs;
}

double shell_constant(int n, int d) {
  const int D = n * d;
  double best = 0.0;
  for (int l = 3; l <= 4096; ++l) {
    const double out = std::pow(2.0 * l - 1.0, D) - std::pow(2.0 * l - 5.0, D);
    best = std::max(best, out / std::pow(static_cast<double>(n * l), D - 1));
  }
  return best;
}

double subharmonic_constant(const Calibration& cal, int n, int d) { return cal.C0 * shell_constant(n, d); }

double subharmonic_q(const Calibration& cal, double m, int ell, int n, int d, int N) {
  return subharmonic_constant(cal, n, d) * std::pow(static_cast<double>(n * ell), n * d - 1) * std::exp(std::pow(ell, kBeta)) *
         std::exp(-gamma_exponent(m, ell, n, N));
}

}  // namespace mpmsa
