#include "mpmsa/randomfield.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mpmsa {

namespace {

constexpr double kTol = 1e-12;

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Distribution as_table(const Distribution& law) {
  if (law.kind == Distribution::Kind::Table) return law;
  if (law.g <= 0.0) return Distribution::point_mass(0.0);
  return Distribution::table({0.0, law.g}, {0.0, 1.0});
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

}  // namespace

Distribution Distribution::uniform(double g) {
  if (g < 0.0) throw std::invalid_argument("uniform amplitude bound g must be >= 0");
  Distribution d;
  d.kind = Kind::Uniform;
  d.g = g;
  return d;
}

Distribution Distribution::table(std::vector<double> x, std::vector<double> F) {
  if (x.size() < 2 || x.size() != F.size()) throw std::invalid_argument("CDF table needs >= 2 matching points");
  for (std::size_t i = 1; i < x.size(); ++i)
    if (x[i] < x[i - 1] || F[i] < F[i - 1]) throw std::invalid_argument("CDF table must be non-decreasing");
  if (F.front() != 0.0 || F.back() != 1.0) throw std::invalid_argument("CDF table must run from 0 to 1");
  if (x.front() < 0.0) throw std::invalid_argument("amplitudes must be nonnegative");
  Distribution d;
  d.kind = Kind::Table;
  d.x = std::move(x);
  d.F = std::move(F);
  return d;
}

Distribution Distribution::point_mass(double c) { return table({c, c}, {0.0, 1.0}); }

double Distribution::cdf(double y) const {
  if (kind == Kind::Uniform) {
    if (g <= 0.0) return y >= 0.0 ? 1.0 : 0.0;
    return std::clamp(y / g, 0.0, 1.0);
  }
  auto it = std::upper_bound(x.begin(), x.end(), y);
  if (it == x.begin()) return 0.0;
  std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
  if (i + 1 == x.size()) return 1.0;
  return F[i] + (F[i + 1] - F[i]) * (y - x[i]) / (x[i + 1] - x[i]);
}

double Distribution::cdf_left(double y) const {
  if (kind == Kind::Uniform) {
    if (g <= 0.0) return y > 0.0 ? 1.0 : 0.0;
    return std::clamp(y / g, 0.0, 1.0);
  }
  auto it = std::lower_bound(x.begin(), x.end(), y);
  if (it == x.end()) return 1.0;
  std::size_t i = static_cast<std::size_t>(it - x.begin());
  if (i == 0) return 0.0;
  return F[i - 1] + (F[i] - F[i - 1]) * (y - x[i - 1]) / (x[i] - x[i - 1]);
}

double Distribution::quantile(double u) const {
  if (kind == Kind::Uniform) return u * g;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    if (F[i + 1] > u) {
      if (x[i + 1] == x[i]) return x[i];
      return x[i] + (u - F[i]) / (F[i + 1] - F[i]) * (x[i + 1] - x[i]);
    }
  }
  return x.back();
}

double Distribution::upper() const { return kind == Kind::Uniform ? g : x.back(); }

double Bump::operator()(std::span<const double> y) const {
  for (double v : y)
    if (std::abs(v) > half_width + kTol) return 0.0;
  return 1.0;
}

bool Region::empty() const {
  if (lo.empty() || lo.size() != hi.size()) return true;
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (hi[i] < lo[i]) return true;
  return false;
}

std::size_t Region::size() const {
  if (empty()) return 0;
  std::size_t c = 1;
  for (std::size_t i = 0; i < lo.size(); ++i) c *= static_cast<std::size_t>(hi[i] - lo[i] + 1);
  return c;
}

bool Region::contains(std::span<const int> s) const {
  if (s.size() != lo.size()) return false;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i] < lo[i] || s[i] > hi[i]) return false;
  return true;
}

Region bounding_region(std::span<const int> lo, std::span<const int> hi) {
  return Region{std::vector<int>(lo.begin(), lo.end()), std::vector<int>(hi.begin(), hi.end())};
}

std::uint64_t site_key(std::uint64_t seed, std::span<const int> s) {
  std::uint64_t h = splitmix64(seed);
  for (int c : s) h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(c)));
  return h;
}

double site_uniform(std::uint64_t seed, std::span<const int> s) {
  return static_cast<double>(site_key(seed, s) >> 11) * 0x1.0p-53;
}

namespace {

std::size_t region_index(const Region& r, std::span<const int> s) {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    idx = idx * static_cast<std::size_t>(r.hi[i] - r.lo[i] + 1) + static_cast<std::size_t>(s[i] - r.lo[i]);
  return idx;
}

}  // namespace

double DisorderSample::at(std::span<const int> s) const {
  if (!region.contains(s)) throw std::out_of_range("site outside the sampled region");
  return values[region_index(region, s)];
}

double& DisorderSample::at(std::span<const int> s) {
  if (!region.contains(s)) throw std::out_of_range("site outside the sampled region");
  return values[region_index(region, s)];
}

DisorderSample sample_disorder(const AlloySpec& spec, const Region& region, std::uint64_t seed) {
  if (region.empty()) throw std::invalid_argument("disorder region is empty");
  DisorderSample out{seed, region, {}};
  out.values.reserve(region.size());
  std::vector<int> s = region.lo;
  const std::size_t D = s.size();
  while (true) {
    out.values.push_back(spec.law.quantile(site_uniform(seed, s)));
    std::size_t i = D;
    while (i-- > 0) {
      if (s[i] < region.hi[i]) {
        ++s[i];
        break;
      }
      s[i] = region.lo[i];
    }
    if (i == static_cast<std::size_t>(-1)) break;
  }
  return out;
}

Region influence_region(std::span<const double> lo, std::span<const double> hi, const Bump& bump) {
  Region r;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    r.lo.push_back(static_cast<int>(std::ceil(lo[i] - bump.half_width - kTol)));
    r.hi.push_back(static_cast<int>(std::floor(hi[i] + bump.half_width + kTol)));
  }
  return r;
}

double external_potential(const DisorderSample& sample, const AlloySpec& spec, std::span<const double> x) {
  const int d = static_cast<int>(x.size());
  std::vector<int> lo(d), hi(d), s(d);
  for (int i = 0; i < d; ++i) {
    lo[i] = static_cast<int>(std::ceil(x[i] - spec.bump.half_width - kTol));
    hi[i] = static_cast<int>(std::floor(x[i] + spec.bump.half_width + kTol));
    if (hi[i] < lo[i]) return 0.0;
  }
  s = lo;
  double v = 0.0;
  std::vector<double> y(d);
  while (true) {
    if (!sample.covers(s)) throw std::out_of_range("potential needs unsampled disorder sites");
    for (int i = 0; i < d; ++i) y[i] = x[i] - s[i];
    v += sample.at(s) * spec.bump(y);
    int i = d - 1;
    for (; i >= 0; --i) {
      if (s[i] < hi[i]) {
        ++s[i];
        break;
      }
      s[i] = lo[i];
    }
    if (i < 0) break;
  }
  return v;
}

double multiparticle_potential(const DisorderSample& sample, const AlloySpec& spec, std::span<const double> x) {
  const std::size_t d = static_cast<std::size_t>(spec.d);
  if (x.size() % d != 0) throw std::invalid_argument("configuration size is not a multiple of d");
  double v = 0.0;
  for (std::size_t j = 0; j < x.size() / d; ++j) v += external_potential(sample, spec, x.subspan(j * d, d));
  return v;
}

InteractionSpec InteractionSpec::pairwise(double u0, double r0) {
  if (u0 < 0.0 || r0 <= 0.0) throw std::invalid_argument("interaction needs u0 >= 0 and r0 > 0");
  return InteractionSpec{{KBodyTerm{2, u0, r0}}};
}

double InteractionSpec::u0() const {
  double m = 0.0;
  for (const auto& t : terms) m = std::max(m, t.amplitude);
  return m;
}

double InteractionSpec::r0() const {
  double m = 0.0;
  for (const auto& t : terms) m = std::max(m, t.range);
  return m;
}

double InteractionSpec::upper_bound(int n) const {
  double s = 0.0;
  for (const auto& t : terms) s += binomial(n, t.k) * t.amplitude;
  return s;
}

namespace {

double particle_distance(std::span<const double> x, int a, int b, int d) {
  double m = 0.0;
  for (int i = 0; i < d; ++i) m = std::max(m, std::abs(x[a * d + i] - x[b * d + i]));
  return m;
}

bool cluster_connected(std::span<const double> x, const std::vector<int>& members, int d, double range) {
  for (int a : members) {
    bool near = false;
    for (int b : members)
      if (a != b && particle_distance(x, a, b, d) <= range) {
        near = true;
        break;
      }
    if (!near) return false;
  }
  return true;
}

}  // namespace

double interaction_energy(const InteractionSpec& spec, std::span<const double> x, int n, int d) {
  double total = 0.0;
  for (const auto& t : spec.terms) {
    if (t.k < 2 || t.k > n || t.amplitude == 0.0) continue;
    std::vector<int> idx(t.k);
    for (int i = 0; i < t.k; ++i) idx[i] = i;
    while (true) {
      if (cluster_connected(x, idx, d, t.range)) total += t.amplitude;
      int i = t.k - 1;
      while (i >= 0 && idx[i] == n - t.k + i) --i;
      if (i < 0) break;
      ++idx[i];
      for (int j = i + 1; j < t.k; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return total;
}

namespace {

double holder_sup(const Distribution& law, double eps) {
  std::vector<double> cand;
  for (double b : law.x) {
    cand.push_back(b);
    cand.push_back(b - eps);
  }
  double best = 0.0;
  for (double y : cand) {
    best = std::max(best, law.cdf(y + eps) - law.cdf(y));
    best = std::max(best, law.cdf_left(y + eps) - law.cdf_left(y));
  }
  return std::min(best, 1.0);
}

}  // namespace

HolderReport check_holder(const Distribution& law, const std::vector<double>& eps) {
  const Distribution t = as_table(law);
  HolderReport rep;
  for (double e : eps) {
    if (!(e > 0.0 && e < 1.0)) throw std::invalid_argument("Hölder grid needs eps in (0,1)");
    rep.eps.push_back(e);
    rep.nu.push_back(holder_sup(t, e));
  }
  std::vector<double> fe = rep.eps, fn = rep.nu;
  for (int i = 0; i < 24; ++i) {
    double e = std::pow(10.0, -6.0 + 5.7 * i / 23.0);
    fe.push_back(e);
    fn.push_back(holder_sup(t, e));
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (std::size_t i = 0; i < fe.size(); ++i) {
    if (fn[i] <= 0.0) continue;
    double lx = std::log(fe[i]), ly = std::log(fn[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++cnt;
  }
  if (cnt >= 2) rep.b = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  if (std::abs(rep.b) < 1e-9) rep.b = 0.0;
  for (std::size_t i = 0; i < fe.size(); ++i) rep.a = std::max(rep.a, fn[i] / std::pow(fe[i], rep.b));
  rep.satisfies = rep.b > 1e-6;
  return rep;
}

}  // namespace mpmsa
