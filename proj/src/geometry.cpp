#include "mpmsa/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mpmsa {

namespace {

int ipow(int base, int e) {
  int r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

std::span<const int> part(const Point& p, int j, int d) {
  return std::span<const int>(p).subspan(static_cast<std::size_t>(j) * d, static_cast<std::size_t>(d));
}

// Union-find over particle indices.
struct Dsu {
  std::vector<int> parent;
  explicit Dsu(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int i) { return parent[i] == i ? i : parent[i] = find(parent[i]); }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

std::vector<std::vector<int>> components(const Point& y, int n, int d, double threshold, bool strict) {
  Dsu dsu(n);
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) {
      double g = max_norm(part(y, j, d), part(y, k, d));
      if (strict ? g < threshold : g <= threshold) dsu.unite(j, k);
    }
  std::vector<std::vector<int>> out;
  std::vector<int> slot(n, -1);
  for (int j = 0; j < n; ++j) {
    int r = dsu.find(j);
    if (slot[r] < 0) {
      slot[r] = static_cast<int>(out.size());
      out.emplace_back();
    }
    out[slot[r]].push_back(j);
  }
  return out;
}

}  // namespace

MPBox make_box(Point center, int radius, int n, int d) {
  if (radius < 1) throw std::invalid_argument("box radius must be >= 1");
  if (n < 1 || d < 1) throw std::invalid_argument("box needs n >= 1 and d >= 1");
  if (center.size() != static_cast<std::size_t>(n * d))
    throw std::invalid_argument("box center must have n*d coordinates");
  return MPBox{std::move(center), radius, n, d};
}

std::size_t MPBox::lattice_count() const {
  std::size_t side = 2 * static_cast<std::size_t>(radius) - 1, c = 1;
  for (int i = 0; i < n * d; ++i) c *= side;
  return c;
}

Point MPBox::particle(int j) const {
  auto s = part(center, j, d);
  return Point(s.begin(), s.end());
}

int max_norm(std::span<const int> a, std::span<const int> b) {
  int m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

int max_norm(std::span<const int> a) {
  int m = 0;
  for (int v : a) m = std::max(m, std::abs(v));
  return m;
}

int box_distance(const MPBox& a, const MPBox& b) {
  if (a.center.size() != b.center.size()) throw std::invalid_argument("box dimension mismatch");
  int m = 0;
  for (std::size_t i = 0; i < a.center.size(); ++i)
    m = std::max(m, std::abs(a.center[i] - b.center[i]) - a.radius - b.radius);
  return std::max(m, 0);
}

MPBox projection(const MPBox& box, int j) {
  if (j < 0 || j >= box.n) throw std::out_of_range("particle index out of range");
  return MPBox{box.particle(j), box.radius, 1, box.d};
}

std::vector<MPBox> full_projection(const MPBox& box) {
  std::vector<MPBox> out;
  for (int j = 0; j < box.n; ++j) out.push_back(projection(box, j));
  return out;
}

bool contains(const MPBox& box, std::span<const int> x) {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (std::abs(x[i] - box.center[i]) > box.radius - 1) return false;
  return true;
}

bool contains_box(const MPBox& outer, const MPBox& inner) {
  return max_norm(outer.center, inner.center) + inner.radius <= outer.radius;
}

void for_each_lattice_point(const MPBox& box, const std::function<void(const Point&)>& f) {
  const int D = box.n * box.d, r = box.radius - 1;
  Point x(box.center);
  for (int i = 0; i < D; ++i) x[i] -= r;
  while (true) {
    f(x);
    int i = D - 1;
    for (; i >= 0; --i) {
      if (x[i] < box.center[i] + r) {
        ++x[i];
        break;
      }
      x[i] = box.center[i] - r;
    }
    if (i < 0) return;
  }
}

std::vector<Point> lattice_points(const MPBox& box) {
  std::vector<Point> out;
  out.reserve(box.lattice_count());
  for_each_lattice_point(box, [&](const Point& p) { out.push_back(p); });
  return out;
}

std::vector<Point> outer_layer(const MPBox& box) {
  std::vector<Point> out;
  for_each_lattice_point(box, [&](const Point& p) {
    if (max_norm(p, box.center) >= box.radius - 2) out.push_back(p);
  });
  return out;
}

std::vector<Point> inner_boundary(const MPBox& box) {
  std::vector<Point> out;
  for_each_lattice_point(box, [&](const Point& p) {
    if (max_norm(p, box.center) == box.radius - 1) out.push_back(p);
  });
  return out;
}

MPBox interior(const MPBox& box) {
  if (box.radius < 4) throw std::invalid_argument("interior box needs L >= 4");
  return MPBox{box.center, box.radius / 3, box.n, box.d};
}

bool Annulus::contains(std::span<const int> y) const {
  int r = max_norm(y, center);
  return r >= inner && r < outer;
}

bool Annulus::contains_box(const MPBox& b) const {
  int r = max_norm(b.center, center);
  return r + b.radius <= outer && r >= inner + b.radius;
}

std::uint64_t kappa(int n) {
  std::uint64_t k = 1;
  for (int i = 0; i < n; ++i) k *= static_cast<std::uint64_t>(n);
  return k;
}

std::vector<Annulus> annuli_family(const Point& center, int L, int n, double R, int width) {
  if (L < 1) throw std::invalid_argument("annuli need L >= 1");
  int B = width > 0 ? width : static_cast<int>(std::ceil(4.0 * n * (L + R) + 1.0 - 1e-9));
  std::vector<Annulus> out;
  const auto count = 2 * kappa(n) + 1;
  for (std::uint64_t j = 1; j <= count; ++j)
    out.push_back(Annulus{center, L + static_cast<int>(j - 1) * B, L + static_cast<int>(j) * B});
  return out;
}

bool is_j_separable(const MPBox& y, const MPBox& x, std::span<const int> J, double R) {
  std::vector<char> in(y.n, 0);
  for (int j : J) in[j] = 1;
  const double self = 2.0 * (y.radius + R), cross = y.radius + x.radius + 2.0 * R;
  for (int j : J) {
    auto yj = part(y.center, j, y.d);
    for (int k = 0; k < y.n; ++k)
      if (!in[k] && max_norm(yj, part(y.center, k, y.d)) < self) return false;
    for (int i = 0; i < x.n; ++i)
      if (max_norm(yj, part(x.center, i, x.d)) < cross) return false;
  }
  return true;
}

namespace {

// Union of the clumps of y lying far from every projection of x.
std::vector<int> free_clumps(const MPBox& y, const MPBox& x, double R) {
  std::vector<int> J;
  const double cross = y.radius + x.radius + 2.0 * R;
  for (const auto& clump : components(y.center, y.n, y.d, 2.0 * (y.radius + R), true)) {
    bool far = true;
    for (int j : clump)
      for (int i = 0; i < x.n && far; ++i)
        if (max_norm(part(y.center, j, y.d), part(x.center, i, x.d)) < cross) far = false;
    if (far) J.insert(J.end(), clump.begin(), clump.end());
  }
  std::sort(J.begin(), J.end());
  return J;
}

}  // namespace

SeparabilityVerdict is_separable_pair(const MPBox& a, const MPBox& b, double R, int N) {
  if (a.n != b.n || a.d != b.d || a.radius != b.radius)
    throw std::invalid_argument("separability needs boxes with equal n, d and L");
  SeparabilityVerdict v;
  if (box_distance(a, b) <= 2.0 * N * (a.radius + R)) return v;
  if (auto J = free_clumps(b, a, R); !J.empty()) {
    v.separable = true;
    v.witness = std::move(J);
    v.direction = Direction::SecondFromFirst;
  } else if (auto J2 = free_clumps(a, b, R); !J2.empty()) {
    v.separable = true;
    v.witness = std::move(J2);
    v.direction = Direction::FirstFromSecond;
  }
  return v;
}

std::vector<MPBox> non_separable_cover(const Point& x, int n, int d, int L, double R) {
  if (n < 2) throw std::invalid_argument("cover needs n >= 2");
  if (x.size() != static_cast<std::size_t>(n * d)) throw std::invalid_argument("center size mismatch");
  const int radius = static_cast<int>(std::ceil(2.0 * n * (L + R) - 1e-9));
  std::set<Point> centers;
  const int total = ipow(n, n);
  for (int code = 0; code < total; ++code) {
    Point c(n * d);
    int rest = code;
    for (int j = 0; j < n; ++j, rest /= n) {
      int src = rest % n;
      for (int i = 0; i < d; ++i) c[j * d + i] = x[src * d + i];
    }
    centers.insert(std::move(c));
  }
  std::vector<MPBox> out;
  for (const auto& c : centers) out.push_back(MPBox{c, radius, n, d});
  return out;
}

std::vector<std::vector<int>> clump_decomposition(const Point& y, int n, int d, int L, double R,
                                                  CubeClosure closure) {
  return components(y, n, d, 2.0 * (L + R), closure == CubeClosure::Open);
}

InteractionClass classify_interaction(const MPBox& box, double r0, int N) {
  InteractionClass out;
  if (box.n == 1) return out;
  const int n = box.n, d = box.d;
  const double limit = N * r0;
  bool fi = true;
  for (int i = 0; i < d && fi; ++i) {
    int lo = box.center[i], hi = box.center[i];
    for (int j = 1; j < n; ++j) {
      lo = std::min(lo, box.center[j * d + i]);
      hi = std::max(hi, box.center[j * d + i]);
    }
    if (std::max(0, hi - lo - 2 * (box.radius - 1)) > limit) fi = false;
  }
  if (fi) return out;
  out.tag = InteractionTag::PI;
  double best = -1.0;
  for (unsigned mask = 1; mask < (1u << n) - 1; mask += 2) {
    double gap = -1.0;
    for (int j = 0; j < n; ++j) {
      if (!(mask >> j & 1u)) continue;
      for (int k = 0; k < n; ++k) {
        if (mask >> k & 1u) continue;
        int g = max_norm(part(box.center, j, d), part(box.center, k, d)) - 2 * box.radius;
        double gj = std::max(0, g);
        gap = gap < 0 ? gj : std::min(gap, gj);
      }
    }
    if (gap > best) {
      best = gap;
      out.partition.clear();
      for (int j = 0; j < n; ++j)
        if (mask >> j & 1u) out.partition.push_back(j);
    }
  }
  out.min_cross_gap = best;
  if (best <= r0) out.partition.clear();
  return out;
}

int distance_to_diagonal(const Point& y, int n, int d, double r0, int N) {
  const int allowed = static_cast<int>(std::floor(N * r0 + 1e-12));
  int t = 0;
  for (int i = 0; i < d; ++i) {
    int lo = y[i], hi = y[i];
    for (int j = 1; j < n; ++j) {
      lo = std::min(lo, y[j * d + i]);
      hi = std::max(hi, y[j * d + i]);
    }
    int excess = hi - lo - allowed;
    if (excess > 0) t = std::max(t, (excess + 1) / 2);
  }
  return t;
}

bool fi_projection_disjointness(const MPBox& a, const MPBox& b, double R) {
  const double cross = a.radius + b.radius + 2.0 * R;
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < b.n; ++j)
      if (max_norm(part(a.center, i, a.d), part(b.center, j, b.d)) < cross) return false;
  return true;
}

std::string to_string(const MPBox& box) {
  std::ostringstream s;
  s << "box(L=" << box.radius << ", n=" << box.n << ", d=" << box.d << ", u=(";
  for (std::size_t i = 0; i < box.center.size(); ++i) s << (i ? "," : "") << box.center[i];
  s << "))";
  return s.str();
}

}  // namespace mpmsa
