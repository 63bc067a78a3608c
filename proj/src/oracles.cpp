#include "mpmsa/oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

#include "mpmsa/msa.hpp"

namespace mpmsa::oracles {

namespace {

int coord_gap(const Point& p, int j, const Point& q, int k, int d) {
  int m = 0;
  for (int i = 0; i < d; ++i) m = std::max(m, std::abs(p[j * d + i] - q[k * d + i]));
  return m;
}

bool j_separable(const MPBox& y, const MPBox& x, unsigned J, double R) {
  const double self = 2.0 * (y.radius + R), cross = y.radius + x.radius + 2.0 * R;
  for (int j = 0; j < y.n; ++j) {
    if (!(J >> j & 1u)) continue;
    for (int k = 0; k < y.n; ++k)
      if (!(J >> k & 1u) && coord_gap(y.center, j, y.center, k, y.d) < self) return false;
    for (int i = 0; i < x.n; ++i)
      if (coord_gap(y.center, j, x.center, i, y.d) < cross) return false;
  }
  return true;
}

}  // namespace

bool exhaustive_separable(const MPBox& a, const MPBox& b, double R, int N) {
  int dist = 0;
  for (std::size_t i = 0; i < a.center.size(); ++i)
    dist = std::max(dist, std::abs(a.center[i] - b.center[i]) - a.radius - b.radius);
  if (dist <= 2.0 * N * (a.radius + R)) return false;
  for (unsigned J = 1; J < (1u << a.n); ++J)
    if (j_separable(b, a, J, R) || j_separable(a, b, J, R)) return true;
  return false;
}

Eigen::MatrixXd direct_green(const Eigen::MatrixXd& H, double E, const std::vector<Eigen::Index>& rows,
                             const std::vector<Eigen::Index>& cols) {
  const Eigen::Index M = H.rows();
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(M, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) rhs(cols[j], static_cast<Eigen::Index>(j)) = 1.0;
  const Eigen::MatrixXd A = H - E * Eigen::MatrixXd::Identity(M, M);
  const Eigen::MatrixXd X = A.fullPivLu().solve(rhs);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
  return out;
}

double direct_green_block(const GridHamiltonian<double>& H, double E, const Point& v, const Point& w) {
  const CellMap cells = build_cells(H.grid);
  std::vector<Eigen::Index> r, c;
  for (auto i : cells.at(v)) r.push_back(static_cast<Eigen::Index>(i));
  for (auto i : cells.at(w)) c.push_back(static_cast<Eigen::Index>(i));
  const Eigen::MatrixXd B = direct_green(H.matrix, E, r, c);
  return Eigen::JacobiSVD<Eigen::MatrixXd>(B).singularValues()(0);
}

Eigen::VectorXd free_chain_spectrum(int M) {
  if (M < 1) throw std::invalid_argument("chain needs M >= 1");
  Eigen::VectorXd w(M);
  for (int k = 1; k <= M; ++k) w(k - 1) = 1.0 - std::cos(k * std::numbers::pi / (M + 1));
  return w;
}

std::vector<std::vector<int>> transitive_clumps(const Point& y, int n, int d, int L, double R, bool open) {
  const double reach = 2.0 * (L + R);
  std::vector<std::vector<char>> link(n, std::vector<char>(n, 0));
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      const int g = coord_gap(y, j, y, k, d);
      link[j][k] = j == k || (open ? g < reach : g <= reach);
    }
  for (int m = 0; m < n; ++m)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        if (link[j][m] && link[m][k]) link[j][k] = 1;
  std::vector<int> owner(n, -1);
  std::vector<std::vector<int>> out;
  for (int j = 0; j < n; ++j) {
    if (owner[j] >= 0) continue;
    out.emplace_back();
    for (int k = 0; k < n; ++k)
      if (link[j][k]) {
        owner[k] = static_cast<int>(out.size()) - 1;
        out.back().push_back(k);
      }
  }
  return out;
}

std::vector<Point> brute_force_fi_centers(const MPBox& box, int ell, double r0, int N) {
  std::vector<Point> out;
  for_each_lattice_point(MPBox{box.center, box.radius - ell + 1, box.n, box.d}, [&](const Point& c) {
    bool near = false;
    for_each_lattice_point(MPBox{c, ell, box.n, box.d}, [&](const Point& x) {
      if (near) return;
      int spread = 0;
      for (int j = 0; j < box.n; ++j)
        for (int k = j + 1; k < box.n; ++k) spread = std::max(spread, coord_gap(x, j, x, k, box.d));
      if (spread <= N * r0 + 1e-12) near = true;
    });
    if (near || box.n == 1) out.push_back(c);
  });
  return out;
}

Eigen::VectorXd pairwise_sums(const Eigen::VectorXd& first, const Eigen::VectorXd& second) {
  Eigen::VectorXd s(first.size() * second.size());
  for (Eigen::Index a = 0; a < first.size(); ++a)
    for (Eigen::Index b = 0; b < second.size(); ++b) s(a * second.size() + b) = first(a) + second(b);
  std::sort(s.data(), s.data() + s.size());
  return s;
}

Eigen::MatrixXd spectral_sum_green(const SplitHamiltonian<double>& split, double E,
                                   const std::vector<Eigen::Index>& rows, const std::vector<Eigen::Index>& cols) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e1(split.first.matrix), e2(split.second.matrix);
  const Eigen::MatrixXd& P = e1.eigenvectors();
  const Eigen::MatrixXd& Q = e2.eigenvectors();
  const Eigen::VectorXd& l1 = e1.eigenvalues();
  const Eigen::VectorXd& l2 = e2.eigenvalues();
  const Eigen::Index mb = split.second.matrix.rows();
  std::vector<Eigen::Index> inverse(split.kron_to_full.size());
  for (std::size_t k = 0; k < split.kron_to_full.size(); ++k)
    inverse[static_cast<std::size_t>(split.kron_to_full[k])] = static_cast<Eigen::Index>(k);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const Eigen::Index u = inverse[static_cast<std::size_t>(rows[i])], v = inverse[static_cast<std::size_t>(cols[j])];
      const Eigen::Index ua = u / mb, ub = u % mb, va = v / mb, vb = v % mb;
      double sum = 0.0;
      for (Eigen::Index a = 0; a < l1.size(); ++a) {
        double g2 = 0.0;
        for (Eigen::Index b = 0; b < l2.size(); ++b) g2 += Q(ub, b) * Q(vb, b) / (l2(b) - (E - l1(a)));
        sum += P(ua, a) * P(va, a) * g2;
      }
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sum;
    }
  return out;
}

namespace {

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

Point random_point(std::mt19937_64& rng, int D, int lo, int hi) {
  std::uniform_int_distribution<int> u(lo, hi);
  Point p(static_cast<std::size_t>(D));
  for (auto& c : p) c = u(rng);
  return p;
}

int pick(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

// PI box with a vanishing cross interaction on its best split.
MPBox random_pi_box(std::mt19937_64& rng, int n, int d, int L, double r0, int N) {
  while (true) {
    MPBox b{random_point(rng, n * d, -2 * n * L - 4, 2 * n * L + 4), L, n, d};
    const auto cls = classify_interaction(b, r0, N);
    if (cls.tag == InteractionTag::PI && !cls.partition.empty()) return b;
  }
}

double random_energy(std::mt19937_64& rng, const Eigen::VectorXd& spectrum) {
  std::uniform_real_distribution<double> u(spectrum(0) - 0.5, spectrum(0) + 2.0);
  double E;
  do {
    E = u(rng);
  } while ((spectrum.array() - E).abs().minCoeff() < 1e-3);
  return E;
}

}  // namespace

CheckResult check_separability(std::size_t pairs, std::uint64_t seed) {
  Timer t;
  CheckResult r{"separability", 0, 0, 0.0, 0.0};
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < pairs; ++i) {
    const int n = pick(rng, 2, 3), d = pick(rng, 1, 2), L = pick(rng, 1, 3), N = pick(rng, n, 3);
    const double R = pick(rng, 0, 2) * 0.5;
    const int spread = 2 * N * (L + 2) + 6 * L;
    const MPBox a{random_point(rng, n * d, -spread, spread), L, n, d};
    const MPBox b{random_point(rng, n * d, -spread, spread), L, n, d};
    ++r.cases;
    if (is_separable_pair(a, b, R, N).separable != exhaustive_separable(a, b, R, N)) ++r.failures;
  }
  r.seconds = t.seconds();
  return r;
}

CheckResult check_cover(std::size_t samples, std::uint64_t seed) {
  Timer t;
  CheckResult r{"cover_soundness", 0, 0, 0.0, 0.0};
  std::mt19937_64 rng(seed);
  while (r.cases < samples) {
    const int n = pick(rng, 2, 3), d = pick(rng, 1, 2), L = pick(rng, 1, 3), N = n;
    const double R = pick(rng, 0, 2) * 0.5;
    const Point x = random_point(rng, n * d, -3 * L, 3 * L);
    const auto cover = non_separable_cover(x, n, d, L, R);
    const int half = 3 * cover.front().radius + 3 * L;
    const Point y = random_point(rng, n * d, -half, half);
    bool inside = false;
    for (const auto& c : cover)
      if (max_norm(c.center, y) < c.radius) {
        inside = true;
        break;
      }
    const MPBox bx{x, L, n, d}, by{y, L, n, d};
    if (inside || box_distance(bx, by) <= 2.0 * N * (L + R)) continue;
    ++r.cases;
    if (!is_separable_pair(bx, by, R, N).separable || !exhaustive_separable(bx, by, R, N)) ++r.failures;
  }
  r.seconds = t.seconds();
  return r;
}

CheckResult check_kron_sum(const Model& model, std::size_t instances, std::size_t max_dim, std::uint64_t seed) {
  Timer t;
  CheckResult r{"kron_sum_spectrum", 0, 0, 0.0, 1e-9};
  std::mt19937_64 rng(seed);
  const double r0 = model.interaction.r0();
  for (std::size_t i = 0; i < instances; ++i) {
    const int n = std::min(model.N, i % 4 == 3 ? 3 : 2);
    int L;
    do {
      L = pick(rng, 2, n == 2 ? 19 : 6);
    } while (std::pow(2.0 * L - 1.0, n * model.d) > static_cast<double>(max_dim));
    const MPBox box = random_pi_box(rng, n, model.d, L, r0, model.N);
    Instance inst(model, seed + i);
    const auto dis = inst.disorder_for(box);
    const auto split = assemble_split(box, classify_interaction(box, r0, model.N).partition, model.h,
                                      model.interaction, model.alloy, &dis, model.N);
    const auto full = eigensolve(inst.hamiltonian(box));
    const auto e1 = eigensolve(split.first), e2 = eigensolve(split.second);
    const Eigen::VectorXd sums = pairwise_sums(e1.values, e2.values);
    const double err = (full.values - sums).cwiseAbs().maxCoeff();
    ++r.cases;
    r.max_error = std::max(r.max_error, err);
    if (!(err <= r.tolerance)) ++r.failures;
  }
  r.seconds = t.seconds();
  return r;
}

CheckResult check_green_blocks(const Model& model, std::size_t pairs, std::uint64_t seed) {
  Timer t;
  CheckResult r{"green_block_direct_solve", 0, 0, 0.0, 1e-8};
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < pairs; ++i) {
    Model m = model;
    m.h = i % 2 ? 0.5 : 1.0;
    const int n = std::min(model.N, 1 + static_cast<int>(i % 4 >= 2));
    const int L = n == 1 ? pick(rng, 3, 12) : pick(rng, 3, m.h < 1.0 ? 5 : 8);
    const MPBox box{random_point(rng, n * m.d, -10, 10), L, n, m.d};
    Instance inst(m, seed + i);
    const auto H = inst.hamiltonian(box);
    const auto& S = inst.spectrum(box);
    const double E = random_energy(rng, S.values);
    // The whole row D(center, .) at once; entries near roundoff are compared normwise.
    const CellMap cells = build_cells(H.grid);
    std::vector<Eigen::Index> all(static_cast<std::size_t>(H.dim())), src;
    std::iota(all.begin(), all.end(), Eigen::Index{0});
    for (auto i : cells.at(box.center)) src.push_back(static_cast<Eigen::Index>(i));
    const Eigen::MatrixXd X = direct_green(H.matrix, E, all, src);
    const Resolvent G(S, E);
    double diff = 0.0, scale = 0.0;
    for (std::size_t c = 0; c < cells.cells.size(); ++c) {
      Eigen::MatrixXd B(static_cast<Eigen::Index>(cells.members[c].size()), X.cols());
      for (std::size_t i = 0; i < cells.members[c].size(); ++i)
        B.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(cells.members[c][i]));
      const double slow = spectral_norm(B);
      diff = std::max(diff, std::abs(G.block(box.center, cells.cells[c]) - slow));
      scale = std::max(scale, slow);
    }
    const double err = diff / scale;
    ++r.cases;
    r.max_error = std::max(r.max_error, err);
    if (!(err <= r.tolerance)) ++r.failures;
  }
  r.seconds = t.seconds();
  return r;
}

CheckResult check_free_chain(const std::vector<int>& sizes) {
  Timer t;
  CheckResult r{"free_chain_spectrum", 0, 0, 0.0, 1e-10};
  for (int M : sizes) {
    if (M % 2 == 0) throw std::invalid_argument("chain check needs odd M = 2L - 1");
    const MPBox box{Point{0}, (M + 1) / 2, 1, 1};
    const auto H = assemble<double>(box, 1.0, InteractionSpec::none(), AlloySpec{}, nullptr, 1);
    const auto S = eigensolve(H);
    const double err = (S.values - free_chain_spectrum(M)).cwiseAbs().maxCoeff();
    ++r.cases;
    r.max_error = std::max(r.max_error, err);
    if (!(err <= r.tolerance)) ++r.failures;
  }
  r.seconds = t.seconds();
  return r;
}

CheckResult check_clumps(std::size_t samples, std::uint64_t seed) {
  Timer t;
  CheckResult r{"clump_closure", 0, 0, 0.0, 0.0};
  std::mt19937_64 rng(seed);
  auto canonical = [](std::vector<std::vector<int>> c) {
    for (auto& v : c) std::sort(v.begin(), v.end());
    std::sort(c.begin(), c.end());
    return c;
  };
  for (std::size_t i = 0; i < samples; ++i) {
    const int n = pick(rng, 1, 5), d = pick(rng, 1, 2), L = pick(rng, 1, 3);
    const double R = pick(rng, 0, 2) * 0.5;
    const Point y = random_point(rng, n * d, -4 * n * L, 4 * n * L);
    for (bool open : {false, true}) {
      ++r.cases;
      const auto fast = clump_decomposition(y, n, d, L, R, open ? CubeClosure::Open : CubeClosure::Closed);
      if (canonical(fast) != canonical(transitive_clumps(y, n, d, L, R, open))) ++r.failures;
    }
  }
  r.seconds = t.seconds();
  return r;
}

CheckResult check_fi_candidates(std::size_t boxes, std::uint64_t seed) {
  Timer t;
  CheckResult r{"fi_candidate_restriction", 0, 0, 0.0, 0.0};
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < boxes; ++i) {
    const int n = pick(rng, 2, 3), d = 1, L = pick(rng, 4, n == 2 ? 9 : 6), ell = pick(rng, 1, L - 1);
    const int N = pick(rng, n, 3);
    const double r0 = pick(rng, 1, 3) * 0.5;
    const MPBox box{random_point(rng, n * d, -L, L), L, n, d};
    auto fast = fi_candidate_centers(box, ell, r0, N);
    auto slow = brute_force_fi_centers(box, ell, r0, N);
    std::sort(fast.begin(), fast.end());
    std::sort(slow.begin(), slow.end());
    ++r.cases;
    if (fast != slow) ++r.failures;
  }
  r.seconds = t.seconds();
  return r;
}

CheckResult check_spectral_sum_green(const Model& model, std::size_t instances, std::uint64_t seed) {
  Timer t;
  CheckResult r{"spectral_sum_green", 0, 0, 0.0, 1e-8};
  std::mt19937_64 rng(seed);
  const double r0 = model.interaction.r0();
  for (std::size_t i = 0; i < instances; ++i) {
    const int L = pick(rng, 2, 6);
    const MPBox box = random_pi_box(rng, 2, model.d, L, r0, model.N);
    Instance inst(model, seed + i);
    const auto dis = inst.disorder_for(box);
    const auto split = assemble_split(box, classify_interaction(box, r0, model.N).partition, model.h,
                                      model.interaction, model.alloy, &dis, model.N);
    const auto& S = inst.spectrum(box);
    const double E = random_energy(rng, S.values);
    const auto M = static_cast<int>(S.values.size());
    std::vector<Eigen::Index> rows, cols;
    for (int k = 0; k < 6; ++k) {
      rows.push_back(pick(rng, 0, M - 1));
      cols.push_back(pick(rng, 0, M - 1));
    }
    const Eigen::MatrixXd a = spectral_sum_green(split, E, rows, cols);
    const Eigen::MatrixXd b = direct_green(inst.hamiltonian(box).matrix, E, rows, cols);
    const double err = (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
    ++r.cases;
    r.max_error = std::max(r.max_error, err);
    if (!(err <= r.tolerance)) ++r.failures;
  }
  r.seconds = t.seconds();
  return r;
}

std::vector<CheckResult> oracle_suite(const Model& model, std::size_t scale, std::uint64_t seed) {
  // The factorization checks need at least two particles.
  Model multi = model;
  multi.N = std::max(model.N, 2);
  return {check_separability(200 * scale, seed),
          check_cover(200 * scale, seed + 1),
          check_kron_sum(multi, 2 * scale, 400, seed + 2),
          check_green_blocks(model, 4 * scale, seed + 3),
          check_free_chain({3, 15, 63}),
          check_clumps(100 * scale, seed + 4),
          check_fi_candidates(4 * scale, seed + 5),
          check_spectral_sum_green(multi, 2 * scale, seed + 6)};
}

}  // namespace mpmsa::oracles
