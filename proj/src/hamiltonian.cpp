#include "mpmsa/hamiltonian.hpp"

#include <cmath>

namespace mpmsa {

std::size_t Grid::size() const {
  std::size_t c = 1;
  for (int e : extent) c *= static_cast<std::size_t>(e);
  return c;
}

std::vector<int> Grid::multi_index(std::size_t idx) const {
  std::vector<int> k(extent.size());
  for (std::size_t c = extent.size(); c-- > 0;) {
    k[c] = static_cast<int>(idx % static_cast<std::size_t>(extent[c]));
    idx /= static_cast<std::size_t>(extent[c]);
  }
  return k;
}

std::size_t Grid::index(std::span<const int> k) const {
  std::size_t idx = 0;
  for (std::size_t c = 0; c < extent.size(); ++c) idx = idx * static_cast<std::size_t>(extent[c]) + k[c];
  return idx;
}

void Grid::point(std::size_t idx, std::vector<double>& x) const {
  x.resize(extent.size());
  for (std::size_t c = extent.size(); c-- > 0;) {
    x[c] = origin[c] + h * static_cast<double>(idx % static_cast<std::size_t>(extent[c]));
    idx /= static_cast<std::size_t>(extent[c]);
  }
}

Grid box_grid(const MPBox& box, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("mesh h must be positive");
  const int K = static_cast<int>(std::ceil(box.radius / h - 1e-9)) - 1;
  Grid g;
  g.n = box.n;
  g.d = box.d;
  g.h = h;
  for (int c : box.center) {
    g.origin.push_back(c - K * h);
    g.extent.push_back(2 * K + 1);
  }
  return g;
}

Grid lattice_grid(int n, int d, const Point& lo, const std::vector<int>& extent) {
  if (lo.size() != static_cast<std::size_t>(n * d) || extent.size() != lo.size())
    throw std::invalid_argument("lattice grid needs n*d coordinates");
  Grid g;
  g.n = n;
  g.d = d;
  g.h = 1.0;
  g.origin.assign(lo.begin(), lo.end());
  g.extent = extent;
  return g;
}

const std::vector<std::size_t>& CellMap::at(const Point& w) const {
  auto it = lookup.find(w);
  if (it == lookup.end()) throw std::out_of_range("cell outside the grid");
  return members[it->second];
}

CellMap build_cells(const Grid& grid) {
  CellMap m;
  std::vector<double> x;
  Point w(grid.extent.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.point(i, x);
    for (std::size_t c = 0; c < x.size(); ++c) w[c] = static_cast<int>(std::floor(x[c] + 0.5 + 1e-9));
    auto [it, inserted] = m.lookup.try_emplace(w, m.cells.size());
    if (inserted) {
      m.cells.push_back(w);
      m.members.emplace_back();
    }
    m.members[it->second].push_back(i);
  }
  return m;
}

Region disorder_region(const Grid& grid, const Bump& bump) {
  std::vector<double> lo(grid.d, 0.0), hi(grid.d, 0.0);
  for (int i = 0; i < grid.d; ++i) {
    lo[i] = grid.origin[i];
    hi[i] = grid.origin[i] + grid.h * (grid.extent[i] - 1);
    for (int j = 1; j < grid.n; ++j) {
      const int c = j * grid.d + i;
      lo[i] = std::min(lo[i], grid.origin[c]);
      hi[i] = std::max(hi[i], grid.origin[c] + grid.h * (grid.extent[c] - 1));
    }
  }
  return influence_region(lo, hi, bump);
}

Region disorder_region(const MPBox& box, double h, const Bump& bump) { return disorder_region(box_grid(box, h), bump); }

Eigen::VectorXd grid_potential(const Grid& grid, const InteractionSpec& interaction, const AlloySpec& alloy,
                               const DisorderSample* disorder) {
  const std::size_t M = grid.size();
  Eigen::VectorXd pot(static_cast<Eigen::Index>(M));
  std::vector<double> x;
  for (std::size_t i = 0; i < M; ++i) {
    grid.point(i, x);
    double v = interaction_energy(interaction, x, grid.n, grid.d);
    if (disorder) {
      try {
        v += multiparticle_potential(*disorder, alloy, x);
      } catch (const std::out_of_range&) {
        throw std::out_of_range("disorder sample does not cover the box");
      }
    }
    pot(static_cast<Eigen::Index>(i)) = v;
  }
  return pot;
}

MPBox sub_box(const MPBox& box, const std::vector<int>& particles) {
  MPBox b{{}, box.radius, static_cast<int>(particles.size()), box.d};
  for (int j : particles) {
    auto p = box.particle(j);
    b.center.insert(b.center.end(), p.begin(), p.end());
  }
  return b;
}

std::vector<Eigen::Index> kron_permutation(const MPBox& box, double h, const std::vector<int>& J,
                                           const std::vector<int>& complement) {
  const Grid full = box_grid(box, h);
  const Grid ga = box_grid(sub_box(box, J), h), gb = box_grid(sub_box(box, complement), h);
  const int d = box.d;
  std::vector<Eigen::Index> perm(ga.size() * gb.size());
  std::vector<int> k(full.extent.size());
  for (std::size_t a = 0; a < ga.size(); ++a) {
    auto ka = ga.multi_index(a);
    for (std::size_t b = 0; b < gb.size(); ++b) {
      auto kb = gb.multi_index(b);
      for (std::size_t t = 0; t < J.size(); ++t)
        for (int i = 0; i < d; ++i) k[J[t] * d + i] = ka[t * d + i];
      for (std::size_t t = 0; t < complement.size(); ++t)
        for (int i = 0; i < d; ++i) k[complement[t] * d + i] = kb[t * d + i];
      perm[a * gb.size() + b] = static_cast<Eigen::Index>(full.index(k));
    }
  }
  return perm;
}

void check_split_interaction(const MPBox& box, double h, const InteractionSpec& interaction,
                             const std::vector<int>& J, const std::vector<int>& complement) {
  const Grid full = box_grid(box, h);
  const int d = box.d;
  std::vector<double> x, xa, xb;
  for (std::size_t i = 0; i < full.size(); ++i) {
    full.point(i, x);
    xa.clear();
    xb.clear();
    for (int j : J) xa.insert(xa.end(), x.begin() + j * d, x.begin() + (j + 1) * d);
    for (int j : complement) xb.insert(xb.end(), x.begin() + j * d, x.begin() + (j + 1) * d);
    const double u = interaction_energy(interaction, x, box.n, d);
    const double ua = interaction_energy(interaction, xa, static_cast<int>(J.size()), d);
    const double ub = interaction_energy(interaction, xb, static_cast<int>(complement.size()), d);
    if (std::abs(u - ua - ub) > 1e-12 * (1.0 + std::abs(u)))
      throw std::invalid_argument("cross interaction does not vanish on the box");
  }
}

GroundEnergy ground_energy_reference(const InteractionSpec& interaction, const MPBox& box, double h, int N) {
  auto H = assemble<double>(box, h, interaction, AlloySpec{}, nullptr, N);
  auto S = eigensolve_lowest(H, 1);
  return GroundEnergy{S.values(0), box};
}

}  // namespace mpmsa
