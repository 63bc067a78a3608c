#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mpmsa/geometry.hpp"
#include "mpmsa/linalg.hpp"
#include "mpmsa/randomfield.hpp"

namespace mpmsa {

// Rectangular grid in R^{nd}; coordinate 0 varies slowest in the linear index.
struct Grid {
  int n = 1;
  int d = 1;
  double h = 1.0;
  std::vector<double> origin;
  std::vector<int> extent;

  std::size_t size() const;
  std::vector<int> multi_index(std::size_t idx) const;
  std::size_t index(std::span<const int> k) const;
  void point(std::size_t idx, std::vector<double>& x) const;
  bool operator==(const Grid&) const = default;
};

// Grid points of the open box at mesh h.
Grid box_grid(const MPBox& box, double h);
// Unit-mesh grid over lattice points lo + [0, extent).
Grid lattice_grid(int n, int d, const Point& lo, const std::vector<int>& extent);

// Unit cells C(w): grid points x with w_i - 1/2 <= x_i < w_i + 1/2.
struct CellMap {
  std::vector<Point> cells;
  std::vector<std::vector<std::size_t>> members;
  std::map<Point, std::size_t> lookup;

  const std::vector<std::size_t>& at(const Point& w) const;
  bool has(const Point& w) const { return lookup.count(w) != 0; }
};

CellMap build_cells(const Grid& grid);

struct Model {
  int N = 2;
  int d = 1;
  double h = 1.0;
  InteractionSpec interaction = InteractionSpec::pairwise(1.0, 1.0);
  AlloySpec alloy;
  bool operator==(const Model&) const = default;
};

// Disorder sites needed by every grid point of the box.
Region disorder_region(const Grid& grid, const Bump& bump);
Region disorder_region(const MPBox& box, double h, const Bump& bump);

template <typename Scalar = double>
struct GridHamiltonian {
  Grid grid;
  std::optional<MPBox> box;
  MatrixX<Scalar> matrix;
  int N = 1;
  std::uint64_t seed = 0;

  Eigen::Index dim() const { return matrix.rows(); }
};

// Diagonal potential U(x) + Σ_j V(x_j) on the grid, in double precision.
Eigen::VectorXd grid_potential(const Grid& grid, const InteractionSpec& interaction, const AlloySpec& alloy,
                               const DisorderSample* disorder);

template <typename Scalar = double>
GridHamiltonian<Scalar> assemble(const Grid& grid, const InteractionSpec& interaction, const AlloySpec& alloy,
                                 const DisorderSample* disorder, int N = 1) {
  if (!(grid.h > 0.0)) throw std::invalid_argument("mesh h must be positive");
  const int D = grid.n * grid.d;
  const std::size_t M = grid.size();
  GridHamiltonian<Scalar> H;
  H.grid = grid;
  H.N = N;
  H.seed = disorder ? disorder->seed : 0;
  H.matrix = MatrixX<Scalar>::Zero(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(M));
  const Scalar hop = Scalar(-1) / (Scalar(2) * Scalar(grid.h) * Scalar(grid.h));
  const Scalar diag = Scalar(D) / (Scalar(grid.h) * Scalar(grid.h));
  const Eigen::VectorXd pot = grid_potential(grid, interaction, alloy, disorder);
  std::vector<std::size_t> stride(D, 1);
  for (int c = D - 2; c >= 0; --c) stride[c] = stride[c + 1] * static_cast<std::size_t>(grid.extent[c + 1]);
  for (std::size_t i = 0; i < M; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    H.matrix(ii, ii) = diag + Scalar(pot(ii));
    std::size_t rest = i;
    for (int c = 0; c < D; ++c) {
      const std::size_t k = rest / stride[c];
      rest %= stride[c];
      if (k + 1 < static_cast<std::size_t>(grid.extent[c])) {
        const auto jj = static_cast<Eigen::Index>(i + stride[c]);
        H.matrix(ii, jj) = hop;
        H.matrix(jj, ii) = hop;
      }
    }
  }
  return H;
}

template <typename Scalar = double>
GridHamiltonian<Scalar> assemble(const MPBox& box, double h, const InteractionSpec& interaction,
                                 const AlloySpec& alloy, const DisorderSample* disorder, int N = 1) {
  if (!(h > 0.0)) throw std::invalid_argument("mesh h must be positive");
  auto H = assemble<Scalar>(box_grid(box, h), interaction, alloy, disorder, N);
  H.box = box;
  return H;
}

template <typename Scalar = double>
struct SplitHamiltonian {
  GridHamiltonian<Scalar> first, second;
  std::vector<int> J, complement;
  // kron_to_full[a * M'' + b] = full-grid index of (first point a, second point b).
  std::vector<Eigen::Index> kron_to_full;
};

MPBox sub_box(const MPBox& box, const std::vector<int>& particles);
std::vector<Eigen::Index> kron_permutation(const MPBox& box, double h, const std::vector<int>& J,
                                           const std::vector<int>& complement);
// Throws unless U(x) = U(x_J) + U(x_{J^c}) at every grid point of the box.
void check_split_interaction(const MPBox& box, double h, const InteractionSpec& interaction,
                             const std::vector<int>& J, const std::vector<int>& complement);

template <typename Scalar = double>
SplitHamiltonian<Scalar> assemble_split(const MPBox& box, const std::vector<int>& J, double h,
                                        const InteractionSpec& interaction, const AlloySpec& alloy,
                                        const DisorderSample* disorder, int N) {
  if (J.empty() || static_cast<int>(J.size()) >= box.n) throw std::invalid_argument("split needs a proper subset J");
  if (classify_interaction(box, interaction.r0(), N).tag == InteractionTag::FI)
    throw std::invalid_argument("box is fully interactive; no tensor split");
  std::vector<int> comp;
  for (int j = 0; j < box.n; ++j)
    if (std::find(J.begin(), J.end(), j) == J.end()) comp.push_back(j);
  check_split_interaction(box, h, interaction, J, comp);
  SplitHamiltonian<Scalar> S;
  S.J = J;
  S.complement = comp;
  S.first = assemble<Scalar>(sub_box(box, J), h, interaction, alloy, disorder, N);
  S.second = assemble<Scalar>(sub_box(box, comp), h, interaction, alloy, disorder, N);
  S.kron_to_full = kron_permutation(box, h, J, comp);
  return S;
}

// H' ⊗ I + I ⊗ H'' in the full-grid ordering.
template <typename Scalar>
MatrixX<Scalar> kron_sum(const SplitHamiltonian<Scalar>& S) {
  const auto& A = S.first.matrix;
  const auto& B = S.second.matrix;
  const Eigen::Index ma = A.rows(), mb = B.rows();
  MatrixX<Scalar> out = MatrixX<Scalar>::Zero(ma * mb, ma * mb);
  for (Eigen::Index a = 0; a < ma; ++a)
    for (Eigen::Index b = 0; b < mb; ++b) {
      const Eigen::Index r = S.kron_to_full[a * mb + b];
      for (Eigen::Index a2 = 0; a2 < ma; ++a2)
        if (A(a, a2) != Scalar(0)) out(r, S.kron_to_full[a2 * mb + b]) += A(a, a2);
      for (Eigen::Index b2 = 0; b2 < mb; ++b2)
        if (B(b, b2) != Scalar(0)) out(r, S.kron_to_full[a * mb + b2]) += B(b, b2);
    }
  return out;
}

template <typename Scalar = double>
struct SpectralData {
  VectorX<Scalar> values;
  MatrixX<Scalar> vectors;
  Grid grid;
  std::optional<MPBox> box;
  bool complete = true;
  std::shared_ptr<const CellMap> cells;

  Eigen::Index dim() const { return vectors.rows(); }
};

constexpr std::size_t kDenseLimit = 4096;

template <typename Scalar = double>
SpectralData<Scalar> eigensolve(const GridHamiltonian<Scalar>& H, std::size_t limit = kDenseLimit) {
  if (static_cast<std::size_t>(H.dim()) > limit)
    throw std::length_error("matrix dimension " + std::to_string(H.dim()) + " exceeds the dense limit " +
                            std::to_string(limit));
  SpectralData<Scalar> S;
  S.grid = H.grid;
  S.box = H.box;
  S.cells = std::make_shared<const CellMap>(build_cells(H.grid));
  symmetric_eigensolve<Scalar>(H.matrix, S.values, S.vectors);
  return S;
}

template <typename Scalar = double>
SpectralData<Scalar> eigensolve_lowest(const GridHamiltonian<Scalar>& H, int count,
                                       std::size_t limit = kDenseLimit) {
  if (static_cast<std::size_t>(H.dim()) > limit)
    throw std::length_error("matrix dimension " + std::to_string(H.dim()) + " exceeds the dense limit " +
                            std::to_string(limit));
  SpectralData<Scalar> S;
  S.grid = H.grid;
  S.box = H.box;
  S.complete = count == H.dim();
  S.cells = std::make_shared<const CellMap>(build_cells(H.grid));
  symmetric_eigensolve_lowest<Scalar>(H.matrix, count, S.values, S.vectors);
  return S;
}

struct EigenQuality {
  double max_residual = 0.0;        // max_j ||H v_j - λ_j v_j|| / ||H||
  double orthonormality = 0.0;      // max |V^T V - I|
};

template <typename Scalar>
EigenQuality eigen_quality(const GridHamiltonian<Scalar>& H, const SpectralData<Scalar>& S) {
  EigenQuality q;
  const Scalar hn = H.matrix.norm();
  MatrixX<Scalar> R = H.matrix * S.vectors - S.vectors * S.values.asDiagonal();
  for (Eigen::Index j = 0; j < R.cols(); ++j)
    q.max_residual = std::max(q.max_residual, static_cast<double>(R.col(j).norm() / hn));
  MatrixX<Scalar> G = S.vectors.transpose() * S.vectors;
  G -= MatrixX<Scalar>::Identity(G.rows(), G.cols());
  q.orthonormality = static_cast<double>(G.cwiseAbs().maxCoeff());
  return q;
}

struct GroundEnergy {
  double value = 0.0;
  MPBox box;
};

// Lowest eigenvalue of -½Δ + U (no disorder) on the given box.
GroundEnergy ground_energy_reference(const InteractionSpec& interaction, const MPBox& box, double h, int N);

}  // namespace mpmsa
