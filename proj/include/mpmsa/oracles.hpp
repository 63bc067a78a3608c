#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mpmsa/hamiltonian.hpp"

// Brute-force reference implementations used to cross-check the fast paths.
namespace mpmsa::oracles {

// Tries every nonempty J in both directions, straight from the definition.
bool exhaustive_separable(const MPBox& a, const MPBox& b, double R, int N);

// ||1_{C(v)} (H - E)^{-1} 1_{C(w)}|| via an LU solve against the cell columns.
double direct_green_block(const GridHamiltonian<double>& H, double E, const Point& v, const Point& w);

// 1 - cos(kπ/(M+1)), k = 1..M: the mesh-1 Dirichlet chain with no potential.
Eigen::VectorXd free_chain_spectrum(int M);

// Components of the intersection graph via Floyd-Warshall reachability.
std::vector<std::vector<int>> transitive_clumps(const Point& y, int n, int d, int L, double R, bool open);

// Centers of FI ℓ-boxes inside the box, testing every lattice point for a near-diagonal configuration.
std::vector<Point> brute_force_fi_centers(const MPBox& box, int ell, double r0, int N);

// Sorted E'_a + E''_b.
Eigen::VectorXd pairwise_sums(const Eigen::VectorXd& first, const Eigen::VectorXd& second);

// Σ_a ψ'_a(u')ψ'_a(v') g''(u'', v''; E - E'_a) for full-grid indices (u, v).
Eigen::MatrixXd spectral_sum_green(const SplitHamiltonian<double>& split, double E,
                                   const std::vector<Eigen::Index>& rows, const std::vector<Eigen::Index>& cols);

// Dense (H - E)^{-1} restricted to the given full-grid indices, by LU.
Eigen::MatrixXd direct_green(const Eigen::MatrixXd& H, double E, const std::vector<Eigen::Index>& rows,
                             const std::vector<Eigen::Index>& cols);

struct CheckResult {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  double seconds = 0.0;
  bool pass() const { return cases > 0 && failures == 0; }
};

// Structured separability test against exhaustive_separable, n in {2,3}, d in {1,2}.
CheckResult check_separability(std::size_t pairs, std::uint64_t seed);
// y outside non_separable_cover(x) and beyond 2N(L+R) must be separable.
CheckResult check_cover(std::size_t samples, std::uint64_t seed);
// Full spectrum of PI boxes against sorted E'_a + E''_b, dimension <= max_dim.
CheckResult check_kron_sum(const Model& model, std::size_t instances, std::size_t max_dim, std::uint64_t seed);
// Row D(center, .) from the eigendecomposition against LU solves at meshes 1 and 1/2,
// as max |fast - slow| / max |slow| over the cells.
CheckResult check_green_blocks(const Model& model, std::size_t pairs, std::uint64_t seed);
CheckResult check_free_chain(const std::vector<int>& sizes);
CheckResult check_clumps(std::size_t samples, std::uint64_t seed);
CheckResult check_fi_candidates(std::size_t boxes, std::uint64_t seed);
// Resolvent of a PI box against the spectral-sum form over the first factor.
CheckResult check_spectral_sum_green(const Model& model, std::size_t instances, std::uint64_t seed);

// Every check above at small counts.
std::vector<CheckResult> oracle_suite(const Model& model, std::size_t scale, std::uint64_t seed);

}  // namespace mpmsa::oracles
