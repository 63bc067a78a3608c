#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mpmsa/hamiltonian.hpp"

namespace mpmsa {

inline constexpr double kAlpha = 1.5;
inline constexpr double kBeta = 0.5;

// γ(m, L, n) = m L (1 + L^{-1/4})^{N-n+1}
double gamma_exponent(double m, int L, int n, int N);
// e^{-L^β}
double resonance_threshold(int L);

struct ResonantEnergy : std::domain_error {
  using std::domain_error::domain_error;
};

template <typename Scalar>
Scalar distance_to_spectrum(const VectorX<Scalar>& values, Scalar E) {
  return (values.array() - E).abs().minCoeff();
}

template <typename Scalar>
void require_off_spectrum(const VectorX<Scalar>& values, Scalar E) {
  using std::abs;
  const Scalar scale = std::max(Scalar(1), abs(E));
  if (distance_to_spectrum(values, E) <= Scalar(1e-12) * scale)
    throw ResonantEnergy("energy lies in the spectrum of the box");
}

// Rows x columns block of (H - E)^{-1}, from the eigendecomposition.
template <typename Scalar>
MatrixX<Scalar> resolvent_block(const SpectralData<Scalar>& S, Scalar E, const std::vector<std::size_t>& rows,
                                const std::vector<std::size_t>& cols) {
  if (!S.complete) throw std::logic_error("resolvent needs the full spectrum");
  require_off_spectrum(S.values, E);
  const VectorX<Scalar> w = (S.values.array() - E).inverse();
  MatrixX<Scalar> left(static_cast<Eigen::Index>(rows.size()), S.vectors.cols());
  MatrixX<Scalar> right(static_cast<Eigen::Index>(cols.size()), S.vectors.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    left.row(static_cast<Eigen::Index>(i)) = S.vectors.row(static_cast<Eigen::Index>(rows[i])).cwiseProduct(w.transpose());
  for (std::size_t i = 0; i < cols.size(); ++i)
    right.row(static_cast<Eigen::Index>(i)) = S.vectors.row(static_cast<Eigen::Index>(cols[i]));
  return left * right.transpose();
}

// ||1_{C(v)} G(E) 1_{C(w)}||
template <typename Scalar>
Scalar green_block(const SpectralData<Scalar>& S, Scalar E, const Point& v, const Point& w) {
  const CellMap cells = build_cells(S.grid);
  return spectral_norm(resolvent_block(S, E, cells.at(v), cells.at(w)));
}

// Cached cell structure plus resolvent weights for repeated block queries.
class Resolvent {
 public:
  Resolvent(const SpectralData<double>& S, double E);
  Resolvent(const SpectralData<double>& S, double E, std::shared_ptr<const CellMap> cells);

  double block(const Point& v, const Point& w) const;
  Eigen::MatrixXd block(const std::vector<Point>& rows, const std::vector<Point>& cols) const;
  double energy() const { return E_; }
  const CellMap& cells() const { return *cells_; }

 private:
  std::vector<std::size_t> indices(const std::vector<Point>& cells) const;
  const SpectralData<double>* S_;
  double E_;
  Eigen::VectorXd weights_;
  std::shared_ptr<const CellMap> cells_;
};

struct GreenBlockTable {
  MPBox box;
  double E = 0.0;
  std::vector<Point> points;
  Eigen::MatrixXd D;

  double at(const Point& v, const Point& w) const;
};

GreenBlockTable green_block_table(const SpectralData<double>& S, double E);

enum class Resonance { NR, R };
Resonance classify_resonance(const SpectralData<double>& S, double E, int L);
inline Resonance classify_resonance(const SpectralData<double>& S, double E) {
  return classify_resonance(S, E, S.box.value().radius);
}

struct CNRPolicy {
  enum class Kind { Concentric, ConcentricStrided };
  Kind kind = Kind::ConcentricStrided;
  bool operator==(const CNRPolicy&) const = default;
};

std::string to_string(CNRPolicy::Kind k);
CNRPolicy::Kind cnr_policy_from_string(const std::string& s);

// Sub-boxes of radius >= L^{1/α} examined for complete non-resonance (box itself excluded).
std::vector<MPBox> cnr_family(const MPBox& box, const CNRPolicy& policy);

// One disorder realisation plus a cache of box spectra.
class Instance {
 public:
  Instance(Model model, std::uint64_t seed);

  const Model& model() const { return model_; }
  std::uint64_t seed() const { return seed_; }
  DisorderSample disorder_for(const MPBox& box) const;
  GridHamiltonian<double> hamiltonian(const MPBox& box) const;
  const SpectralData<double>& spectrum(const MPBox& box);
  void clear_cache() { cache_.clear(); }

 private:
  Model model_;
  std::uint64_t seed_;
  std::map<MPBox, SpectralData<double>> cache_;
};

struct CNRResult {
  bool nr = false;
  bool cnr = false;
  std::vector<MPBox> examined;
  std::optional<MPBox> resonant;
};

CNRResult classify_cnr(Instance& inst, const MPBox& box, double E, const CNRPolicy& policy);

enum class ResonancePolicy { Refuse, Classify };

struct SingularityResult {
  bool ns = false;
  double max_block = 0.0;
  double threshold = 0.0;
  Point worst;
};

// NS iff every outer-layer block from the center cell is <= e^{-γ(m,L,n)}.
SingularityResult classify_singularity(const SpectralData<double>& S, double E, double m, int N,
                                       ResonancePolicy policy = ResonancePolicy::Refuse);

struct BoxClassification {
  MPBox box;
  double E = 0.0, m = 0.0, alpha = kAlpha, beta = kBeta;
  double distance_to_spectrum = 0.0;
  bool nr = false;
  bool cnr = false;
  std::optional<bool> ns;  // empty when the energy is resonant
  double max_block = 0.0;
  double threshold = 0.0;
  CNRPolicy policy;
  std::vector<MPBox> family;
};

BoxClassification classify_box(Instance& inst, const MPBox& box, double E, double m, const CNRPolicy& policy);

struct DecayRate {
  double rate = 0.0;
  double prefactor = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

// Fit of log D(source, w; E) against |w - source|, distance 0 excluded.
DecayRate combes_thomas_check(const SpectralData<double>& S, double E, double delta, const Point& source);
inline DecayRate combes_thomas_check(const SpectralData<double>& S, double delta, const Point& source) {
  return combes_thomas_check(S, S.values(0) - delta, delta, source);
}

struct WeylCount {
  std::size_t count = 0;
  double bound = 0.0;
  bool holds = false;
};

// #{eigenvalues <= η + δ} against δ^{n'd/2} |B|.
WeylCount weyl_cutoff(const Eigen::VectorXd& eigenvalues, double delta, double eta, int n_prime, int d,
                      std::size_t volume);

// ||1_B G^big 1_A|| / (||1_B G^big 1_out|| ||1_out G^small 1_A||), out = outer layer of the small box.
double gri_ratio(const SpectralData<double>& small, const SpectralData<double>& big, double E,
                 const std::vector<Point>& A, const std::vector<Point>& B);

// D_L(v, y) / Σ_{w in out_ℓ(v)} D_ℓ(v, w) max_{w' ~ w} D_L(w', y), w' over out_ℓ(v) with |w' - w| <= 1.
// On a grid the commutator with the cutoff couples neighbouring cells, so each
// layer cell is paired with its neighbourhood; this keeps the ratio below nd/h^2.
double dgri_ratio(const SpectralData<double>& big, const SpectralData<double>& small, double E, const Point& y);

// Empirically measured geometric constants.
struct Calibration {
  double C0 = 1.0;       // resolvent-inequality constant
  int L_star = 1;        // smallest scale with no observed failures
  std::string origin = "default";
  bool operator==(const Calibration&) const = default;
};

// sup_ℓ |B^out_ℓ| / (nℓ)^{nd-1} over ℓ = 3..4096.
double shell_constant(int n, int d);
// C4 = C0 * shell_constant(n, d)
double subharmonic_constant(const Calibration& cal, int n, int d);
// Q = C4 (nℓ)^{nd-1} e^{ℓ^β} e^{-γ(m,ℓ,n)}
double subharmonic_q(const Calibration& cal, double m, int ell, int n, int d, int N);

}  // namespace mpmsa
