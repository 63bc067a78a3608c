#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mpmsa/spectral.hpp"
#include "mpmsa/stats.hpp"

namespace mpmsa {

// L_k = floor(L_{k-1}^{3/2}), k = 0..k_max.
std::vector<int> scale_sequence(int L0, int k_max);

// Q^{(L-W-3ℓ)/ℓ} max_f
double radial_descent_bound(double Q, int L, int W, int ell, double max_f);

// Nonnegative function on the lattice box.
struct BoxFunction {
  MPBox box;
  std::vector<double> values;  // in lattice_points(box) order

  std::size_t index(const Point& p) const;
  double at(const Point& p) const { return values[index(p)]; }
  double& at(const Point& p) { return values[index(p)]; }
};

BoxFunction make_box_function(const MPBox& box, const std::function<double(const Point&)>& f);

// Reference set for condition (i): the ball 1 <= |w-x| <= 2ℓ+1 or the sphere |w-x| = 2ℓ+1.
enum class ReferenceShell { Ball, Sphere };

struct SubharmonicCertificate {
  bool holds = false;
  std::optional<Point> counterexample;
  std::string failed_condition;
  double Q = 0.0, A = 0.0;
  int ell = 0;
  std::vector<Annulus> covering;  // annuli around the box center covering S
  int W = 0;
  std::size_t checked = 0;
  bool descent_checked = false;
  bool descent_holds = false;
  double f_center = 0.0, max_f = 0.0, descent_bound = 0.0;
  std::vector<std::string> log;
};

// Minimal union of centered annuli covering the points of S.
std::vector<Annulus> covering_annuli(const MPBox& box, const std::vector<Point>& S);

SubharmonicCertificate verify_subharmonic(const BoxFunction& f, double Q, double A, int ell,
                                          const std::vector<Point>& S,
                                          ReferenceShell shell = ReferenceShell::Ball);

// S/NS status of the ℓ-boxes inside an ambient box, keyed by center.
struct SingularityField {
  MPBox ambient;
  int ell = 1;
  std::map<Point, bool> singular;

  bool has(const Point& c) const { return singular.count(c) != 0; }
  bool is_singular(const Point& c) const;
  std::vector<Point> singular_centers() const;
};

// Centers c with □_ℓ(c) ⊂ ambient, on the given stride.
std::vector<Point> sub_box_centers(const MPBox& ambient, int ell, int stride = 1);

SingularityField singularity_field(Instance& inst, const MPBox& ambient, int ell, double E, double m,
                                   int stride = 1);
SingularityField injected_field(const MPBox& ambient, int ell, const std::function<bool(const Point&)>& singular,
                                int stride = 1);

struct SChain {
  std::vector<Point> centers;
  std::size_t length() const { return centers.size(); }
};

std::vector<SChain> find_s_chains(const SingularityField& field);
std::size_t max_chain_length(const std::vector<SChain>& chains);

struct EnvelopingBox {
  MPBox box;
  bool within_margin = false;
  bool boundary_ns = false;
  std::vector<Point> adjacent_singular;
};

EnvelopingBox enveloping_box(const SChain& chain, const SingularityField& field);

struct BadBoxEvidence {
  bool bad = false;
  std::vector<Annulus> annuli;
  std::vector<std::optional<Point>> witnesses;
};

// Annuli □_{ℓ+2jB}(v) \ □_{ℓ+(2j-1)B}(v), j = 1..κ(n)+1; width <= 0 selects B = 2nℓ+1.
BadBoxEvidence detect_bad_box(const Point& v, const SingularityField& field, int n, int width = 0);

struct GreenSubharmonic {
  bool hypotheses = false;
  std::string failed_hypothesis;
  BoxFunction f;
  double Q = 0.0;
  std::vector<Point> S;
  SubharmonicCertificate certificate;
};

GreenSubharmonic build_green_subharmonic(Instance& inst, const MPBox& box, double E, double m, int ell,
                                         const Calibration& cal, const CNRPolicy& policy, double A,
                                         ReferenceShell shell = ReferenceShell::Ball);

struct NsLemmaCheck {
  bool applicable = false;
  bool ns = false;
  std::string reason;
  int W = 0;
};

// (A) L >= L*, (B) E-CNR, (C) S-boxes covered by annuli of width <= K L^{1/α}  =>  box NS.
NsLemmaCheck check_ns_lemma(Instance& inst, const MPBox& box, double E, double m, int ell, const Calibration& cal,
                            const CNRPolicy& policy, double K);

// Singular status of a sub-box at an energy.
using SubBoxOracle = std::function<bool(const MPBox&, double)>;
SubBoxOracle instance_oracle(Instance& inst, double m);

struct TunnelingResult {
  bool tunneling = false;
  std::optional<double> energy;
  std::optional<std::pair<Point, Point>> pair;
  std::vector<int> factor;  // particles of the tunnelling factor (product boxes only)
};

TunnelingResult classify_tunneling(const MPBox& factor, int Lk, const std::vector<double>& energies, double R, int N,
                                   const SubBoxOracle& singular, int stride = 1);
// PT: some split J | J^c has a tunnelling factor.
TunnelingResult classify_partial_tunneling(const MPBox& box, int Lk, const std::vector<double>& energies, double R,
                                           int N, const SubBoxOracle& singular, int stride = 1);

struct SeparableCounts {
  int nu_S = 0, nu_PI = 0, nu_FI = 0;
  std::size_t candidates = 0, singular = 0;
};

SeparableCounts count_singular_separable(const MPBox& box, int ell, double E, double r0, double R, int N,
                                         const SubBoxOracle& singular, int stride = 1);
std::vector<Point> fi_candidate_centers(const MPBox& box, int ell, double r0, int N, int stride = 1);

// Grid of fixed spacing over I = [E0, E0 + eta].
struct EnergyGrid {
  double E0 = 0.0;
  double eta = 0.0;
  double spacing = 0.0;
  std::vector<double> points() const;
};

EnergyGrid make_energy_grid(double E0, double eta, int n_points, double spacing = 0.0);

// Grid points plus λ ± e^{-L^β} for eigenvalues λ inside I.
std::vector<double> probe_energies(const EnergyGrid& grid, const std::vector<const SpectralData<double>*>& spectra);

enum class Property { DS, W1, W2, PT };
std::string to_string(Property p);

struct MSAParams {
  double m = 0.5;
  double p = 1.0;
  double q = 1.0;
  double eta = 0.5;
  int energy_points = 64;
  double spacing = 0.0;          // 0 = eta / (energy_points - 1)
  double w1_energy = 0.5;        // W1 probe at E0 + w1_energy * eta
  std::optional<double> E0;      // ground energy override
  CNRPolicy policy;
  int stride = 1;
  std::size_t dense_limit = kDenseLimit;
  int max_nd = 4;
  bool operator==(const MSAParams&) const = default;
};

struct PropertyRow {
  Property property = Property::DS;
  int n = 1, k = 0, L = 1;
  std::size_t trials = 0, events = 0;
  double frequency = 0.0;
  Interval ci;
  double target = 0.0;
  std::string verdict;  // pass / fail / inconclusive
  bool point_pass = false;
  std::uint64_t seed_lo = 0, seed_hi = 0;
  double E0 = 0.0, eta = 0.0, spacing = 0.0;
  int grid_points = 0;
  std::vector<char> outcomes;  // per trial, ascending seed
};

double ground_energy_for(const Model& model, int n, int L);

PropertyRow estimate_property(Property prop, const Model& model, int n, int k, const std::vector<int>& scales,
                              const MSAParams& params, std::size_t trials, std::uint64_t seed0, int threads = 1);

struct StepVerdict {
  int n = 1, k = 0;
  double freq_k = 0.0, freq_k1 = 0.0;
  bool pass_k = false, pass_k1 = false;
  bool holds = false;
};

struct MSAReport {
  std::vector<PropertyRow> rows;
  std::vector<StepVerdict> steps;
  std::vector<std::string> notes;
};

MSAReport induction_report(const Model& model, const std::vector<int>& scales, const MSAParams& params,
                           std::size_t trials, std::uint64_t seed0, int threads = 1, bool include_wegner = true);

// Samples a separable partner box for DS/W2 pairs, deterministic in seed.
std::pair<MPBox, MPBox> sample_separable_pair(int n, int d, int L, double R, int N, std::uint64_t seed);

// Runs f(i) for i in [0, count) on a pool of threads; f must be independent per index.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& f);

}  // namespace mpmsa
