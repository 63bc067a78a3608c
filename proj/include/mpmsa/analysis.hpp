#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mpmsa/msa.hpp"

namespace mpmsa {

struct CellNorms {
  std::vector<Point> cells;
  std::vector<double> norms;  // ||1_{C(u)} ψ||
};

// Throws unless ||ψ|| = 1 within 1e-8.
CellNorms cell_norms(const Eigen::VectorXd& psi, const Grid& grid);
CellNorms cell_norms(const Eigen::VectorXd& psi, const CellMap& cells);

Point peak_cell(const CellNorms& c);

// AllCells fits every cell; Envelope fits the largest norm on each max-norm shell.
enum class FitMode { AllCells, Envelope };

struct DecayFit {
  double mass = 0.0;
  double prefactor = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
  std::size_t radii = 0;
  double energy = 0.0;
};

// log ||1_{C(u)}ψ|| against |u - center|, cells below 1e-14 dropped.
DecayFit fit_decay(const CellNorms& c, const Point& center, FitMode mode = FitMode::AllCells);
// Radius measured to the nearest of several centers.
DecayFit fit_decay(const CellNorms& c, const std::vector<Point>& centers, FitMode mode = FitMode::AllCells);

// Images of u under all permutations of the n particles, u first.
std::vector<Point> particle_orbit(const Point& u, int n, int d);

struct DecayRow {
  std::uint64_t seed = 0;
  int index = 0;
  bool in_window = false;
  Point center;
  DecayFit fit;
};

// Lowest eigenfunctions on a unit-mesh lattice grid with alloy disorder. Identical
// particles make mirror-image states nearly degenerate, so radii are measured to
// the nearest permutation image of the peak cell.
std::vector<DecayRow> decay_table(const Model& model, const Point& lo, const std::vector<int>& extent, int count,
                                  std::uint64_t seed, double eta, FitMode mode = FitMode::Envelope);

struct GriSample {
  std::uint64_t seed = 0;
  int n = 1;
  double E = 0.0;
  double gri = 0.0;
  double dgri = 0.0;
};

struct GriSuite {
  std::vector<int> n_values{1, 2};
  int L = 10;
  double eta = 1.0;
};

std::vector<GriSample> sample_gri(const Model& model, const GriSuite& suite, std::size_t count, std::uint64_t seed0);

struct GriConstant {
  double C0 = 0.0;
  double max_gri = 0.0;
  double max_dgri = 0.0;
  std::size_t samples = 0;
  std::size_t violations = 0;
};

// Max of both ratios; with an explicit constant, counts the samples exceeding it.
GriConstant measure_gri_constant(const std::vector<GriSample>& samples, std::optional<double> constant = {});

struct LStarRow {
  int L = 0;
  std::size_t applicable = 0;
  std::size_t violations = 0;
};

struct CalibrationReport {
  Calibration calibration;
  GriConstant batch_a, batch_b;
  double stability = 0.0;  // max/min of the two batch constants
  std::vector<LStarRow> l_star_sweep;
};

struct CalibrationSuite {
  GriSuite gri;
  std::size_t batch = 100;
  std::vector<int> l_star_scales{8, 12, 16};
  std::size_t l_star_trials = 10;
  double m = 0.5;
  double eta = 0.5;
  double K = 2.0;
  CNRPolicy policy;
};

CalibrationReport calibrate(const Model& model, const CalibrationSuite& suite, std::uint64_t seed0);

struct WidthRow {
  double g = 0.0;
  double eta = 0.0;
  double frequency = 0.0;
  Interval ci;
  double target = 0.0;
  bool pass = false;
};

struct WidthTable {
  std::vector<WidthRow> rows;
  std::vector<std::pair<double, std::optional<double>>> thresholds;  // g -> largest passing η
};

// DS at (n, k=0) over a (g, η) sweep with shared seeds and a fixed grid spacing.
WidthTable interaction_width_effect(const Model& model, int n, int L0, const std::vector<double>& gs,
                                    const std::vector<double>& etas, const MSAParams& params, std::size_t trials,
                                    std::uint64_t seed0, int threads = 1);

}  // namespace mpmsa
