#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mpmsa {

// Amplitude law: uniform on [0, g], or a piecewise-linear CDF through table
// points (x_i, F_i). A repeated x is a jump, so a table can hold atoms.
struct Distribution {
  enum class Kind { Uniform, Table };
  Kind kind = Kind::Uniform;
  double g = 1.0;
  std::vector<double> x, F;

  static Distribution uniform(double g);
  static Distribution table(std::vector<double> x, std::vector<double> F);
  static Distribution point_mass(double c);

  double cdf(double y) const;       // P(V <= y)
  double cdf_left(double y) const;  // P(V < y)
  double quantile(double u) const;  // u in [0,1)
  double upper() const;
  bool operator==(const Distribution&) const = default;
};

// φ = indicator of the closed cube [-w, w]^d; support diameter R = 2w.
struct Bump {
  double half_width = 0.5;
  double diameter() const { return 2.0 * half_width; }
  double operator()(std::span<const double> y) const;
  bool operator==(const Bump&) const = default;
};

struct AlloySpec {
  Distribution law = Distribution::uniform(1.0);
  Bump bump;
  int d = 1;
  bool operator==(const AlloySpec&) const = default;
};

// Integer rectangle [lo, hi] in Z^d, inclusive.
struct Region {
  std::vector<int> lo, hi;
  bool empty() const;
  std::size_t size() const;
  bool contains(std::span<const int> s) const;
  bool operator==(const Region&) const = default;
};

Region bounding_region(std::span<const int> lo, std::span<const int> hi);

// Counter-based key of a site: distinct (seed, site) pairs give distinct streams.
std::uint64_t site_key(std::uint64_t seed, std::span<const int> s);
double site_uniform(std::uint64_t seed, std::span<const int> s);

struct DisorderSample {
  std::uint64_t seed = 0;
  Region region;
  std::vector<double> values;

  double at(std::span<const int> s) const;
  double& at(std::span<const int> s);
  bool covers(std::span<const int> s) const { return region.contains(s); }
};

DisorderSample sample_disorder(const AlloySpec& spec, const Region& region, std::uint64_t seed);

// Sites whose bump reaches some point of the continuum cube [lo, hi]^d.
Region influence_region(std::span<const double> lo, std::span<const double> hi, const Bump& bump);

double external_potential(const DisorderSample& sample, const AlloySpec& spec, std::span<const double> x);
double multiparticle_potential(const DisorderSample& sample, const AlloySpec& spec, std::span<const double> x);

// Φ^{(k)} = amplitude when no particle of the k-cluster is isolated, i.e. every
// member has another member within range (max norm); zero otherwise.
struct KBodyTerm {
  int k = 2;
  double amplitude = 0.0;
  double range = 1.0;
  bool operator==(const KBodyTerm&) const = default;
};

struct InteractionSpec {
  std::vector<KBodyTerm> terms;

  static InteractionSpec pairwise(double u0, double r0);
  static InteractionSpec none() { return {}; }
  double u0() const;
  double r0() const;
  double upper_bound(int n) const;
  bool operator==(const InteractionSpec&) const = default;
};

double interaction_energy(const InteractionSpec& spec, std::span<const double> x, int n, int d);

struct HolderReport {
  std::vector<double> eps, nu;
  double a = 0.0, b = 0.0;
  bool satisfies = false;
};

// sup_y F(y+ε) - F(y) over the ε grid, with a power-law fit ν <= a ε^b.
HolderReport check_holder(const Distribution& law, const std::vector<double>& eps);

}  // namespace mpmsa
