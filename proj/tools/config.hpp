#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mpmsa/hamiltonian.hpp"
#include "mpmsa/msa.hpp"

namespace mpmsa {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ClassifySection {
  int n = 2;
  int L = 8;
  Point center{0, 0};
  double energy = 0.25;  // offset above E0, as a fraction of η
  bool operator==(const ClassifySection&) const = default;
};

struct DecaySection {
  std::vector<int> extent{24, 24};
  int count = 5;
  std::string fit = "envelope";
  bool operator==(const DecaySection&) const = default;
};

struct CalibrateSection {
  int gri_L = 10;
  std::size_t batch = 100;
  std::vector<int> l_star_scales{8, 12, 16};
  std::size_t l_star_trials = 10;
  double K = 2.0;
  bool operator==(const CalibrateSection&) const = default;
};

struct ExperimentConfig {
  Model model;
  int n_min = 1;
  int n_max = 2;
  int L0 = 4;
  int k_max = 1;
  MSAParams msa;
  std::size_t trials = 20;
  std::uint64_t seed = 1;
  int threads = 1;
  ClassifySection classify;
  DecaySection decay;
  CalibrateSection calibrate;
  bool operator==(const ExperimentConfig&) const = default;

  std::vector<int> scales() const { return scale_sequence(L0, k_max); }
};

// Errors carry "line N:" prefixes pointing into the source text.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string to_yaml(const ExperimentConfig& c);
void validate(const ExperimentConfig& c);

// FNV-1a 64 over the canonical serialization, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);
std::string config_hash(const ExperimentConfig& c);

}  // namespace mpmsa
