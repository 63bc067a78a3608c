#include <doctest.h>

#include <string>

#include "config.hpp"

using namespace mpmsa;

namespace {

const char* kTiny = R"(model:
  d: 1
  N: 2
  n_range: [1, 2]
  mesh: 1
  interaction: {u0: 1, r0: 1.5}
  disorder: {distribution: uniform, g: 5}
scales: {L0: 4, k_max: 1}
msa: {m: 0.5, p: 1, q: 1, eta: 0.5, energy_points: 16}
run: {trials: 4, seed: 7, threads: 1}
caps: {max_nd: 4, max_dim: 4096}
classify: {n: 2, L: 5, center: [0, 3], energy: 0.25}
decay: {extent: [24, 24], count: 3, fit: envelope}
)";

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("config parses and round-trips") {
  const auto c = parse_config(kTiny);
  CHECK(c.model.N == 2);
  CHECK(c.model.interaction == InteractionSpec::pairwise(1.0, 1.5));
  CHECK(c.model.alloy.law == Distribution::uniform(5.0));
  CHECK(c.scales() == std::vector<int>{4, 8});
  CHECK(c.trials == 4);
  CHECK(c.seed == 7);
  CHECK(c.classify.center == Point{0, 3});
  CHECK(c.decay.count == 3);

  const auto again = parse_config(to_yaml(c));
  CHECK(again == c);
  CHECK(to_yaml(again) == to_yaml(c));
}

TEST_CASE("table laws and k-body terms round-trip") {
  std::string text = kTiny;
  text.replace(text.find("{distribution: uniform, g: 5}"), 29,
               "{distribution: table, table: {x: [0, 1, 1, 2], F: [0, 0.3, 0.6, 1]}}");
  text.replace(text.find("{u0: 1, r0: 1.5}"), 16, "{terms: [{k: 2, amplitude: 1, range: 1}, {k: 3, amplitude: 0.5, range: 2}]}");
  const auto c = parse_config(text);
  CHECK(c.model.alloy.law.kind == Distribution::Kind::Table);
  CHECK(c.model.interaction.terms.size() == 2);
  CHECK(parse_config(to_yaml(c)) == c);
}

TEST_CASE("config errors name the line") {
  std::string text = kTiny;
  text.insert(text.find("scales:"), "bogus: 3\n");
  const auto err = error_of(text);
  CHECK(err.find("line 8") != std::string::npos);
  CHECK(err.find("unknown field 'bogus'") != std::string::npos);

  std::string nested = kTiny;
  nested.replace(nested.find("m: 0.5"), 6, "mm: 0.5");
  CHECK(error_of(nested).find("unknown field 'msa.mm'") != std::string::npos);

  std::string typed = kTiny;
  typed.replace(typed.find("trials: 4"), 9, "trials: many");
  CHECK(error_of(typed).find("wrong type") != std::string::npos);
}

TEST_CASE("fixed exponents cannot be configured") {
  std::string text = kTiny;
  text.replace(text.find("msa: {"), 6, "msa: {alpha: 2, ");
  CHECK(error_of(text).find("fixed") != std::string::npos);
  std::string top = kTiny;
  top += "beta: 0.3\n";
  CHECK(error_of(top).find("'beta'") != std::string::npos);
}

TEST_CASE("caps are enforced") {
  std::string big = kTiny;
  big.replace(big.find("k_max: 1"), 8, "k_max: 3");  // L_3 = 103 at n = 2: 205^2 points
  const auto err = error_of(big);
  CHECK(err.find("caps.max_dim") != std::string::npos);
  CHECK(err.find("42025 > 4096") != std::string::npos);
  CHECK(err.find("line ") == 0);

  std::string small = kTiny;
  small.replace(small.find("max_dim: 4096"), 13, "max_dim: 100");
  CHECK(error_of(small).find("caps.max_dim") != std::string::npos);

  std::string nd = kTiny;
  nd.replace(nd.find("max_nd: 4"), 9, "max_nd: 1");
  CHECK(error_of(nd).find("caps.max_nd") != std::string::npos);

  auto c = parse_config(kTiny);
  c.model.h = 0.0;
  CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("config hashes") {
  const auto a = parse_config(kTiny);
  CHECK(config_hash(a) == config_hash(parse_config(to_yaml(a))));
  CHECK(config_hash(a).size() == 16);
  auto b = a;
  b.seed = 8;
  CHECK(config_hash(a) != config_hash(b));
  // FNV-1a 64 reference values.
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}
