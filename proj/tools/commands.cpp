#include "commands.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "config.hpp"
#include "mpmsa/analysis.hpp"
#include "mpmsa/oracles.hpp"

namespace mpmsa::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string point_str(const Point& p) {
  std::string s;
  for (std::size_t i = 0; i < p.size(); ++i) s += (i ? " " : "") + std::to_string(p[i]);
  return s;
}

const std::map<std::string, std::string>& column_docs() {
  static const std::map<std::string, std::string> docs{
      {"config_hash", "FNV-1a 64 hash of the effective config"},
      {"seed", "first disorder seed of the row"},
      {"seed_hi", "last disorder seed of the row"},
      {"property", "DS, W1, W2 or PT"},
      {"n", "particle number"},
      {"k", "scale index"},
      {"L", "box radius L_k"},
      {"trials", "independent disorder samples"},
      {"events", "trials with the bad event"},
      {"frequency", "events / trials"},
      {"ci_lo", "Wilson 95% lower bound"},
      {"ci_hi", "Wilson 95% upper bound"},
      {"target", "probability bound for the property"},
      {"verdict", "pass if ci_hi <= target, fail if ci_lo > target, else inconclusive"},
      {"E0", "lower end of the energy interval"},
      {"eta", "width of the energy interval"},
      {"spacing", "energy grid spacing"},
      {"grid_points", "energy grid points before adaptive probes"},
      {"m", "mass parameter"},
      {"p", "DS exponent"},
      {"q", "Wegner exponent"},
      {"cnr_policy", "sub-box family used for complete non-resonance"},
      {"freq_k", "DS frequency at scale k"},
      {"freq_k1", "DS frequency at scale k+1"},
      {"pass_k", "DS meets its target at k"},
      {"pass_k1", "DS meets its target at k+1"},
      {"holds", "the step implication holds empirically"},
      {"index", "eigenvalue index, ascending"},
      {"energy", "eigenvalue or probe energy"},
      {"in_window", "eigenvalue lies in [E0, E0 + eta]"},
      {"center", "fit center cell"},
      {"mass", "fitted decay rate"},
      {"prefactor", "fitted prefactor"},
      {"r2", "coefficient of determination"},
      {"points", "points in the fit"},
      {"radii", "distinct radii in the fit"},
      {"check", "cross-check name"},
      {"cases", "cases examined"},
      {"failures", "cases disagreeing with the oracle"},
      {"max_error", "largest observed discrepancy"},
      {"tolerance", "allowed discrepancy"},
      {"pass", "no failures"},
      {"nr", "E-nonresonant"},
      {"cnr", "E-completely nonresonant"},
      {"ns", "nonsingular; empty when resonant"},
      {"max_block", "largest center-to-outer-layer Green block"},
      {"threshold", "exp(-gamma)"},
      {"distance", "distance from E to the box spectrum"},
      {"applicable", "instances meeting the lemma hypotheses"},
      {"violations", "applicable instances classified singular"},
      {"C0", "resolvent-inequality constant"},
      {"max_gri", "largest GRI ratio"},
      {"max_dgri", "largest DGRI ratio"},
      {"samples", "nested-box samples"},
      {"batch", "calibration batch label"},
  };
  return docs;
}

struct Table {
  std::string file;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

class Run {
 public:
  Run(std::string name, ExperimentConfig cfg, const std::string& out_dir)
      : name_(std::move(name)), cfg_(std::move(cfg)), dir_(out_dir), hash_(config_hash(cfg_)) {
    fs::create_directories(dir_);
    write_text("config.yaml", to_yaml(cfg_));
  }

  const ExperimentConfig& config() const { return cfg_; }
  const std::string& hash() const { return hash_; }

  void write_text(const std::string& file, const std::string& text) {
    std::ofstream out(dir_ / file, std::ios::binary);
    out << text;
    outputs_.push_back(file);
  }

  void write_table(const Table& t) {
    std::ostringstream s;
    for (std::size_t i = 0; i < t.columns.size(); ++i) s << (i ? "," : "") << t.columns[i];
    s << "\n";
    for (const auto& row : t.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) s << (i ? "," : "") << row[i];
      s << "\n";
    }
    write_text(t.file, s.str());
    json cols = json::array();
    for (const auto& c : t.columns) {
      auto it = column_docs().find(c);
      cols.push_back({{"name", c}, {"description", it == column_docs().end() ? "" : it->second}});
    }
    schema_[t.file] = {{"columns", cols}};
  }

  void write_json(const std::string& file, const json& j) { write_text(file, j.dump(2) + "\n"); }

  void finish(std::uint64_t seed_lo, std::uint64_t seed_hi, const json& extra = json::object()) {
    write_json("schema.json", schema_);
    json m{{"artifact", "mpmsa"},
           {"version", kVersion},
           {"subcommand", name_},
           {"config_hash", hash_},
           {"calibration_hash", calibration_hash()},
           {"timestamp", timestamp()},
           {"seed_lo", seed_lo},
           {"seed_hi", seed_hi},
           {"alpha", kAlpha},
           {"beta", kBeta},
           {"outputs", outputs_}};
    for (auto& [k, v] : extra.items()) m[k] = v;
    std::ofstream out(dir_ / "manifest.json", std::ios::binary);
    out << m.dump(2) << "\n";
  }

  static std::string calibration_hash() {
    const char* dir = std::getenv("MPMSA_CACHE_DIR");
    if (!dir) return "none";
    std::ifstream in(fs::path(dir) / "calibration.json", std::ios::binary);
    if (!in) return "none";
    std::stringstream s;
    s << in.rdbuf();
    return fnv1a_hex(s.str());
  }

 private:
  static std::string timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
  }

  std::string name_;
  ExperimentConfig cfg_;
  fs::path dir_;
  std::string hash_;
  std::vector<std::string> outputs_;
  json schema_ = json::object();
};

const std::vector<std::string> kPropertyColumns{
    "config_hash", "seed", "seed_hi", "property", "n", "k", "L", "trials", "events", "frequency", "ci_lo",
    "ci_hi", "target", "verdict", "E0", "eta", "spacing", "grid_points", "m", "p", "q", "cnr_policy"};

std::vector<std::string> property_row(const Run& run, const PropertyRow& r) {
  const auto& p = run.config().msa;
  return {run.hash(),
          std::to_string(r.seed_lo),
          std::to_string(r.seed_hi),
          to_string(r.property),
          std::to_string(r.n),
          std::to_string(r.k),
          std::to_string(r.L),
          std::to_string(r.trials),
          std::to_string(r.events),
          num(r.frequency),
          num(r.ci.lo),
          num(r.ci.hi),
          num(r.target),
          r.verdict,
          num(r.E0),
          num(r.eta),
          num(r.spacing),
          std::to_string(r.grid_points),
          num(p.m),
          num(p.p),
          num(p.q),
          to_string(p.policy.kind)};
}

int threads_of(const ExperimentConfig& c) { return c.threads; }

int cmd_properties(Run& run, const std::vector<Property>& props, const std::string& file) {
  const auto& c = run.config();
  const auto scales = c.scales();
  Table t{file, kPropertyColumns, {}};
  for (std::size_t k = 0; k < scales.size(); ++k)
    for (int n = c.n_min; n <= c.n_max; ++n)
      for (auto prop : props) {
        const auto row = estimate_property(prop, c.model, n, static_cast<int>(k), scales, c.msa, c.trials, c.seed,
                                           threads_of(c));
        t.rows.push_back(property_row(run, row));
      }
  run.write_table(t);
  run.finish(c.seed, c.seed + c.trials - 1);
  return 0;
}

int cmd_msa(Run& run) {
  const auto& c = run.config();
  Model m = c.model;
  const auto rep = induction_report(m, c.scales(), c.msa, c.trials, c.seed, threads_of(c));
  Table rows{"msa.csv", kPropertyColumns, {}};
  for (const auto& r : rep.rows)
    if (r.n >= c.n_min && r.n <= c.n_max) rows.rows.push_back(property_row(run, r));
  Table steps{"msa_steps.csv", {"config_hash", "seed", "seed_hi", "n", "k", "freq_k", "freq_k1", "pass_k", "pass_k1", "holds"}, {}};
  for (const auto& s : rep.steps) {
    if (s.n < c.n_min || s.n > c.n_max) continue;
    steps.rows.push_back({run.hash(), std::to_string(c.seed), std::to_string(c.seed + c.trials - 1),
                          std::to_string(s.n), std::to_string(s.k), num(s.freq_k), num(s.freq_k1),
                          s.pass_k ? "1" : "0", s.pass_k1 ? "1" : "0", s.holds ? "1" : "0"});
  }
  run.write_table(rows);
  run.write_table(steps);
  run.write_json("msa_notes.json", json{{"notes", rep.notes}});
  run.finish(c.seed, c.seed + c.trials - 1);
  return 0;
}

int cmd_classify(Run& run) {
  const auto& c = run.config();
  const MPBox box{c.classify.center, c.classify.L, c.classify.n, c.model.d};
  const double E0 = c.msa.E0 ? *c.msa.E0 : ground_energy_for(c.model, box.n, box.radius);
  const double E = E0 + c.classify.energy * c.msa.eta;
  Instance inst(c.model, c.seed);
  const auto cls = classify_box(inst, box, E, c.msa.m, c.msa.policy);
  json family = json::array();
  for (const auto& b : cls.family) family.push_back({{"center", b.center}, {"radius", b.radius}});
  json j{{"config_hash", run.hash()},
         {"seed", c.seed},
         {"box", {{"center", box.center}, {"radius", box.radius}, {"n", box.n}, {"d", box.d}}},
         {"E", E},
         {"E0", E0},
         {"m", cls.m},
         {"alpha", cls.alpha},
         {"beta", cls.beta},
         {"distance_to_spectrum", cls.distance_to_spectrum},
         {"nr", cls.nr},
         {"cnr", cls.cnr},
         {"ns", cls.ns ? json(*cls.ns) : json(nullptr)},
         {"max_block", cls.max_block},
         {"threshold", cls.threshold},
         {"cnr_policy", to_string(cls.policy.kind)},
         {"family", family}};
  run.write_json("classify.json", j);
  Table t{"classify.csv", {"config_hash", "seed", "n", "L", "center", "energy", "distance", "nr", "cnr", "ns", "max_block", "threshold"}, {}};
  t.rows.push_back({run.hash(), std::to_string(c.seed), std::to_string(box.n), std::to_string(box.radius),
                    point_str(box.center), num(E), num(cls.distance_to_spectrum), cls.nr ? "1" : "0",
                    cls.cnr ? "1" : "0", cls.ns ? (*cls.ns ? "1" : "0") : "", num(cls.max_block),
                    num(cls.threshold)});
  run.write_table(t);
  run.finish(c.seed, c.seed);
  return 0;
}

int cmd_decay(Run& run) {
  const auto& c = run.config();
  const FitMode mode = c.decay.fit == "envelope" ? FitMode::Envelope : FitMode::AllCells;
  const Point lo(c.decay.extent.size(), 0);
  std::vector<std::vector<DecayRow>> per_seed(c.trials);
  parallel_for(c.trials, threads_of(c), [&](std::size_t t) {
    per_seed[t] = decay_table(c.model, lo, c.decay.extent, c.decay.count, c.seed + t, c.msa.eta, mode);
  });
  Table tab{"decay.csv", {"config_hash", "seed", "index", "energy", "in_window", "center", "mass", "prefactor", "r2", "points", "radii"}, {}};
  for (const auto& rows : per_seed)
    for (const auto& r : rows)
      tab.rows.push_back({run.hash(), std::to_string(r.seed), std::to_string(r.index), num(r.fit.energy),
                          r.in_window ? "1" : "0", point_str(r.center), num(r.fit.mass), num(r.fit.prefactor),
                          num(r.fit.r2), std::to_string(r.fit.points), std::to_string(r.fit.radii)});
  run.write_table(tab);
  run.finish(c.seed, c.seed + c.trials - 1);
  return 0;
}

int cmd_oracle(Run& run) {
  const auto& c = run.config();
  const auto checks = oracles::oracle_suite(c.model, 1, c.seed);
  Table t{"oracle.csv", {"config_hash", "seed", "check", "cases", "failures", "max_error", "tolerance", "pass"}, {}};
  bool ok = true;
  for (const auto& r : checks) {
    ok = ok && r.pass();
    t.rows.push_back({run.hash(), std::to_string(c.seed), r.name, std::to_string(r.cases), std::to_string(r.failures),
                      num(r.max_error), num(r.tolerance), r.pass() ? "1" : "0"});
    std::cout << (r.pass() ? "PASS " : "FAIL ") << r.name << " cases=" << r.cases << " failures=" << r.failures
              << " max_error=" << r.max_error << "\n";
  }
  run.write_table(t);
  run.finish(c.seed, c.seed);
  return ok ? 0 : 1;
}

int cmd_calibrate(Run& run) {
  const auto& c = run.config();
  CalibrationSuite suite;
  suite.gri.L = c.calibrate.gri_L;
  suite.gri.eta = std::max(c.msa.eta, 1e-3);
  suite.gri.n_values.clear();
  for (int n = c.n_min; n <= c.n_max; ++n) suite.gri.n_values.push_back(n);
  suite.batch = c.calibrate.batch;
  suite.l_star_scales = c.calibrate.l_star_scales;
  suite.l_star_trials = c.calibrate.l_star_trials;
  suite.m = c.msa.m;
  suite.eta = c.msa.eta;
  suite.K = c.calibrate.K;
  suite.policy = c.msa.policy;
  const auto rep = calibrate(c.model, suite, c.seed);
  auto batch_json = [](const GriConstant& g) {
    return json{{"C0", g.C0}, {"max_gri", g.max_gri}, {"max_dgri", g.max_dgri}, {"samples", g.samples}};
  };
  json sweep = json::array();
  Table t{"calibration.csv", {"config_hash", "seed", "L", "applicable", "violations"}, {}};
  for (const auto& r : rep.l_star_sweep) {
    sweep.push_back({{"L", r.L}, {"applicable", r.applicable}, {"violations", r.violations}});
    t.rows.push_back({run.hash(), std::to_string(c.seed), std::to_string(r.L), std::to_string(r.applicable),
                      std::to_string(r.violations)});
  }
  json shells = json::object();
  for (int n = c.n_min; n <= c.n_max; ++n)
    shells[std::to_string(n)] = subharmonic_constant(rep.calibration, n, c.model.d);
  const json cal{{"C0", rep.calibration.C0},
                 {"L_star", rep.calibration.L_star},
                 {"origin", rep.calibration.origin},
                 {"C4_by_n", shells},
                 {"stability", rep.stability},
                 {"batch_a", batch_json(rep.batch_a)},
                 {"batch_b", batch_json(rep.batch_b)},
                 {"l_star_sweep", sweep},
                 {"config_hash", run.hash()}};
  const std::string text = cal.dump(2) + "\n";
  run.write_text("calibration.json", text);
  run.write_table(t);
  if (const char* dir = std::getenv("MPMSA_CACHE_DIR")) {
    fs::create_directories(dir);
    std::ofstream(fs::path(dir) / "calibration.json", std::ios::binary) << text;
  }
  run.finish(c.seed, c.seed + 2 * suite.batch - 1);
  return 0;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"classify", "wegner", "ds", "msa", "decay", "oracle", "calibrate"};
  return names;
}

int run(const std::string& subcommand, const RunOptions& options) {
  try {
    ExperimentConfig cfg = load_config(options.config);
    if (options.seed) cfg.seed = *options.seed;
    if (options.trials) cfg.trials = *options.trials;
    if (options.threads) cfg.threads = *options.threads;
    validate(cfg);
    Run r(subcommand, cfg, options.out_dir);
    if (subcommand == "classify") return cmd_classify(r);
    if (subcommand == "wegner") return cmd_properties(r, {Property::W1, Property::W2}, "wegner.csv");
    if (subcommand == "ds") return cmd_properties(r, {Property::DS}, "ds.csv");
    if (subcommand == "msa") return cmd_msa(r);
    if (subcommand == "decay") return cmd_decay(r);
    if (subcommand == "oracle") return cmd_oracle(r);
    if (subcommand == "calibrate") return cmd_calibrate(r);
    std::cerr << "unknown subcommand '" << subcommand << "'\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::length_error& e) {
    std::cerr << "cap exceeded: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace mpmsa::cli
