#include "config.hpp"

#include <yaml-cpp/yaml.h>

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace mpmsa {

namespace {

std::string at_line(const YAML::Node& n) {
  const auto m = n.Mark();
  return m.is_null() ? std::string("line ?: ") : "line " + std::to_string(m.line + 1) + ": ";
}

[[noreturn]] void fail(const YAML::Node& n, const std::string& msg) { throw ConfigError(at_line(n) + msg); }

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void check_keys(const YAML::Node& node, const std::string& path, const std::set<std::string>& allowed) {
  if (!node.IsMap()) fail(node, "field '" + (path.empty() ? std::string("<root>") : path) + "' must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (key == "alpha" || key == "beta")
      fail(kv.first, "field '" + join(path, key) + "' is fixed (alpha = 3/2, beta = 1/2) and cannot be configured");
    if (!allowed.count(key)) fail(kv.first, "unknown field '" + join(path, key) + "'");
  }
}

template <typename T>
void read(const YAML::Node& node, const std::string& key, const std::string& path, T& out) {
  const YAML::Node v = node[key];
  if (!v) return;
  try {
    out = v.as<T>();
  } catch (const YAML::Exception&) {
    fail(v, "field '" + join(path, key) + "' has the wrong type");
  }
}

YAML::Node child(const YAML::Node& node, const std::string& key) { return node[key]; }

void parse_model(const YAML::Node& m, ExperimentConfig& c) {
  check_keys(m, "model", {"d", "N", "n_range", "mesh", "interaction", "disorder"});
  read(m, "d", "model", c.model.d);
  read(m, "N", "model", c.model.N);
  read(m, "mesh", "model", c.model.h);
  if (auto r = child(m, "n_range")) {
    std::vector<int> nr;
    read(m, "n_range", "model", nr);
    if (nr.size() != 2) fail(r, "field 'model.n_range' needs [n_min, n_max]");
    c.n_min = nr[0];
    c.n_max = nr[1];
  }
  if (auto it = child(m, "interaction")) {
    check_keys(it, "model.interaction", {"u0", "r0", "terms"});
    if (auto terms = child(it, "terms")) {
      if (it["u0"] || it["r0"]) fail(terms, "field 'model.interaction' takes either u0/r0 or terms");
      if (!terms.IsSequence()) fail(terms, "field 'model.interaction.terms' must be a list");
      c.model.interaction.terms.clear();
      for (const auto& t : terms) {
        check_keys(t, "model.interaction.terms[]", {"k", "amplitude", "range"});
        KBodyTerm k;
        read(t, "k", "model.interaction.terms[]", k.k);
        read(t, "amplitude", "model.interaction.terms[]", k.amplitude);
        read(t, "range", "model.interaction.terms[]", k.range);
        if (k.k < 2) fail(t, "field 'model.interaction.terms[].k' must be >= 2");
        c.model.interaction.terms.push_back(k);
      }
    } else {
      double u0 = c.model.interaction.u0(), r0 = c.model.interaction.r0();
      read(it, "u0", "model.interaction", u0);
      read(it, "r0", "model.interaction", r0);
      c.model.interaction = InteractionSpec::pairwise(u0, r0);
    }
  }
  if (auto dis = child(m, "disorder")) {
    check_keys(dis, "model.disorder", {"distribution", "g", "table", "point_mass", "bump_half_width"});
    std::string kind = "uniform";
    read(dis, "distribution", "model.disorder", kind);
    try {
      if (kind == "uniform") {
        double g = c.model.alloy.law.g;
        read(dis, "g", "model.disorder", g);
        c.model.alloy.law = Distribution::uniform(g);
      } else if (kind == "table") {
        auto t = child(dis, "table");
        if (!t) fail(dis, "field 'model.disorder.table' is required for a table distribution");
        check_keys(t, "model.disorder.table", {"x", "F"});
        std::vector<double> x, F;
        read(t, "x", "model.disorder.table", x);
        read(t, "F", "model.disorder.table", F);
        c.model.alloy.law = Distribution::table(x, F);
      } else if (kind == "point_mass") {
        double v = 0.0;
        read(dis, "point_mass", "model.disorder", v);
        c.model.alloy.law = Distribution::point_mass(v);
      } else {
        fail(dis["distribution"], "field 'model.disorder.distribution' must be uniform, table or point_mass");
      }
    } catch (const std::invalid_argument& e) {
      fail(dis, std::string("field 'model.disorder': ") + e.what());
    }
    read(dis, "bump_half_width", "model.disorder", c.model.alloy.bump.half_width);
  }
  c.model.alloy.d = c.model.d;
}

void parse_msa(const YAML::Node& m, ExperimentConfig& c) {
  check_keys(m, "msa", {"m", "p", "q", "eta", "energy_points", "spacing", "w1_energy", "E0", "cnr_policy", "stride"});
  auto& p = c.msa;
  read(m, "m", "msa", p.m);
  read(m, "p", "msa", p.p);
  read(m, "q", "msa", p.q);
  read(m, "eta", "msa", p.eta);
  read(m, "energy_points", "msa", p.energy_points);
  read(m, "spacing", "msa", p.spacing);
  read(m, "w1_energy", "msa", p.w1_energy);
  read(m, "stride", "msa", p.stride);
  if (m["E0"]) {
    double e = 0.0;
    read(m, "E0", "msa", e);
    p.E0 = e;
  }
  if (auto pol = child(m, "cnr_policy")) {
    std::string s;
    read(m, "cnr_policy", "msa", s);
    try {
      p.policy.kind = cnr_policy_from_string(s);
    } catch (const std::invalid_argument& e) {
      fail(pol, "field 'msa.cnr_policy': " + std::string(e.what()));
    }
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  ExperimentConfig c;
  if (root.IsNull()) {
    validate(c);
    return c;
  }
  check_keys(root, "", {"model", "scales", "msa", "run", "caps", "classify", "decay", "calibrate"});
  if (auto m = child(root, "model")) parse_model(m, c);
  if (auto s = child(root, "scales")) {
    check_keys(s, "scales", {"L0", "k_max"});
    read(s, "L0", "scales", c.L0);
    read(s, "k_max", "scales", c.k_max);
  }
  if (auto m = child(root, "msa")) parse_msa(m, c);
  if (auto r = child(root, "run")) {
    check_keys(r, "run", {"trials", "seed", "threads"});
    read(r, "trials", "run", c.trials);
    read(r, "seed", "run", c.seed);
    read(r, "threads", "run", c.threads);
  }
  if (auto cap = child(root, "caps")) {
    check_keys(cap, "caps", {"max_nd", "max_dim"});
    read(cap, "max_nd", "caps", c.msa.max_nd);
    read(cap, "max_dim", "caps", c.msa.dense_limit);
  }
  if (auto s = child(root, "classify")) {
    check_keys(s, "classify", {"n", "L", "center", "energy"});
    read(s, "n", "classify", c.classify.n);
    read(s, "L", "classify", c.classify.L);
    read(s, "center", "classify", c.classify.center);
    read(s, "energy", "classify", c.classify.energy);
  }
  if (auto s = child(root, "decay")) {
    check_keys(s, "decay", {"extent", "count", "fit"});
    read(s, "extent", "decay", c.decay.extent);
    read(s, "count", "decay", c.decay.count);
    read(s, "fit", "decay", c.decay.fit);
  }
  if (auto s = child(root, "calibrate")) {
    check_keys(s, "calibrate", {"gri_L", "batch", "l_star_scales", "l_star_trials", "K"});
    read(s, "gri_L", "calibrate", c.calibrate.gri_L);
    read(s, "batch", "calibrate", c.calibrate.batch);
    read(s, "l_star_scales", "calibrate", c.calibrate.l_star_scales);
    read(s, "l_star_trials", "calibrate", c.calibrate.l_star_trials);
    read(s, "K", "calibrate", c.calibrate.K);
  }
  try {
    validate(c);
  } catch (const ConfigError& e) {
    // Point at the section that owns the failing value when it can be found.
    std::string msg = e.what();
    const auto q1 = msg.find('\''), q2 = msg.find('\'', q1 + 1);
    if (q1 != std::string::npos && q2 != std::string::npos) {
      std::string field = msg.substr(q1 + 1, q2 - q1 - 1);
      YAML::Node n = root;
      std::stringstream ss(field);
      std::string part;
      bool found = true;
      while (std::getline(ss, part, '.')) {
        if (!n.IsMap() || !n[part]) {
          found = false;
          break;
        }
        n = n[part];
      }
      if (found) throw ConfigError(at_line(n) + msg);
    }
    throw ConfigError("line ?: " + msg);
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate(const ExperimentConfig& c) {
  auto bad = [](const std::string& field, const std::string& msg) {
    throw ConfigError("field '" + field + "' " + msg);
  };
  const auto& M = c.model;
  if (M.d < 1) bad("model.d", "must be >= 1");
  if (M.N < 1) bad("model.N", "must be >= 1");
  if (c.n_min < 1 || c.n_min > c.n_max || c.n_max > M.N) bad("model.n_range", "must satisfy 1 <= n_min <= n_max <= N");
  if (!(M.h > 0.0) || M.h > 1.0) bad("model.mesh", "must lie in (0, 1]");
  if (!(M.alloy.bump.half_width > 0.0)) bad("model.disorder.bump_half_width", "must be positive");
  if (c.L0 < 2) bad("scales.L0", "must be >= 2");
  if (c.k_max < 0) bad("scales.k_max", "must be >= 0");
  const auto& p = c.msa;
  if (!(p.m > 0.0)) bad("msa.m", "must be positive");
  if (!(p.eta >= 0.0)) bad("msa.eta", "must be >= 0");
  if (p.energy_points < 2) bad("msa.energy_points", "must be >= 2");
  if (p.spacing < 0.0) bad("msa.spacing", "must be >= 0");
  if (p.stride < 1) bad("msa.stride", "must be >= 1");
  if (p.w1_energy < 0.0 || p.w1_energy > 1.0) bad("msa.w1_energy", "must lie in [0, 1]");
  if (c.trials < 1) bad("run.trials", "must be >= 1");
  if (c.threads < 0) bad("run.threads", "must be >= 0");
  if (p.max_nd < 1 || p.max_nd > 4) bad("caps.max_nd", "must lie in 1..4");
  if (p.dense_limit < 1 || p.dense_limit > kDenseLimit) bad("caps.max_dim", "must lie in 1..4096");
  if (c.n_max * M.d > p.max_nd)
    bad("caps.max_nd", "exceeded: n_max * d = " + std::to_string(c.n_max * M.d) + " > " + std::to_string(p.max_nd));
  auto dim = [&](int n, int L) {
    return box_grid(MPBox{Point(static_cast<std::size_t>(n * M.d), 0), L, n, M.d}, M.h).size();
  };
  std::vector<int> scales;
  try {
    scales = c.scales();
  } catch (const std::exception& e) {
    bad("scales", e.what());
  }
  for (int n = c.n_min; n <= c.n_max; ++n)
    for (std::size_t k = 0; k < scales.size(); ++k)
      if (dim(n, scales[k]) > p.dense_limit)
        bad("caps.max_dim", "exceeded by n=" + std::to_string(n) + " at L_" + std::to_string(k) + "=" +
                                std::to_string(scales[k]) + " (" + std::to_string(dim(n, scales[k])) + " > " +
                                std::to_string(p.dense_limit) + ")");
  const auto& cl = c.classify;
  if (cl.n < 1 || cl.n > M.N) bad("classify.n", "must lie in 1..N");
  if (cl.L < 2) bad("classify.L", "must be >= 2");
  if (cl.center.size() != static_cast<std::size_t>(cl.n * M.d)) bad("classify.center", "needs n*d coordinates");
  if (cl.n * M.d > p.max_nd) bad("caps.max_nd", "exceeded by the classify box");
  if (dim(cl.n, cl.L) > p.dense_limit) bad("caps.max_dim", "exceeded by the classify box");
  const auto& dc = c.decay;
  if (dc.extent.size() != static_cast<std::size_t>(M.N * M.d)) bad("decay.extent", "needs N*d entries");
  std::size_t cells = 1;
  for (int e : dc.extent) {
    if (e < 1) bad("decay.extent", "entries must be >= 1");
    cells *= static_cast<std::size_t>(e);
  }
  if (cells > p.dense_limit) bad("caps.max_dim", "exceeded by the decay grid");
  if (dc.count < 1 || static_cast<std::size_t>(dc.count) > cells) bad("decay.count", "must lie in 1..grid size");
  if (dc.fit != "envelope" && dc.fit != "all_cells") bad("decay.fit", "must be envelope or all_cells");
  const auto& ca = c.calibrate;
  if (ca.gri_L < 8) bad("calibrate.gri_L", "must be >= 8");
  if (ca.batch < 1) bad("calibrate.batch", "must be >= 1");
  if (ca.l_star_trials < 1) bad("calibrate.l_star_trials", "must be >= 1");
  for (int L : ca.l_star_scales)
    if (L < 4) bad("calibrate.l_star_scales", "entries must be >= 4");
}

std::string to_yaml(const ExperimentConfig& c) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e.SetFloatPrecision(17);
  const auto& M = c.model;
  e << YAML::BeginMap;
  e << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "d" << YAML::Value << M.d;
  e << YAML::Key << "N" << YAML::Value << M.N;
  e << YAML::Key << "n_range" << YAML::Value << YAML::Flow << std::vector<int>{c.n_min, c.n_max};
  e << YAML::Key << "mesh" << YAML::Value << M.h;
  e << YAML::Key << "interaction" << YAML::Value << YAML::BeginMap << YAML::Key << "terms" << YAML::Value
    << YAML::BeginSeq;
  for (const auto& t : M.interaction.terms)
    e << YAML::Flow << YAML::BeginMap << YAML::Key << "k" << YAML::Value << t.k << YAML::Key << "amplitude"
      << YAML::Value << t.amplitude << YAML::Key << "range" << YAML::Value << t.range << YAML::EndMap;
  e << YAML::EndSeq << YAML::EndMap;
  e << YAML::Key << "disorder" << YAML::Value << YAML::BeginMap;
  if (M.alloy.law.kind == Distribution::Kind::Uniform) {
    e << YAML::Key << "distribution" << YAML::Value << "uniform";
    e << YAML::Key << "g" << YAML::Value << M.alloy.law.g;
  } else {
    e << YAML::Key << "distribution" << YAML::Value << "table";
    e << YAML::Key << "table" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "x" << YAML::Value << YAML::Flow << M.alloy.law.x;
    e << YAML::Key << "F" << YAML::Value << YAML::Flow << M.alloy.law.F;
    e << YAML::EndMap;
  }
  e << YAML::Key << "bump_half_width" << YAML::Value << M.alloy.bump.half_width;
  e << YAML::EndMap << YAML::EndMap;

  e << YAML::Key << "scales" << YAML::Value << YAML::BeginMap << YAML::Key << "L0" << YAML::Value << c.L0
    << YAML::Key << "k_max" << YAML::Value << c.k_max << YAML::EndMap;

  const auto& p = c.msa;
  e << YAML::Key << "msa" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "m" << YAML::Value << p.m;
  e << YAML::Key << "p" << YAML::Value << p.p;
  e << YAML::Key << "q" << YAML::Value << p.q;
  e << YAML::Key << "eta" << YAML::Value << p.eta;
  e << YAML::Key << "energy_points" << YAML::Value << p.energy_points;
  e << YAML::Key << "spacing" << YAML::Value << p.spacing;
  e << YAML::Key << "w1_energy" << YAML::Value << p.w1_energy;
  if (p.E0) e << YAML::Key << "E0" << YAML::Value << *p.E0;
  e << YAML::Key << "cnr_policy" << YAML::Value << to_string(p.policy.kind);
  e << YAML::Key << "stride" << YAML::Value << p.stride;
  e << YAML::EndMap;

  e << YAML::Key << "run" << YAML::Value << YAML::BeginMap << YAML::Key << "trials" << YAML::Value << c.trials
    << YAML::Key << "seed" << YAML::Value << c.seed << YAML::Key << "threads" << YAML::Value << c.threads
    << YAML::EndMap;
  e << YAML::Key << "caps" << YAML::Value << YAML::BeginMap << YAML::Key << "max_nd" << YAML::Value << p.max_nd
    << YAML::Key << "max_dim" << YAML::Value << p.dense_limit << YAML::EndMap;
  e << YAML::Key << "classify" << YAML::Value << YAML::BeginMap << YAML::Key << "n" << YAML::Value << c.classify.n
    << YAML::Key << "L" << YAML::Value << c.classify.L << YAML::Key << "center" << YAML::Value << YAML::Flow
    << c.classify.center << YAML::Key << "energy" << YAML::Value << c.classify.energy << YAML::EndMap;
  e << YAML::Key << "decay" << YAML::Value << YAML::BeginMap << YAML::Key << "extent" << YAML::Value << YAML::Flow
    << c.decay.extent << YAML::Key << "count" << YAML::Value << c.decay.count << YAML::Key << "fit" << YAML::Value
    << c.decay.fit << YAML::EndMap;
  e << YAML::Key << "calibrate" << YAML::Value << YAML::BeginMap << YAML::Key << "gri_L" << YAML::Value
    << c.calibrate.gri_L << YAML::Key << "batch" << YAML::Value << c.calibrate.batch << YAML::Key << "l_star_scales"
    << YAML::Value << YAML::Flow << c.calibrate.l_star_scales << YAML::Key << "l_star_trials" << YAML::Value
    << c.calibrate.l_star_trials << YAML::Key << "K" << YAML::Value << c.calibrate.K << YAML::EndMap;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const ExperimentConfig& c) { return fnv1a_hex(to_yaml(c)); }

}  // namespace mpmsa
