#pragma once

// CLI configuration: a single self-describing JSON file per run.  Parsing
// validates everything up front and reports *all* errors with field paths,
// not just the first one.

#include "fwa/system.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace fwa {

using json = nlohmann::ordered_json;

struct CertifySettings {
  double gamma = 0.5;
  int steps = 1;
  IVec grid;  // k + d axes
};

struct BundleSettings {
  int iterations = 60;
  double tol = 1e-10;
  IVec grid;
};

struct ConjugateSettings {
  double tol = 1e-6;
  IVec grid;
  int verify_samples = 1000;
  int injectivity_fibres = 10;
  int injectivity_pairs = 50;
};

struct LeafSettings {
  double window = 1.0;
  int depth = 30;
  int mesh = 201;
  int fibres = 5;
  int pairs = 5;
};

struct SweepSettings {
  std::vector<double> epsilons;
};

struct SystemConfig {
  int d = 0;
  int k = 0;
  IMat A;
  BaseSystem base = BaseSystem::identity(1);
  TrigPolynomial v;
  TrigPolynomial perturbation;
  CertifySettings certify;
  BundleSettings bundles;
  ConjugateSettings conjugate;
  LeafSettings leaves;
  SweepSettings sweep;

  FibrewiseSystem build_system() const {
    return FibrewiseSystem(base, A, v, perturbation);
  }
  AffineModel build_model() const { return AffineModel(A, v, base); }
};

class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(std::vector<std::string> errors)
      : std::runtime_error(join(errors)), errors_(std::move(errors)) {}
  const std::vector<std::string>& errors() const { return errors_; }

private:
  static std::string join(const std::vector<std::string>& es) {
    std::string s = "invalid configuration:";
    for (const auto& e : es) s += "\n  - " + e;
    return s;
  }
  std::vector<std::string> errors_;
};

namespace detail {

class ConfigReader {
public:
  explicit ConfigReader(const json& root) : root_(root) {}
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& msg) {
    errors.push_back(path + ": " + msg);
  }

  void check_keys(const json& obj, const std::string& path,
                  std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) return;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool known = false;
      for (const char* k : allowed)
        if (it.key() == k) known = true;
      if (!known) fail(path + "." + it.key(), "unknown key");
    }
  }

  const json& root() const { return root_; }

private:
  const json& root_;
};

inline IVec read_ivec(ConfigReader& r, const json& j, const std::string& path,
                      int expected_len = -1) {
  IVec out;
  if (!j.is_array()) {
    r.fail(path, "expected an integer array");
    return out;
  }
  out.resize(static_cast<int>(j.size()));
  for (int i = 0; i < out.size(); ++i) {
    if (!j[i].is_number_integer()) {
      r.fail(path, "entries must be integers");
      return IVec();
    }
    out[i] = j[i].get<int>();
  }
  if (expected_len >= 0 && out.size() != expected_len)
    r.fail(path, "expected length " + std::to_string(expected_len));
  return out;
}

inline Vec read_vec(ConfigReader& r, const json& j, const std::string& path,
                    int expected_len = -1) {
  Vec out;
  if (!j.is_array()) {
    r.fail(path, "expected a number array");
    return out;
  }
  out.resize(static_cast<int>(j.size()));
  for (int i = 0; i < out.size(); ++i) {
    if (!j[i].is_number()) {
      r.fail(path, "entries must be numbers");
      return Vec();
    }
    out[i] = j[i].get<double>();
  }
  if (expected_len >= 0 && out.size() != expected_len)
    r.fail(path, "expected length " + std::to_string(expected_len));
  return out;
}

inline IMat read_imat(ConfigReader& r, const json& j, const std::string& path,
                      int n) {
  IMat out = IMat::Zero(n, n);
  if (!j.is_array() || static_cast<int>(j.size()) != n) {
    r.fail(path, "expected " + std::to_string(n) + " integer rows");
    return out;
  }
  for (int i = 0; i < n; ++i) {
    IVec row = read_ivec(r, j[i], path + "[" + std::to_string(i) + "]", n);
    if (row.size() == n) out.row(i) = row.transpose();
  }
  return out;
}

inline TrigPolynomial read_trig(ConfigReader& r, const json& j,
                                const std::string& path, int dim_in,
                                int dim_out) {
  TrigPolynomial p(dim_in, dim_out);
  if (j.is_null()) return p;
  if (!j.is_array()) {
    r.fail(path, "expected an array of trig terms");
    return p;
  }
  for (std::size_t t = 0; t < j.size(); ++t) {
    std::string tp = path + "[" + std::to_string(t) + "]";
    const json& term = j[t];
    if (!term.is_object()) {
      r.fail(tp, "expected an object {freq, cos, sin}");
      continue;
    }
    r.check_keys(term, tp, {"freq", "cos", "sin"});
    if (!term.contains("freq")) {
      r.fail(tp + ".freq", "missing");
      continue;
    }
    IVec freq = read_ivec(r, term["freq"], tp + ".freq", dim_in);
    Vec c = term.contains("cos") ? read_vec(r, term["cos"], tp + ".cos", dim_out)
                                 : Vec(Vec::Zero(dim_out));
    Vec s = term.contains("sin") ? read_vec(r, term["sin"], tp + ".sin", dim_out)
                                 : Vec(Vec::Zero(dim_out));
    if (freq.size() == dim_in && c.size() == dim_out && s.size() == dim_out)
      p.add_term(TrigTerm{freq, c, s});
  }
  return p;
}

}  // namespace detail

inline SystemConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("JSON parse error: ") + e.what()});
  }

  detail::ConfigReader r(root);
  SystemConfig cfg;

  r.check_keys(root, "$",
               {"system", "certify", "bundles", "conjugate", "leaves",
                "sweep"});
  if (!root.contains("system") || !root["system"].is_object()) {
    r.fail("$.system", "missing or not an object");
    throw ConfigError(std::move(r.errors));
  }
  const json& sys = root["system"];
  r.check_keys(sys, "$.system", {"d", "k", "A", "base", "v", "perturbation"});

  auto read_dim = [&](const char* key) {
    if (!sys.contains(key) || !sys[key].is_number_integer() ||
        sys[key].get<int>() <= 0) {
      r.fail(std::string("$.system.") + key, "must be a positive integer");
      return 0;
    }
    return sys[key].get<int>();
  };
  cfg.d = read_dim("d");
  cfg.k = read_dim("k");
  if (cfg.d == 0 || cfg.k == 0) throw ConfigError(std::move(r.errors));

  if (!sys.contains("A")) {
    r.fail("$.system.A", "missing");
  } else {
    cfg.A = detail::read_imat(r, sys["A"], "$.system.A", cfg.d);
    if (r.errors.empty()) {
      auto det = determinant(cfg.A);
      if (det != 1 && det != -1)
        r.fail("$.system.A",
               "determinant is " + std::to_string(det) + ", must be +-1");
    }
  }

  if (!sys.contains("base") || !sys["base"].is_object()) {
    r.fail("$.system.base", "missing or not an object");
  } else {
    const json& base = sys["base"];
    r.check_keys(base, "$.system.base", {"kind", "alpha", "B"});
    std::string kind = base.value("kind", "");
    Vec alpha = Vec::Zero(cfg.k);
    IMat B = IMat::Identity(cfg.k, cfg.k);
    if (base.contains("alpha"))
      alpha = detail::read_vec(r, base["alpha"], "$.system.base.alpha", cfg.k);
    if (base.contains("B")) {
      B = detail::read_imat(r, base["B"], "$.system.base.B", cfg.k);
      if (r.errors.empty() && std::abs(determinant(B)) != 1)
        r.fail("$.system.base.B", "determinant must be +-1");
    }
    if (alpha.size() != cfg.k) alpha = Vec::Zero(cfg.k);
    if (r.errors.empty()) {
      if (kind == "translation")
        cfg.base = BaseSystem::translation(alpha);
      else if (kind == "automorphism")
        cfg.base = BaseSystem::automorphism(B);
      else if (kind == "composite")
        cfg.base = BaseSystem::composite(B, alpha);
      else
        r.fail("$.system.base.kind",
               "must be translation | automorphism | composite");
    }
  }

  cfg.v = detail::read_trig(r, sys.contains("v") ? sys["v"] : json(),
                            "$.system.v", cfg.k, cfg.d);
  cfg.perturbation = detail::read_trig(
      r, sys.contains("perturbation") ? sys["perturbation"] : json(),
      "$.system.perturbation", cfg.k + cfg.d, cfg.d);

  auto default_grid = [&](int per_axis) {
    IVec g(cfg.k + cfg.d);
    g.setConstant(per_axis);
    return g;
  };
  cfg.certify.grid = default_grid(16);
  cfg.bundles.grid = default_grid(4);
  cfg.conjugate.grid = default_grid(8);

  if (root.contains("certify")) {
    const json& c = root["certify"];
    r.check_keys(c, "$.certify", {"gamma", "steps", "grid"});
    cfg.certify.gamma = c.value("gamma", cfg.certify.gamma);
    cfg.certify.steps = c.value("steps", cfg.certify.steps);
    if (!(cfg.certify.gamma > 0.0 && cfg.certify.gamma < 1.0))
      r.fail("$.certify.gamma", "must lie in (0,1)");
    if (cfg.certify.steps < 1) r.fail("$.certify.steps", "must be >= 1");
    if (c.contains("grid"))
      cfg.certify.grid =
          detail::read_ivec(r, c["grid"], "$.certify.grid", cfg.k + cfg.d);
  }
  if (root.contains("bundles")) {
    const json& c = root["bundles"];
    r.check_keys(c, "$.bundles", {"iterations", "tol", "grid"});
    cfg.bundles.iterations = c.value("iterations", cfg.bundles.iterations);
    cfg.bundles.tol = c.value("tol", cfg.bundles.tol);
    if (c.contains("grid"))
      cfg.bundles.grid =
          detail::read_ivec(r, c["grid"], "$.bundles.grid", cfg.k + cfg.d);
  }
  if (root.contains("conjugate")) {
    const json& c = root["conjugate"];
    r.check_keys(c, "$.conjugate",
                 {"tol", "grid", "verify_samples", "injectivity_fibres",
                  "injectivity_pairs"});
    cfg.conjugate.tol = c.value("tol", cfg.conjugate.tol);
    if (!(cfg.conjugate.tol > 0.0)) r.fail("$.conjugate.tol", "must be > 0");
    cfg.conjugate.verify_samples =
        c.value("verify_samples", cfg.conjugate.verify_samples);
    cfg.conjugate.injectivity_fibres =
        c.value("injectivity_fibres", cfg.conjugate.injectivity_fibres);
    cfg.conjugate.injectivity_pairs =
        c.value("injectivity_pairs", cfg.conjugate.injectivity_pairs);
    if (c.contains("grid"))
      cfg.conjugate.grid =
          detail::read_ivec(r, c["grid"], "$.conjugate.grid", cfg.k + cfg.d);
  }
  if (root.contains("leaves")) {
    const json& c = root["leaves"];
    r.check_keys(c, "$.leaves", {"window", "depth", "mesh", "fibres", "pairs"});
    cfg.leaves.window = c.value("window", cfg.leaves.window);
    cfg.leaves.depth = c.value("depth", cfg.leaves.depth);
    cfg.leaves.mesh = c.value("mesh", cfg.leaves.mesh);
    cfg.leaves.fibres = c.value("fibres", cfg.leaves.fibres);
    cfg.leaves.pairs = c.value("pairs", cfg.leaves.pairs);
    if (!(cfg.leaves.window > 0.0 && cfg.leaves.window <= 10.0))
      r.fail("$.leaves.window", "must lie in (0, 10]");
  }
  if (root.contains("sweep")) {
    const json& c = root["sweep"];
    r.check_keys(c, "$.sweep", {"epsilons"});
    if (c.contains("epsilons")) {
      Vec eps = detail::read_vec(r, c["epsilons"], "$.sweep.epsilons");
      for (int i = 0; i < eps.size(); ++i) {
        if (eps[i] <= 0.0) r.fail("$.sweep.epsilons", "entries must be > 0");
        cfg.sweep.epsilons.push_back(eps[i]);
      }
    }
  }

  if (!r.errors.empty()) throw ConfigError(std::move(r.errors));

  // the constructor re-checks the cross-field invariants exactly
  try {
    cfg.build_system();
  } catch (const std::exception& e) {
    throw ConfigError({std::string("$.system: ") + e.what()});
  }
  return cfg;
}

}  // namespace fwa
