#pragma once

// Command pipelines behind the CLI.  Each command maps a parsed config and
// a seed to a deterministic JSON report plus optional CSV artefacts; the
// exit code is 0 for a passing verdict and 3 for a failing one.  Reports
// carry no timestamps or timing so identical inputs give identical bytes.

#include "fwa/config.hpp"
#include "fwa/cones.hpp"
#include "fwa/conjugacy.hpp"
#include "fwa/leaves.hpp"

#include <cstdio>
#include <map>
#include <numbers>
#include <string>

namespace fwa {

struct RunResult {
  json report;
  int exit_code = 0;
  std::map<std::string, std::string> csv_files;
};

namespace detail {

inline std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline json to_json(const IMat& M) {
  json rows = json::array();
  for (int i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(row);
  }
  return rows;
}

inline json to_json(const Mat& M) {
  json rows = json::array();
  for (int i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(row);
  }
  return rows;
}

inline json to_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline json to_json(const IVec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline std::uint64_t stage_seed(std::uint64_t seed, std::uint64_t stage) {
  std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * (stage + 1)));
  return rng();
}

}  // namespace detail

// --- homology ----------------------------------------------------------

inline RunResult run_homology(const SystemConfig& cfg, std::uint64_t seed) {
  FibrewiseSystem F = cfg.build_system();
  IMat H = induced_homology_matrix(F, 10, detail::stage_seed(seed, 0));
  auto witness = is_hyperbolic(H);

  RunResult out;
  out.report["command"] = "homology";
  out.report["matrix"] = detail::to_json(H);
  out.report["matches_model"] = (H == cfg.A);
  out.report["determinant"] = determinant(H);
  out.report["unimodular"] = is_unimodular(H);
  json eig = json::array();
  for (const auto& mu : witness.eigenvalues) {
    eig.push_back({{"re", mu.real()}, {"im", mu.imag()}});
  }
  out.report["eigenvalues"] = eig;
  out.report["hyperbolic"] = witness.hyperbolic;
  out.report["unit_circle_gap"] = witness.unit_circle_gap;
  bool pass = (H == cfg.A) && is_unimodular(H);
  out.report["verdict"] = pass ? "PASS" : "FAIL";
  out.exit_code = pass ? 0 : 3;
  return out;
}

// --- certify -----------------------------------------------------------

inline json certificate_to_json(const ConeCertificate& cert) {
  json j;
  j["gamma"] = cert.gamma;
  j["steps"] = cert.steps;
  j["grid_resolution"] = detail::to_json(cert.grid_resolution);
  j["lambda_prime"] = cert.lambda_prime;
  j["margin"] = cert.margin;
  j["min_expansion"] = cert.min_expansion;
  j["mesh_inflation"] = cert.mesh_inflation;
  j["stable_dim"] = cert.stable_dim;
  j["frame"] = detail::to_json(cert.frame);
  j["pass"] = cert.pass;
  if (!cert.failures.empty()) {
    json fs = json::array();
    for (const auto& f : cert.failures)
      fs.push_back({{"grid_index", f.grid_index},
                    {"margin_unstable", f.margin_unstable},
                    {"margin_stable", f.margin_stable}});
    j["failures"] = fs;
  }
  return j;
}

inline RunResult run_certify(const SystemConfig& cfg, std::uint64_t) {
  FibrewiseSystem F = cfg.build_system();
  HyperbolicSplitting split = compute_splitting(F.matrix());
  ConeField cones = ConeField::from_splitting(split, cfg.certify.gamma);
  Grid grid(cfg.certify.grid);
  ConeCertificate cert =
      check_cone_invariance(F, cones, cfg.certify.steps, grid);

  RunResult out;
  out.report["command"] = "certify";
  out.report["splitting"] = {{"lambda", split.lambda},
                             {"growth_constant", split.growth_constant},
                             {"stable_dim", split.stable_dim}};
  out.report["certificate"] = certificate_to_json(cert);
  out.report["verdict"] = cert.pass ? "PASS" : "FAIL";
  out.exit_code = cert.pass ? 0 : 3;
  return out;
}

// --- conjugate ---------------------------------------------------------

inline json conjugacy_to_json(const ConjugacyResult& res,
                              const VerificationReport& ver,
                              const InjectivityReport& inj) {
  json j;
  j["truncation"] = res.parameters.truncation;
  j["tol"] = res.parameters.tol;
  j["tail_bound"] = res.parameters.tail_bound;
  j["grid_resolution"] = detail::to_json(res.grid_resolution);
  j["cohomology_residual"] = {{"max", res.cohomology_residual.max},
                              {"mean", res.cohomology_residual.mean}};
  j["conjugacy_residual"] = {{"max", res.conjugacy_residual.max},
                             {"mean", res.conjugacy_residual.mean}};
  j["degree_error"] = res.degree_error;
  j["periodicity_error"] = res.periodicity_error;
  j["degree_check"] = res.degree_check;
  j["verification"] = {{"samples", ver.samples},
                       {"max_residual", ver.max_residual},
                       {"threshold", ver.threshold},
                       {"pass", ver.pass}};
  j["injectivity"] = {{"min_ratio", inj.min_ratio},
                      {"min_separation", inj.min_separation},
                      {"delta0", inj.delta0},
                      {"fibres", inj.fibres},
                      {"pairs", inj.pairs}};
  return j;
}

inline std::string w_field_csv(const SystemConfig& cfg, const Grid& grid,
                               const ConjugacyResult& res) {
  std::string csv;
  for (int i = 0; i < cfg.k; ++i) csv += "b" + std::to_string(i) + ",";
  for (int i = 0; i < cfg.d; ++i) csv += "x" + std::to_string(i) + ",";
  for (int i = 0; i < cfg.d; ++i) {
    csv += "w" + std::to_string(i);
    csv += (i + 1 < cfg.d) ? "," : "\n";
  }
  for (std::int64_t idx = 0; idx < grid.size(); ++idx) {
    Vec p = grid.point(idx).coords();
    for (int i = 0; i < p.size(); ++i) csv += detail::fmt17(p[i]) + ",";
    const Vec& w = res.w_values[idx];
    for (int i = 0; i < w.size(); ++i) {
      csv += detail::fmt17(w[i]);
      csv += (i + 1 < w.size()) ? "," : "\n";
    }
  }
  return csv;
}

inline RunResult run_conjugate(const SystemConfig& cfg, std::uint64_t seed) {
  FibrewiseSystem F = cfg.build_system();
  AffineModel G = cfg.build_model();
  ConjugacyEngine engine(F, G, cfg.conjugate.tol);
  Grid grid(cfg.conjugate.grid);
  ConjugacyResult res =
      build_conjugacy(engine, grid, detail::stage_seed(seed, 1));
  VerificationReport ver = verify_conjugacy(engine, cfg.conjugate.verify_samples,
                                            detail::stage_seed(seed, 2));
  InjectivityReport inj =
      injectivity_scan(engine, cfg.conjugate.injectivity_fibres,
                       cfg.conjugate.injectivity_pairs,
                       detail::stage_seed(seed, 3));

  bool pass = ver.pass && res.degree_check && inj.min_ratio > 0.0 &&
              res.conjugacy_residual.max <=
                  std::max(4.0 * res.parameters.tail_bound, 1e-12);

  RunResult out;
  out.report["command"] = "conjugate";
  out.report["conjugacy"] = conjugacy_to_json(res, ver, inj);
  out.report["verdict"] = pass ? "PASS" : "FAIL";
  out.exit_code = pass ? 0 : 3;
  out.csv_files["w_field.csv"] = w_field_csv(cfg, grid, res);
  return out;
}

// --- leaves ------------------------------------------------------------

inline RunResult run_leaves(const SystemConfig& cfg, std::uint64_t seed) {
  FibrewiseSystem F = cfg.build_system();
  HyperbolicSplitting split = compute_splitting(F.matrix());
  ConeField cones = ConeField::from_splitting(split, cfg.certify.gamma);
  Grid cgrid(cfg.certify.grid);
  ConeCertificate cert =
      check_cone_invariance(F, cones, cfg.certify.steps, cgrid);

  RunResult out;
  out.report["command"] = "leaves";
  out.report["certificate"] = certificate_to_json(cert);
  if (!cert.pass) {
    out.report["verdict"] = "FAIL";
    out.report["reason"] = "cone certificate failed";
    out.exit_code = 3;
    return out;
  }

  const int d = F.fibre_dim();
  std::mt19937_64 rng(detail::stage_seed(seed, 4));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_real_distribution<double> off(-cfg.leaves.window / 4.0,
                                             cfg.leaves.window / 4.0);

  int pairs_total = 0, pairs_unique = 0;
  double min_angle = std::numbers::pi;
  double max_invariance = 0.0;
  double length_bound = 0.0;
  json samples = json::array();
  std::string csv = "pair,kind,";
  for (int i = 0; i < d; ++i) {
    csv += "p" + std::to_string(i);
    csv += (i + 1 < d) ? "," : "\n";
  }

  for (int fi = 0; fi < cfg.leaves.fibres; ++fi) {
    Vec bc(F.base_dim());
    for (int i = 0; i < bc.size(); ++i) bc[i] = unif(rng);
    TorusPoint b(bc);
    for (int pi = 0; pi < cfg.leaves.pairs; ++pi) {
      Lift xs(d);
      for (int i = 0; i < d; ++i) xs[i] = unif(rng);
      Vec shift(d);
      for (int i = 0; i < d; ++i) shift[i] = off(rng);
      Lift xu = xs + cert.frame * shift;

      LeafSegment Ws, Wu;
      IntersectionReport rep;
      ++pairs_total;
      try {
        Ws = compute_leaf(F, cert.frame, cert.stable_dim, cert.gamma, b, xs,
                          LeafKind::Stable, cfg.leaves.window,
                          cfg.leaves.depth, cfg.leaves.mesh);
        Wu = compute_leaf(F, cert.frame, cert.stable_dim, cert.gamma, b, xu,
                          LeafKind::Unstable, cfg.leaves.window,
                          cfg.leaves.depth, cfg.leaves.mesh);
        rep = find_intersections(Ws, Wu);
      } catch (const std::runtime_error&) {
        // graph transform left the window for this pair, counts against
        // the unique fraction
        continue;
      }
      if (rep.conclusive && rep.multiplicity == 1) ++pairs_unique;
      if (rep.conclusive)
        min_angle = std::min(min_angle, rep.min_crossing_angle);

      if (pairs_total == 1) {
        Ws.invariance_residual = leaf_invariance_residual(F, Ws);
        Wu.invariance_residual = leaf_invariance_residual(F, Wu);
        max_invariance =
            std::max(Ws.invariance_residual, Wu.invariance_residual);
        Vec lo = xs.array() - cfg.leaves.window / 2.0;
        Vec hi = xs.array() + cfg.leaves.window / 2.0;
        length_bound = leaf_distance_bound({Ws, Wu}, lo, hi);
        for (int i = 0; i < Ws.u_mesh.size(); ++i) {
          Lift p = Ws.point(i);
          csv += "1,stable,";
          for (int c = 0; c < d; ++c) {
            csv += detail::fmt17(p[c]);
            csv += (c + 1 < d) ? "," : "\n";
          }
        }
        for (int i = 0; i < Wu.u_mesh.size(); ++i) {
          Lift p = Wu.point(i);
          csv += "1,unstable,";
          for (int c = 0; c < d; ++c) {
            csv += detail::fmt17(p[c]);
            csv += (c + 1 < d) ? "," : "\n";
          }
        }
      }
      if (samples.size() < 10) {
        json s;
        s["base"] = detail::to_json(bc);
        s["multiplicity"] = rep.multiplicity;
        s["crossing_angle"] = rep.min_crossing_angle;
        if (!rep.points.empty())
          s["intersection"] = detail::to_json(rep.points.front());
        samples.push_back(s);
      }
    }
  }

  double frac = pairs_total > 0
                    ? static_cast<double>(pairs_unique) / pairs_total
                    : 0.0;
  bool pass = pairs_total > 0 && frac >= 0.95;
  out.report["pairs"] = pairs_total;
  out.report["unique_intersections"] = pairs_unique;
  out.report["unique_fraction"] = frac;
  out.report["min_crossing_angle"] = pairs_total > 0 ? min_angle : 0.0;
  out.report["max_invariance_residual"] = max_invariance;
  out.report["leaf_length_bound"] = length_bound;
  out.report["samples"] = samples;
  out.report["verdict"] = pass ? "PASS" : "FAIL";
  out.exit_code = pass ? 0 : 3;
  out.csv_files["leaf_points.csv"] = csv;
  return out;
}

// --- sweep -------------------------------------------------------------

inline RunResult run_sweep(const SystemConfig& cfg, std::uint64_t seed) {
  if (cfg.sweep.epsilons.empty())
    throw ConfigError({"$.sweep.epsilons: required for the sweep command"});
  if (cfg.perturbation.is_zero())
    throw ConfigError(
        {"$.system.perturbation: sweep needs a nonzero perturbation profile "
         "to scale"});

  RunResult out;
  out.report["command"] = "sweep";
  json runs = json::array();
  std::string csv =
      "epsilon,truncation,tail_bound,max_residual,threshold,"
      "injectivity_min_ratio,pass\n";
  bool all_pass = true;
  int stage = 10;
  for (double eps : cfg.sweep.epsilons) {
    FibrewiseSystem F(cfg.base, cfg.A, cfg.v, cfg.perturbation.scaled(eps));
    AffineModel G = cfg.build_model();
    ConjugacyEngine engine(F, G, cfg.conjugate.tol);
    VerificationReport ver =
        verify_conjugacy(engine, cfg.conjugate.verify_samples,
                         detail::stage_seed(seed, stage));
    InjectivityReport inj =
        injectivity_scan(engine, cfg.conjugate.injectivity_fibres,
                         cfg.conjugate.injectivity_pairs,
                         detail::stage_seed(seed, stage + 1));
    stage += 2;
    bool pass = ver.pass && inj.min_ratio > 0.0;
    all_pass = all_pass && pass;
    json r;
    r["epsilon"] = eps;
    r["truncation"] = engine.parameters().truncation;
    r["tail_bound"] = engine.parameters().tail_bound;
    r["displacement_sup"] = engine.displacement_sup();
    r["max_residual"] = ver.max_residual;
    r["threshold"] = ver.threshold;
    r["injectivity_min_ratio"] = inj.min_ratio;
    r["pass"] = pass;
    runs.push_back(r);
    csv += detail::fmt17(eps) + "," +
           std::to_string(engine.parameters().truncation) + "," +
           detail::fmt17(engine.parameters().tail_bound) + "," +
           detail::fmt17(ver.max_residual) + "," +
           detail::fmt17(ver.threshold) + "," +
           detail::fmt17(inj.min_ratio) + "," + (pass ? "1" : "0") + "\n";
  }
  out.report["runs"] = runs;
  out.report["verdict"] = all_pass ? "PASS" : "FAIL";
  out.exit_code = all_pass ? 0 : 3;
  out.csv_files["sweep.csv"] = csv;
  return out;
}

// --- demo --------------------------------------------------------------

inline RunResult run_demo(const SystemConfig& cfg, std::uint64_t seed) {
  RunResult homology = run_homology(cfg, seed);
  RunResult certify = run_certify(cfg, seed);
  RunResult conjugate = run_conjugate(cfg, seed);

  RunResult out;
  out.report["command"] = "demo";
  out.report["homology"] = homology.report;
  out.report["certify"] = certify.report;
  out.report["conjugate"] = conjugate.report;
  bool pass = homology.exit_code == 0 && certify.exit_code == 0 &&
              conjugate.exit_code == 0;
  out.report["verdict"] = pass ? "PASS" : "FAIL";
  out.exit_code = pass ? 0 : 3;
  out.csv_files = conjugate.csv_files;
  return out;
}

inline RunResult run_command(const std::string& command,
                             const SystemConfig& cfg, std::uint64_t seed) {
  if (command == "homology") return run_homology(cfg, seed);
  if (command == "certify") return run_certify(cfg, seed);
  if (command == "conjugate") return run_conjugate(cfg, seed);
  if (command == "leaves") return run_leaves(cfg, seed);
  if (command == "sweep") return run_sweep(cfg, seed);
  if (command == "demo") return run_demo(cfg, seed);
  throw std::invalid_argument("run_command: unknown command " + command);
}

}  // namespace fwa
