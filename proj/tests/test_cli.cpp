#include "fwa/run.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace fwa;

namespace {

const char* kFixture = R"({
  "system": {
    "d": 2, "k": 1,
    "A": [[2, 1], [1, 1]],
    "base": {"kind": "translation", "alpha": [0.41421356237309515]},
    "perturbation": [{"freq": [0, 1, 0], "sin": [0.05, 0.0]}]
  },
  "certify": {"gamma": 0.5, "steps": 1, "grid": [4, 12, 12]},
  "conjugate": {
    "tol": 1e-6, "grid": [3, 4, 4],
    "verify_samples": 50, "injectivity_fibres": 3, "injectivity_pairs": 10
  },
  "leaves": {"window": 0.4, "depth": 20, "mesh": 101, "fibres": 2, "pairs": 2},
  "sweep": {"epsilons": [0.5, 1.0]}
})";

SystemConfig fixture() { return parse_config(kFixture); }

}  // namespace

TEST_CASE("homology command passes on the fixture") {
  RunResult r = run_homology(fixture(), 1);
  CHECK(r.exit_code == 0);
  CHECK(r.report["verdict"] == "PASS");
  CHECK(r.report["matches_model"] == true);
  CHECK(r.report["determinant"] == 1);
  CHECK(r.report["hyperbolic"] == true);
}

TEST_CASE("certify command passes on the fixture and reports the rate") {
  RunResult r = run_certify(fixture(), 1);
  CHECK(r.exit_code == 0);
  double lp = r.report["certificate"]["lambda_prime"].get<double>();
  CHECK(lp > 0.0);
  CHECK(lp < 0.574);
  CHECK(r.report["certificate"]["margin"].get<double>() > 0.0);
}

TEST_CASE("certify fails (exit 3) when the cones are broken") {
  SystemConfig cfg = fixture();
  cfg.perturbation = cfg.perturbation.scaled(40.0);  // gradient ~ 12 > A
  RunResult r = run_certify(cfg, 1);
  CHECK(r.exit_code == 3);
  CHECK(r.report["verdict"] == "FAIL");
  CHECK(r.report["certificate"].contains("failures"));
}

TEST_CASE("conjugate command passes and emits the w-field CSV") {
  RunResult r = run_conjugate(fixture(), 5);
  CHECK(r.exit_code == 0);
  const auto& c = r.report["conjugacy"];
  CHECK(c["verification"]["pass"] == true);
  CHECK(c["degree_check"] == true);
  CHECK(c["injectivity"]["min_ratio"].get<double>() > 0.0);
  REQUIRE(r.csv_files.count("w_field.csv") == 1);
  const std::string& csv = r.csv_files.at("w_field.csv");
  CHECK(csv.rfind("b0,x0,x1,w0,w1\n", 0) == 0);
  // one header plus one line per grid point
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 3 * 4 * 4);
}

TEST_CASE("leaves command finds unique intersections") {
  RunResult r = run_leaves(fixture(), 2);
  CHECK(r.exit_code == 0);
  CHECK(r.report["pairs"] == 4);
  CHECK(r.report["unique_fraction"].get<double>() >= 0.95);
  CHECK(r.report["min_crossing_angle"].get<double>() > 0.0);
  CHECK(r.csv_files.count("leaf_points.csv") == 1);
}

TEST_CASE("sweep scales the perturbation profile and verifies each run") {
  RunResult r = run_sweep(fixture(), 3);
  CHECK(r.exit_code == 0);
  REQUIRE(r.report["runs"].size() == 2);
  // the scaled sup bounds should track 0.05 * epsilon
  double m0 = r.report["runs"][0]["displacement_sup"].get<double>();
  double m1 = r.report["runs"][1]["displacement_sup"].get<double>();
  CHECK(m0 == Catch::Approx(0.025).epsilon(0.01));
  CHECK(m1 == Catch::Approx(0.05).epsilon(0.01));
  CHECK(r.csv_files.count("sweep.csv") == 1);
}

TEST_CASE("demo reports are byte-identical for identical config and seed") {
  RunResult a = run_demo(fixture(), 42);
  RunResult b = run_demo(fixture(), 42);
  CHECK(a.exit_code == 0);
  CHECK(a.report.dump(2) == b.report.dump(2));
  CHECK(a.csv_files == b.csv_files);
}

TEST_CASE("different seeds keep the verdict but may move sampled numbers") {
  RunResult a = run_conjugate(fixture(), 1);
  RunResult b = run_conjugate(fixture(), 2);
  CHECK(a.exit_code == 0);
  CHECK(b.exit_code == 0);
  // grid quantities are seed-independent
  CHECK(a.report["conjugacy"]["cohomology_residual"] ==
        b.report["conjugacy"]["cohomology_residual"]);
}

TEST_CASE("non-hyperbolic fibre matrix is a precondition error") {
  SystemConfig cfg = fixture();
  cfg.A = IMat::Identity(2, 2);
  cfg.perturbation = TrigPolynomial::zero(3, 2);
  CHECK_THROWS_AS(run_certify(cfg, 1), std::invalid_argument);
  CHECK_THROWS_AS(run_conjugate(cfg, 1), std::invalid_argument);
}

TEST_CASE("unknown command is rejected") {
  CHECK_THROWS_AS(run_command("frobnicate", fixture(), 1),
                  std::invalid_argument);
}
