#include "fwa/base_system.hpp"
#include "fwa/integer_matrix.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace fwa;

namespace {

// random element of GL(d,Z) from a product of elementary shears and swaps
IMat random_unimodular(int d, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> idx(0, d - 1);
  std::uniform_int_distribution<int> shear(-2, 2);
  IMat M = IMat::Identity(d, d);
  for (int t = 0; t < 12; ++t) {
    int i = idx(rng), j = idx(rng);
    if (i == j) continue;
    IMat E = IMat::Identity(d, d);
    E(i, j) = shear(rng);
    M = M * E;
    if (t % 5 == 0) {
      IMat P = IMat::Identity(d, d);
      P.row(i).swap(P.row(j));
      M = M * P;
    }
  }
  return M;
}

}  // namespace

TEST_CASE("determinant: hand values") {
  IMat A(2, 2);
  A << 2, 1, 1, 1;
  CHECK(determinant(A) == 1);
  IMat B(3, 3);
  B << 1, 1, 1, 0, 1, 1, 0, 1, 2;
  CHECK(determinant(B) == 1);
  IMat C(2, 2);
  C << 2, 0, 0, 1;
  CHECK(determinant(C) == 2);
  IMat D(3, 3);
  D << 0, 1, 0, 1, 0, 0, 0, 0, 1;  // needs the pivot swap
  CHECK(determinant(D) == -1);
  IMat S(2, 2);
  S << 2, 4, 1, 2;
  CHECK(determinant(S) == 0);
}

TEST_CASE("determinant agrees with floating point on random matrices") {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> entry(-4, 4);
  for (int t = 0; t < 200; ++t) {
    int d = 2 + static_cast<int>(t % 3);
    IMat A(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) A(i, j) = entry(rng);
    double fp = A.cast<double>().determinant();
    CHECK(static_cast<double>(determinant(A)) == Catch::Approx(fp).margin(0.4));
  }
}

TEST_CASE("determinant is multiplicative") {
  std::mt19937_64 rng(43);
  std::uniform_int_distribution<int> entry(-3, 3);
  for (int t = 0; t < 100; ++t) {
    IMat A(3, 3), B(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        A(i, j) = entry(rng);
        B(i, j) = entry(rng);
      }
    CHECK(determinant(IMat(A * B)) == determinant(A) * determinant(B));
  }
}

TEST_CASE("unimodular inverse is exact") {
  std::mt19937_64 rng(47);
  for (int t = 0; t < 100; ++t) {
    int d = 2 + t % 3;
    IMat A = random_unimodular(d, rng);
    REQUIRE(is_unimodular(A));
    IMat Ainv = unimodular_inverse(A);
    CHECK(IMat(A * Ainv) == IMat::Identity(d, d));
    CHECK(IMat(Ainv * A) == IMat::Identity(d, d));
  }
  IMat S(2, 2);
  S << 2, 0, 0, 1;
  CHECK_THROWS_AS(unimodular_inverse(S), std::invalid_argument);
}

TEST_CASE("base systems invert exactly on the torus") {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  IMat B(2, 2);
  B << 1, 1, 0, 1;
  Vec alpha(2);
  alpha << std::sqrt(2.0) - 1.0, 0.3;
  for (const BaseSystem& f :
       {BaseSystem::translation(alpha), BaseSystem::automorphism(B),
        BaseSystem::composite(B, alpha)}) {
    for (int t = 0; t < 100; ++t) {
      Vec c(2);
      c << unif(rng), unif(rng);
      TorusPoint b(c);
      CHECK(torus_distance(f.inverse(f.forward(b)), b) < 1e-12);
      CHECK(torus_distance(f.forward(f.inverse(b)), b) < 1e-12);
    }
  }
}

TEST_CASE("translation orbit matches the closed form") {
  Vec alpha(1);
  alpha << std::sqrt(2.0) - 1.0;
  BaseSystem f = BaseSystem::translation(alpha);
  TorusPoint b = TorusPoint::origin(1);
  for (int n = 1; n <= 50; ++n) {
    b = f.forward(b);
    CHECK(std::fabs(b[0] - mod1(n * alpha[0])) < 1e-12);
  }
}

TEST_CASE("non-unimodular base matrices are rejected") {
  IMat S(2, 2);
  S << 2, 0, 0, 1;
  CHECK_THROWS_AS(BaseSystem::automorphism(S), std::invalid_argument);
}
