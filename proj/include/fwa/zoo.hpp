#pragma once

// Bundled example systems used by the CLI demo and the test suites.

#include "fwa/system.hpp"

namespace fwa {
namespace zoo {

inline IMat cat_matrix() {
  IMat A(2, 2);
  A << 2, 1, 1, 1;
  return A;
}

// golden-mean-ish rotation number, well away from low-order rationals
inline double rotation_alpha() { return std::sqrt(2.0) - 1.0; }

inline TrigTerm term(std::initializer_list<int> freq,
                     std::initializer_list<double> cos_coef,
                     std::initializer_list<double> sin_coef) {
  TrigTerm t;
  t.freq = IVec(static_cast<int>(freq.size()));
  int i = 0;
  for (int f : freq) t.freq[i++] = f;
  t.cos_coef = Vec(static_cast<int>(cos_coef.size()));
  i = 0;
  for (double c : cos_coef) t.cos_coef[i++] = c;
  t.sin_coef = Vec(static_cast<int>(sin_coef.size()));
  i = 0;
  for (double s : sin_coef) t.sin_coef[i++] = s;
  return t;
}

// The acceptance fixture: perturbed cat map over an irrational rotation,
// fibre lift A x + (eps sin(2 pi x_1), 0).
inline FibrewiseSystem cat_over_rotation(double eps) {
  Vec alpha(1);
  alpha << rotation_alpha();
  TrigPolynomial p(3, 2);
  if (eps != 0.0) p.add_term(term({0, 1, 0}, {0.0, 0.0}, {eps, 0.0}));
  return FibrewiseSystem(BaseSystem::translation(alpha), cat_matrix(),
                         TrigPolynomial::zero(1, 2), p);
}

// Perturbation variants over the cat map, all with sup norm <= eps and
// the same induced homology.
inline std::vector<TrigPolynomial> cat_perturbation_zoo(double eps) {
  std::vector<TrigPolynomial> zoo;
  {
    TrigPolynomial p(3, 2);
    p.add_term(term({0, 1, 0}, {0.0, 0.0}, {eps, 0.0}));
    zoo.push_back(p);
  }
  {
    TrigPolynomial p(3, 2);
    p.add_term(term({0, 0, 1}, {0.0, eps}, {0.0, 0.0}));
    zoo.push_back(p);
  }
  {
    TrigPolynomial p(3, 2);
    p.add_term(term({0, 1, 1}, {0.0, 0.0}, {0.6 * eps, 0.8 * eps}));
    zoo.push_back(p);
  }
  {
    // base-dependent perturbation
    TrigPolynomial p(3, 2);
    p.add_term(term({1, 1, 0}, {0.0, 0.0}, {0.0, eps}));
    zoo.push_back(p);
  }
  {
    TrigPolynomial p(3, 2);
    p.add_term(term({0, 1, 0}, {0.0, 0.0}, {0.5 * eps, 0.0}));
    p.add_term(term({1, 0, 1}, {0.0, 0.5 * eps}, {0.0, 0.0}));
    zoo.push_back(p);
  }
  return zoo;
}

inline FibrewiseSystem cat_with_perturbation(const TrigPolynomial& p) {
  Vec alpha(1);
  alpha << rotation_alpha();
  return FibrewiseSystem(BaseSystem::translation(alpha), cat_matrix(),
                         TrigPolynomial::zero(1, 2), p);
}

// Constant-shift system: fibre lift A x + c against the model with v = 0;
// the conjugacy is the constant translation (A - I)^{-1} c.
inline FibrewiseSystem constant_shift(const Vec& c) {
  Vec alpha(1);
  alpha << rotation_alpha();
  TrigPolynomial p(3, 2);
  IVec zero_freq = IVec::Zero(3);
  p.add_term(TrigTerm{zero_freq, c, Vec::Zero(2)});
  return FibrewiseSystem(BaseSystem::translation(alpha), cat_matrix(),
                         TrigPolynomial::zero(1, 2), p);
}

// d = 3 affine example; the matrix is unimodular but not hyperbolic
// (eigenvalue 1), so it only feeds the homology extraction.
inline FibrewiseSystem affine_d3() {
  IMat B(3, 3);
  B << 1, 1, 1, 0, 1, 1, 0, 1, 2;
  Vec alpha(1);
  alpha << rotation_alpha();
  TrigPolynomial v(1, 3);
  v.add_term(term({1}, {0.0, 0.0, 0.0}, {0.1, 0.0, 0.0}));
  return FibrewiseSystem(BaseSystem::translation(alpha), B, v,
                         TrigPolynomial::zero(4, 3));
}

// d = 4 block system (cat + cat): stable and unstable are both planes.
inline FibrewiseSystem block_cat(double eps) {
  IMat A = IMat::Zero(4, 4);
  A.topLeftCorner(2, 2) = cat_matrix();
  A.bottomRightCorner(2, 2) = cat_matrix();
  Vec alpha(1);
  alpha << rotation_alpha();
  TrigPolynomial p(5, 4);
  if (eps != 0.0)
    p.add_term(term({0, 1, 0, 0, 0}, {0.0, 0.0, 0.0, 0.0},
                    {eps, 0.0, 0.0, 0.0}));
  return FibrewiseSystem(BaseSystem::translation(alpha), A,
                         TrigPolynomial::zero(1, 4), p);
}

}  // namespace zoo
}  // namespace fwa
