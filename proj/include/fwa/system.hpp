#pragma once

// The fibrewise system F(b,x) = (f(b), F_b(x)) specified through its
// equivariant lift  F_b(x) = A x + v(b) + p(b,x)  with p a trigonometric
// polynomial in (b,x).  Equivariance F_b(x+m) = F_b(x) + A m is exact by
// construction, which makes the displacement r = F - G globally defined
// on lifts.

#include "fwa/linear.hpp"

#include <cstdint>
#include <random>

namespace fwa {

class FibrewiseSystem {
public:
  FibrewiseSystem(BaseSystem base, IMat matrix, TrigPolynomial v,
                  TrigPolynomial perturbation)
      : base_(std::move(base)),
        matrix_(std::move(matrix)),
        v_(std::move(v)),
        perturbation_(std::move(perturbation)) {
    const int k = base_.dim();
    const int d = static_cast<int>(matrix_.rows());
    if (!is_unimodular(matrix_))
      throw std::invalid_argument("FibrewiseSystem: |det A| != 1");
    if (v_.dim_in() != k || v_.dim_out() != d)
      throw std::invalid_argument("FibrewiseSystem: v dimensions");
    if (perturbation_.dim_in() != k + d || perturbation_.dim_out() != d)
      throw std::invalid_argument("FibrewiseSystem: perturbation dimensions");
    matrix_inverse_ = unimodular_inverse(matrix_);
    sup_p_ = perturbation_.sup_bound();
    lip_p_ = perturbation_.lipschitz_bound();
  }

  const BaseSystem& base() const { return base_; }
  const IMat& matrix() const { return matrix_; }
  const IMat& matrix_inverse() const { return matrix_inverse_; }
  const TrigPolynomial& translation() const { return v_; }
  const TrigPolynomial& perturbation() const { return perturbation_; }
  int base_dim() const { return base_.dim(); }
  int fibre_dim() const { return static_cast<int>(matrix_.rows()); }
  double perturbation_sup() const { return sup_p_; }
  double perturbation_lipschitz() const { return lip_p_; }

  bool is_affine() const { return perturbation_.is_zero(); }

  AffineModel affine_model() const { return AffineModel(matrix_, v_, base_); }

  // Lift of the fibre map over b.
  Lift fibre_lift(const TorusPoint& b, const Lift& x) const {
    Vec bx(base_dim() + fibre_dim());
    bx << b.lift(), x;
    return matrix_.cast<double>() * x + v_.eval(b.lift()) +
           perturbation_.eval(bx);
  }

  // d/dx of the fibre lift: A + d_x p(b,x).
  Mat fibre_jacobian(const TorusPoint& b, const Lift& x) const {
    Mat J = matrix_.cast<double>();
    if (!perturbation_.is_zero()) {
      Vec bx(base_dim() + fibre_dim());
      bx << b.lift(), x;
      J += perturbation_.jacobian(bx).rightCols(fibre_dim());
    }
    return J;
  }

  BundlePoint evaluate(const BundlePoint& e) const {
    if (e.base.dim() != base_dim() || e.fibre.dim() != fibre_dim())
      throw std::invalid_argument("evaluate: dimension mismatch");
    return BundlePoint{base_.forward(e.base),
                       project(fibre_lift(e.base, e.fibre.lift()))};
  }

  // Solve F_b(x) = y on lifts by damped Newton from the affine guess.
  // Unique solution by global invertibility of the fibre lift.
  Lift invert_fibre(const TorusPoint& b, const Lift& y, double tol = 1e-12) const {
    if (tol <= 0.0) throw std::invalid_argument("invert_fibre: tol <= 0");
    Lift x = matrix_inverse_.cast<double>() * (y - v_.eval(b.lift()));
    if (is_affine()) return x;
    double res = (fibre_lift(b, x) - y).norm();
    for (int it = 0; it < 100; ++it) {
      if (res <= tol) return x;
      Vec g = fibre_lift(b, x) - y;
      Lift step = fibre_jacobian(b, x).lu().solve(g);
      double damping = 1.0;
      while (true) {
        Lift xn = x - damping * step;
        double rn = (fibre_lift(b, xn) - y).norm();
        if (rn < res || damping < 1.0 / 1024.0) {
          x = xn;
          res = rn;
          break;
        }
        damping *= 0.5;  // residual did not decrease
      }
    }
    if (res <= tol) return x;
    throw std::runtime_error(
        "invert_fibre: Newton failed to converge; perturbation too large "
        "relative to A");
  }

  BundlePoint evaluate_inverse(const BundlePoint& e, double tol = 1e-12) const {
    TorusPoint b_prev = base_.inverse(e.base);
    Lift x = invert_fibre(b_prev, e.fibre.lift(), tol);
    return BundlePoint{b_prev, project(x)};
  }

private:
  BaseSystem base_;
  IMat matrix_;
  IMat matrix_inverse_;
  TrigPolynomial v_;
  TrigPolynomial perturbation_;
  double sup_p_ = 0.0;
  double lip_p_ = 0.0;
};

// Extracts the induced matrix on H_1(T^d) from any equivariant lift: the
// j-th column is F_b(x0 + e_j) - F_b(x0), which must be integral and
// independent of (b, x0).  Works for black-box lifts, not only
// FibrewiseSystem.
template <typename LiftMap>
IMat induced_homology_matrix(const LiftMap& lift_map, int base_dim,
                             int fibre_dim, int samples = 10,
                             std::uint64_t seed = 7) {
  const int d = fibre_dim;
  IMat A(d, d);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  bool first = true;
  for (int s = 0; s < samples; ++s) {
    Vec bc(base_dim), xc(d);
    for (int i = 0; i < base_dim; ++i) bc[i] = unif(rng);
    for (int i = 0; i < d; ++i) xc[i] = unif(rng);
    TorusPoint b(bc);
    Lift f0 = lift_map(b, xc);
    for (int j = 0; j < d; ++j) {
      Lift xj = xc;
      xj[j] += 1.0;
      Vec col = lift_map(b, xj) - f0;
      for (int i = 0; i < d; ++i) {
        long r = std::lround(col[i]);
        if (std::fabs(col[i] - r) > 0.25)
          throw std::runtime_error(
              "induced_homology_matrix: lift displacement is not integral; "
              "input is not an equivariant torus-map lift");
        if (first) {
          A(i, j) = static_cast<int>(r);
        } else if (A(i, j) != r) {
          throw std::runtime_error(
              "induced_homology_matrix: displacement varies across samples");
        }
      }
    }
    first = false;
  }
  return A;
}

inline IMat induced_homology_matrix(const FibrewiseSystem& F,
                                    int samples = 10, std::uint64_t seed = 7) {
  return induced_homology_matrix(
      [&F](const TorusPoint& b, const Lift& x) { return F.fibre_lift(b, x); },
      F.base_dim(), F.fibre_dim(), samples, seed);
}

// The lifted displacement r(b,x) = F_b(x) - A x - v(b) relative to the
// affine model with the same A and v, together with a certified sup bound.
class DisplacementField {
public:
  explicit DisplacementField(const FibrewiseSystem& F) : F_(&F) {}

  Vec eval(const TorusPoint& b, const Lift& x) const {
    return F_->fibre_lift(b, x) - F_->matrix().cast<double>() * x -
           F_->translation().eval(b.lift());
  }

  Vec eval(const BundlePoint& e) const {
    return eval(e.base, e.fibre.lift());
  }

  // Grid max plus Lipschitz refinement margin: an upper bound for the
  // true sup over all of E, not just the sampled points.
  double sup_bound(const Grid& grid) const {
    if (grid.dim() != F_->base_dim() + F_->fibre_dim())
      throw std::invalid_argument("DisplacementField: grid dimension");
    const int k = F_->base_dim();
    double m = 0.0;
    for (std::int64_t i = 0; i < grid.size(); ++i) {
      TorusPoint p = grid.point(i);
      TorusPoint b(p.coords().head(k));
      Lift x = p.coords().tail(F_->fibre_dim());
      m = std::max(m, eval(b, x).norm());
    }
    return m + lipschitz_bound() * grid.mesh_radius();
  }

  // r equals the perturbation term of the lift, so its Lipschitz constant
  // is certified from the trig coefficients.
  double lipschitz_bound() const {
    return F_->perturbation().lipschitz_bound();
  }

private:
  const FibrewiseSystem* F_;
};

}  // namespace fwa
