#pragma once

// Hyperbolic matrices A in GL(d,Z): eigenvalue-modulus hyperbolicity test,
// the spectral splitting R^d = E^s + E^u with projectors and certified
// rates, and the fibrewise affine model G(b,x) = (f(b), A x + v(b)).

#include "fwa/base_system.hpp"
#include "fwa/integer_matrix.hpp"
#include "fwa/trig.hpp"

#include <complex>

namespace fwa {

struct HyperbolicityWitness {
  bool hyperbolic = false;
  // min over eigenvalues mu of | |mu| - 1 |.
  double unit_circle_gap = 0.0;
  std::vector<std::complex<double>> eigenvalues;
};

inline HyperbolicityWitness is_hyperbolic(const IMat& A, double tol = 1e-9) {
  if (A.rows() != A.cols())
    throw std::invalid_argument("is_hyperbolic: matrix not square");
  if (tol <= 0.0) throw std::invalid_argument("is_hyperbolic: tol <= 0");
  Eigen::EigenSolver<Mat> es(A.cast<double>());
  if (es.info() != Eigen::Success)
    throw std::runtime_error("is_hyperbolic: eigenvalue solver failed");
  HyperbolicityWitness w;
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    std::complex<double> mu = es.eigenvalues()[i];
    w.eigenvalues.push_back(mu);
    gap = std::min(gap, std::fabs(std::abs(mu) - 1.0));
  }
  w.unit_circle_gap = gap;
  w.hyperbolic = gap > tol;
  return w;
}

// Spectral splitting of a hyperbolic A.  The projectors commute with A;
// lambda bounds both the stable contraction of A and the unstable
// contraction of A^{-1}; C is a certified constant with
// ||A^n pi_s|| <= C lambda^n and ||A^{-n} pi_u|| <= C lambda^n for all n.
struct HyperbolicSplitting {
  Mat stable_projector;
  Mat unstable_projector;
  double lambda = 0.0;
  double growth_constant = 1.0;
  int stable_dim = 0;
};

namespace detail {

inline double opnorm(const Mat& M) {
  if (M.rows() == 0 || M.cols() == 0) return 0.0;
  return M.jacobiSvd().singularValues()(0);
}

// Orthonormal basis of the range of a projector of known rank.
inline Mat range_basis(const Mat& P, int rank) {
  Eigen::JacobiSVD<Mat> svd(P, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(rank);
}

// Condition number of the eigenvector matrix of A.  For diagonalizable
// A = V D V^{-1} it bounds every power: ||A^n pi_s|| <= kappa(V) rho_s^n,
// so kappa(V) serves as the growth constant C.
inline double eigenbasis_condition(const Mat& A) {
  Eigen::EigenSolver<Mat> es(A);
  Eigen::MatrixXcd V = es.eigenvectors();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(V);
  double smin = svd.singularValues()(svd.singularValues().size() - 1);
  if (smin < 1e-8 * svd.singularValues()(0))
    throw std::runtime_error(
        "eigenbasis_condition: matrix is numerically defective");
  double kappa = svd.singularValues()(0) / smin;
  // slack for the floating-point eigendecomposition
  return kappa * (1.0 + 1e-10);
}

}  // namespace detail

inline HyperbolicSplitting compute_splitting(const IMat& A, double tol = 1e-9) {
  auto witness = is_hyperbolic(A, tol);
  if (!witness.hyperbolic)
    throw std::invalid_argument("compute_splitting: matrix is not hyperbolic");
  const int d = static_cast<int>(A.rows());
  const Mat Ad = A.cast<double>();

  // Cayley transform maps the unit circle to the imaginary axis, so the
  // stable projector of A is the spectral projector of sign(B) onto the
  // left half plane.  Newton iteration on the matrix sign function is
  // robust for defective matrices, unlike an eigenvector route.
  Mat B = (Ad - Mat::Identity(d, d)).lu().solve(Ad + Mat::Identity(d, d));
  Mat S = B;
  for (int it = 0; it < 100; ++it) {
    Mat Snext = 0.5 * (S + S.inverse());
    double delta = (Snext - S).norm();
    S = Snext;
    if (delta < 1e-14 * std::max(1.0, S.norm())) break;
  }
  Mat P = 0.5 * (Mat::Identity(d, d) - S);
  // idempotency clean-up
  for (int it = 0; it < 3; ++it) P = 3.0 * P * P - 2.0 * P * P * P;

  HyperbolicSplitting split;
  split.stable_projector = P;
  split.unstable_projector = Mat::Identity(d, d) - P;
  split.stable_dim = static_cast<int>(std::lround(P.trace()));

  double stable_max = 0.0, unstable_invmax = 0.0;
  for (auto mu : witness.eigenvalues) {
    double m = std::abs(mu);
    if (m < 1.0)
      stable_max = std::max(stable_max, m);
    else
      unstable_invmax = std::max(unstable_invmax, 1.0 / m);
  }
  // additive safety margin keeps the certified inequalities strict
  split.lambda = std::max(stable_max, unstable_invmax) + 1e-12;

  split.growth_constant = std::max(1.0, detail::eigenbasis_condition(Ad));
  return split;
}

// Orthonormal frame whose first l columns span the stable subspace and the
// rest the unstable one.  Used as the reference frame for cone fields.
inline Mat splitting_frame(const HyperbolicSplitting& split) {
  const int d = static_cast<int>(split.stable_projector.rows());
  const int l = split.stable_dim;
  Mat frame(d, d);
  if (l > 0)
    frame.leftCols(l) = detail::range_basis(split.stable_projector, l);
  if (l < d)
    frame.rightCols(d - l) =
        detail::range_basis(split.unstable_projector, d - l);
  // one Gram-Schmidt pass: the two blocks are each orthonormal but not
  // orthogonal to each other unless A is normal
  Eigen::HouseholderQR<Mat> qr(frame);
  Mat Q = qr.householderQ() * Mat::Identity(d, d);
  // keep column signs aligned with the original frame
  Mat R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j)
    if (R(j, j) < 0) Q.col(j) = -Q.col(j);
  return Q;
}

// The affine model G(b,x) = (f(b), A x + v(b)) on the trivial bundle.
class AffineModel {
public:
  AffineModel(IMat matrix, TrigPolynomial v, BaseSystem base)
      : matrix_(std::move(matrix)), v_(std::move(v)), base_(std::move(base)) {
    if (!is_unimodular(matrix_))
      throw std::invalid_argument("AffineModel: |det A| != 1");
    if (v_.dim_in() != base_.dim() || v_.dim_out() != matrix_.rows())
      throw std::invalid_argument("AffineModel: translation dimensions");
  }

  const IMat& matrix() const { return matrix_; }
  const TrigPolynomial& translation() const { return v_; }
  const BaseSystem& base() const { return base_; }
  int fibre_dim() const { return static_cast<int>(matrix_.rows()); }

  Lift fibre_lift(const TorusPoint& b, const Lift& x) const {
    return matrix_.cast<double>() * x + v_.eval(b.lift());
  }

private:
  IMat matrix_;
  TrigPolynomial v_;
  BaseSystem base_;
};

inline BundlePoint apply_affine(const AffineModel& G, const BundlePoint& e) {
  if (e.base.dim() != G.base().dim() || e.fibre.dim() != G.fibre_dim())
    throw std::invalid_argument("apply_affine: dimension mismatch");
  return BundlePoint{G.base().forward(e.base),
                     project(G.fibre_lift(e.base, e.fibre.lift()))};
}

}  // namespace fwa
