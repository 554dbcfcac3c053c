#pragma once

// Cone fields around the linear splitting, grid-certified cone invariance
// with contraction/expansion rates, and approximation of the invariant
// vertical bundles by iterated pushforward through the cones.
//
// A strict inequality at a grid point, with margin exceeding the Lipschitz
// variation of the step-N Jacobian over the surrounding cell, certifies
// the whole cell; the margins are Lipschitz-based, not rounding-rigorous.

#include "fwa/system.hpp"

#include <optional>
#include <vector>

namespace fwa {

// Reference frame shared by all grid points: orthonormal, first l columns
// approximately stable.  Cones of opening gamma are taken in these
// coordinates.
struct ConeField {
  Mat frame;          // d x d orthonormal
  double gamma = 0.0; // in (0,1)
  int stable_dim = 0;

  static ConeField from_splitting(const HyperbolicSplitting& split,
                                  double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0))
      throw std::invalid_argument("ConeField: gamma outside (0,1)");
    return ConeField{splitting_frame(split), gamma, split.stable_dim};
  }
};

struct ConeFailureWitness {
  std::int64_t grid_index = 0;
  double margin_unstable = 0.0;
  double margin_stable = 0.0;
};

struct ConeCertificate {
  double gamma = 0.0;
  int steps = 1;                 // N
  double lambda_prime = 1.0;     // worst N-th-root contraction rate
  IVec grid_resolution;
  double margin = 0.0;           // min slack of the strict inequalities
  double min_expansion = 0.0;    // worst unstable expansion per N steps
  double mesh_inflation = 0.0;   // Lipschitz x cell-radius term used
  bool pass = false;
  Mat frame;
  int stable_dim = 0;
  std::vector<ConeFailureWitness> failures;  // capped at 100
};

namespace detail {

inline double block_sigma_min(const Mat& M) {
  if (M.rows() == 0 || M.cols() == 0) return 0.0;
  auto sv = M.jacobiSvd().singularValues();
  return sv(sv.size() - 1);
}

// Lipschitz bound for e -> (N-step fibre Jacobian at e), from the chain
// rule: each factor is K-bounded, varies at rate L_dJ, and the orbit point
// moves at rate L_F^j.
inline double jacobian_chain_lipschitz(const FibrewiseSystem& F, int steps) {
  double K = F.matrix().cast<double>().norm() + F.perturbation_lipschitz();
  double L_dJ = F.perturbation().jacobian_lipschitz_bound();
  double L_F = F.base().matrix().cast<double>().norm() +
               F.translation().lipschitz_bound() + K;
  double sum = 0.0;
  double Kpow = std::pow(K, steps - 1);
  double Lpow = 1.0;
  for (int j = 0; j < steps; ++j) {
    sum += Kpow * L_dJ * Lpow;
    Lpow *= L_F;
  }
  return sum;
}

}  // namespace detail

inline ConeCertificate check_cone_invariance(const FibrewiseSystem& F,
                                             const ConeField& cones,
                                             int steps, const Grid& grid) {
  if (steps < 1)
    throw std::invalid_argument("check_cone_invariance: steps < 1");
  const int k = F.base_dim();
  const int d = F.fibre_dim();
  const int l = cones.stable_dim;
  if (grid.dim() != k + d)
    throw std::invalid_argument("check_cone_invariance: grid dimension");
  if (cones.frame.rows() != d)
    throw std::invalid_argument("check_cone_invariance: frame dimension");
  const double gamma = cones.gamma;
  const Mat& Q = cones.frame;

  ConeCertificate cert;
  cert.gamma = gamma;
  cert.steps = steps;
  cert.grid_resolution = grid.resolution();
  cert.frame = Q;
  cert.stable_dim = l;

  const double delta =
      detail::jacobian_chain_lipschitz(F, steps) * grid.mesh_radius();
  cert.mesh_inflation = delta;

  double worst_margin = std::numeric_limits<double>::infinity();
  double worst_contraction = 0.0;
  double worst_expansion = std::numeric_limits<double>::infinity();
  bool all_pass = true;

  for (std::int64_t idx = 0; idx < grid.size(); ++idx) {
    TorusPoint p = grid.point(idx);
    BundlePoint e{TorusPoint(p.coords().head(k)),
                  TorusPoint(p.coords().tail(d))};

    Mat J = Mat::Identity(d, d);
    BundlePoint cur = e;
    for (int j = 0; j < steps; ++j) {
      J = F.fibre_jacobian(cur.base, cur.fibre.lift()) * J;
      cur = F.evaluate(cur);
    }
    Mat Jf = Q.transpose() * J * Q;
    if (std::fabs(Jf.determinant()) < 1e-12)
      throw std::runtime_error("check_cone_invariance: singular Jacobian");
    Mat Kf = Jf.inverse();
    // inverse inflation: first-order perturbation of the inverse
    double kn = detail::opnorm(Kf);
    double denom_inv = 1.0 - kn * delta;
    double delta_inv = denom_inv > 0.0
                           ? kn * kn * delta / denom_inv
                           : std::numeric_limits<double>::infinity();

    auto Jss = Jf.topLeftCorner(l, l);
    auto Jsu = Jf.topRightCorner(l, d - l);
    auto Jus = Jf.bottomLeftCorner(d - l, l);
    auto Juu = Jf.bottomRightCorner(d - l, d - l);
    auto Kss = Kf.topLeftCorner(l, l);
    auto Ksu = Kf.topRightCorner(l, d - l);
    auto Kus = Kf.bottomLeftCorner(d - l, l);
    auto Kuu = Kf.bottomRightCorner(d - l, d - l);

    // forward invariance of the unstable cone, ||v_s|| <= gamma ||v_u||
    double denom_u = detail::block_sigma_min(Juu) - delta -
                     gamma * (detail::opnorm(Jus) + delta);
    double num_u = gamma * (detail::opnorm(Jss) + delta) +
                   detail::opnorm(Jsu) + delta;
    double margin_u = gamma * denom_u - num_u;
    if (denom_u <= 0.0) margin_u = -std::numeric_limits<double>::infinity();

    // backward invariance of the stable cone, via the inverse blocks
    double denom_s = detail::block_sigma_min(Kss) - delta_inv -
                     gamma * (detail::opnorm(Ksu) + delta_inv);
    double num_s = gamma * (detail::opnorm(Kuu) + delta_inv) +
                   detail::opnorm(Kus) + delta_inv;
    double margin_s = gamma * denom_s - num_s;
    if (denom_s <= 0.0) margin_s = -std::numeric_limits<double>::infinity();

    double margin = std::min(margin_u, margin_s);
    worst_margin = std::min(worst_margin, margin);
    if (!(margin > 0.0)) {
      all_pass = false;
      if (cert.failures.size() < 100)
        cert.failures.push_back({idx, margin_u, margin_s});
      continue;
    }

    // rates: stable-cone vectors whose image stays in the cone contract
    // by at most sqrt(1+gamma^2)/denom; unstable-cone vectors expand by
    // at least denom/sqrt(1+gamma^2)
    double cone_diag = std::sqrt(1.0 + gamma * gamma);
    double contr_s = cone_diag / denom_s;
    double contr_u = cone_diag / denom_u;
    worst_contraction = std::max(worst_contraction, std::max(contr_s, contr_u));
    worst_expansion = std::min(worst_expansion, denom_u / cone_diag);
  }

  cert.margin = worst_margin;
  cert.min_expansion = all_pass ? worst_expansion : 0.0;
  cert.lambda_prime =
      all_pass ? std::pow(worst_contraction, 1.0 / steps) : 1.0;
  cert.pass = all_pass && cert.lambda_prime < 1.0;
  return cert;
}

// --- invariant bundle approximation (power iteration through cones) ----

struct PointBundles {
  Mat stable;    // d x l, orthonormal
  Mat unstable;  // d x (d-l), orthonormal
  int iterations = 0;
  double gap = 0.0;  // principal-angle Cauchy gap at the last iterate
  bool converged = false;
};

// sin of the largest principal angle between equal-rank orthonormal frames
inline double principal_angle_gap(const Mat& Q1, const Mat& Q2) {
  if (Q1.cols() == 0) return 0.0;
  auto sv = (Q1.transpose() * Q2).jacobiSvd().singularValues();
  double smin = std::min(1.0, sv(sv.size() - 1));
  return std::sqrt(std::max(0.0, 1.0 - smin * smin));
}

namespace detail {

inline Mat orthonormalize(const Mat& M) {
  Eigen::HouseholderQR<Mat> qr(M);
  return Mat(qr.householderQ() * Mat::Identity(M.rows(), M.cols()));
}

}  // namespace detail

inline PointBundles invariant_bundles_at(const FibrewiseSystem& F,
                                         const Mat& frame, int stable_dim,
                                         const BundlePoint& e, int max_iter,
                                         double tol,
                                         double newton_tol = 1e-13) {
  const int d = F.fibre_dim();
  const int l = stable_dim;
  Mat U0 = frame.rightCols(d - l);
  Mat S0 = frame.leftCols(l);

  PointBundles out;
  out.stable = S0;
  out.unstable = U0;

  // backward orbit Jacobian product, accumulated left-to-right so that
  // depth-i bundles come from the last i Jacobians
  Mat Mu = Mat::Identity(d, d);  // J(e_{-1}) ... J(e_{-i})
  Mat Ms = Mat::Identity(d, d);  // Jinv(e_0) ... Jinv(e_{i-1})
  BundlePoint back = e;
  BundlePoint fwd = e;
  double gap_u = 1.0, gap_s = 1.0;
  for (int i = 1; i <= max_iter; ++i) {
    back = F.evaluate_inverse(back, newton_tol);
    Mu = Mu * F.fibre_jacobian(back.base, back.fibre.lift());
    Mu /= Mu.cwiseAbs().maxCoeff();  // scale guard, span-preserving

    Ms = Ms * F.fibre_jacobian(fwd.base, fwd.fibre.lift()).inverse();
    Ms /= Ms.cwiseAbs().maxCoeff();
    fwd = F.evaluate(fwd);

    Mat Unew = detail::orthonormalize(Mu * U0);
    Mat Snew = detail::orthonormalize(Ms * S0);
    gap_u = principal_angle_gap(out.unstable, Unew);
    gap_s = principal_angle_gap(out.stable, Snew);
    out.unstable = Unew;
    out.stable = Snew;
    out.iterations = i;
    if (i > 1 && gap_u < tol && gap_s < tol) {
      out.converged = true;
      break;
    }
  }
  out.gap = std::max(gap_u, gap_s);
  return out;
}

struct BundleApproximation {
  std::vector<PointBundles> points;  // in grid enumeration order
  IVec grid_resolution;
  double max_gap = 0.0;
  bool converged = false;  // degraded if any point missed tol
};

inline BundleApproximation approximate_invariant_bundles(
    const FibrewiseSystem& F, const ConeCertificate& cert, const Grid& grid,
    int iterations, double tol) {
  if (!cert.pass)
    throw std::invalid_argument(
        "approximate_invariant_bundles: certificate did not pass");
  const int k = F.base_dim();
  const int d = F.fibre_dim();
  BundleApproximation out;
  out.grid_resolution = grid.resolution();
  out.converged = true;
  for (std::int64_t idx = 0; idx < grid.size(); ++idx) {
    TorusPoint p = grid.point(idx);
    BundlePoint e{TorusPoint(p.coords().head(k)),
                  TorusPoint(p.coords().tail(d))};
    PointBundles pb = invariant_bundles_at(F, cert.frame, cert.stable_dim, e,
                                           iterations, tol);
    out.max_gap = std::max(out.max_gap, pb.gap);
    out.converged = out.converged && pb.converged;
    out.points.push_back(std::move(pb));
  }
  return out;
}

}  // namespace fwa
