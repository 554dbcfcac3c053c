#pragma once

// Points, lifts, deck vectors and uniform grids on flat tori T^k / T^d,
// and points of the trivial bundle B x T^d.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace fwa {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using IVec = Eigen::VectorXi;
using IMat = Eigen::MatrixXi;

// A lift is an unconstrained point of R^n (the universal cover).
using Lift = Eigen::VectorXd;

// Deck transformations are the integer translations of the cover.
using DeckVector = Eigen::VectorXi;

// Canonical representative in [0,1).  floor() handles negatives; the
// result can round to 1.0 for tiny negative inputs, which we fold back.
inline double mod1(double x) {
  double y = x - std::floor(x);
  return (y >= 1.0) ? y - 1.0 : y;
}

class TorusPoint {
public:
  TorusPoint() = default;

  explicit TorusPoint(Vec coords) : coords_(std::move(coords)) {
    for (Eigen::Index i = 0; i < coords_.size(); ++i) {
      if (!(coords_[i] >= 0.0 && coords_[i] < 1.0))
        throw std::invalid_argument("TorusPoint: coordinate outside [0,1)");
    }
  }

  static TorusPoint origin(int dim) { return TorusPoint(Vec::Zero(dim)); }

  int dim() const { return static_cast<int>(coords_.size()); }
  const Vec& coords() const { return coords_; }
  double operator[](int i) const { return coords_[i]; }

  // The canonical lift in the fundamental domain [0,1)^n.
  Lift lift() const { return coords_; }

private:
  Vec coords_;
};

// Covering projection R^n -> T^n, coordinate-wise mod 1.
inline TorusPoint project(const Lift& p) {
  Vec c(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) c[i] = mod1(p[i]);
  return TorusPoint(std::move(c));
}

// Flat quotient metric: min over deck vectors j of ||x - y + j||_2.
// The minimum is attained coordinate-wise, so no enumeration is needed.
inline double torus_distance(const TorusPoint& x, const TorusPoint& y) {
  if (x.dim() != y.dim())
    throw std::invalid_argument("torus_distance: dimension mismatch");
  double s = 0.0;
  for (int i = 0; i < x.dim(); ++i) {
    double d = std::fabs(x[i] - y[i]);
    d = std::min(d, 1.0 - d);
    s += d * d;
  }
  return std::sqrt(s);
}

// The principal T^d action, written additively.
inline TorusPoint translate(const TorusPoint& x, const TorusPoint& t) {
  if (x.dim() != t.dim())
    throw std::invalid_argument("translate: dimension mismatch");
  return project(x.coords() + t.coords());
}

inline TorusPoint negate(const TorusPoint& t) {
  return project(-t.coords());
}

// Point of the trivial bundle E = B x T^d.
struct BundlePoint {
  TorusPoint base;   // dim k
  TorusPoint fibre;  // dim d
};

// Uniform lattice with per-axis resolution.  Enumerates the
// prod(resolution) points {i_j / n_j} exactly once.
class Grid {
public:
  Grid(IVec resolution)
      : res_(std::move(resolution)) {
    if (res_.size() == 0) throw std::invalid_argument("Grid: empty resolution");
    total_ = 1;
    for (Eigen::Index i = 0; i < res_.size(); ++i) {
      if (res_[i] <= 0) throw std::invalid_argument("Grid: nonpositive resolution");
      total_ *= static_cast<std::int64_t>(res_[i]);
    }
  }

  int dim() const { return static_cast<int>(res_.size()); }
  const IVec& resolution() const { return res_; }
  std::int64_t size() const { return total_; }

  TorusPoint point(std::int64_t idx) const {
    Vec c(res_.size());
    for (Eigen::Index i = 0; i < res_.size(); ++i) {
      c[i] = static_cast<double>(idx % res_[i]) / res_[i];
      idx /= res_[i];
    }
    return TorusPoint(std::move(c));
  }

  // Half-diagonal of a grid cell: every point of the torus is within
  // this distance of some lattice point.
  double mesh_radius() const {
    double s = 0.0;
    for (Eigen::Index i = 0; i < res_.size(); ++i) {
      double h = 0.5 / res_[i];
      s += h * h;
    }
    return std::sqrt(s);
  }

private:
  IVec res_;
  std::int64_t total_;
};

}  // namespace fwa
