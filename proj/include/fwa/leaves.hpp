#pragma once

// Lifted stable/unstable leaves of the fibre dynamics on finite windows,
// computed by a windowed graph transform along orbits, plus the product
// structure probes: unique-intersection search and leaf-length bounds.
//
// Leaves are graphs over the reference line of the certificate frame with
// Lipschitz constant at most gamma, represented piecewise-linearly on a
// uniform parameter mesh.  Only one-dimensional leaf parameters are
// supported (l = 1 or d - l = 1), which covers every bundled system.

#include "fwa/system.hpp"

#include <algorithm>
#include <numbers>
#include <vector>

namespace fwa {

enum class LeafKind { Stable, Unstable };

struct LeafSegment {
  LeafKind kind = LeafKind::Unstable;
  TorusPoint base;
  Lift anchor;       // phi(0) = 0 is anchored here
  Mat frame;         // certificate frame Q
  int stable_dim = 0;
  double gamma = 0.0;
  double window = 0.0;   // R
  int depth = 0;
  Vec u_mesh;            // uniform, odd count, contains 0
  Mat phi;               // npts x (d-1), graph values in the complement
  double invariance_residual = -1.0;  // filled by leaf_invariance_residual

  int param_dim() const { return 1; }
  int codim() const { return static_cast<int>(phi.cols()); }

  // full frame coordinates (s-block first) of the sample at parameter u
  Vec frame_coords(double u, const Vec& phi_val) const {
    const int d = static_cast<int>(frame.rows());
    Vec c(d);
    if (kind == LeafKind::Unstable) {
      c.head(stable_dim) = phi_val;
      c[stable_dim] = u;  // d - l == 1
    } else {
      c[0] = u;  // l == 1
      c.tail(d - 1) = phi_val;
    }
    return c;
  }

  Lift point(int i) const {
    return anchor + frame * frame_coords(u_mesh[i], phi.row(i).transpose());
  }

  Lift point_at(double u) const {
    return anchor + frame * frame_coords(u, interpolate(u));
  }

  // piecewise-linear graph value; u must lie inside the window
  Vec interpolate(double u) const {
    const int n = static_cast<int>(u_mesh.size());
    if (u < u_mesh[0] - 1e-12 || u > u_mesh[n - 1] + 1e-12)
      throw std::out_of_range("LeafSegment: parameter outside window");
    double h = u_mesh[1] - u_mesh[0];
    int i = std::clamp(static_cast<int>((u - u_mesh[0]) / h), 0, n - 2);
    double t = std::clamp((u - u_mesh[i]) / h, 0.0, 1.0);
    return ((1.0 - t) * phi.row(i) + t * phi.row(i + 1)).transpose();
  }

  Vec slope_at(double u) const {
    const int n = static_cast<int>(u_mesh.size());
    double h = u_mesh[1] - u_mesh[0];
    int i = std::clamp(static_cast<int>((u - u_mesh[0]) / h), 0, n - 2);
    return ((phi.row(i + 1) - phi.row(i)) / h).transpose();
  }

  double max_chord_slope() const {
    double m = 0.0;
    for (int i = 0; i + 1 < u_mesh.size(); ++i)
      m = std::max(m, (phi.row(i + 1) - phi.row(i)).norm() /
                          (u_mesh[i + 1] - u_mesh[i]));
    return m;
  }
};

namespace detail {

// resample scattered graph samples (u_i, s_i) onto a uniform mesh; the
// u_i must be strictly increasing (cone condition along the leaf)
inline Mat resample_graph(const std::vector<double>& u,
                          const std::vector<Vec>& s, const Vec& mesh) {
  const int n = static_cast<int>(u.size());
  if (u.front() > mesh[0] || u.back() < mesh[mesh.size() - 1])
    throw std::runtime_error(
        "graph transform: image does not cover the window; increase depth "
        "or reduce the window");
  Mat out(mesh.size(), s.front().size());
  int j = 0;
  for (int i = 0; i < mesh.size(); ++i) {
    double x = mesh[i];
    while (j + 1 < n - 1 && u[j + 1] < x) ++j;
    double t = (x - u[j]) / (u[j + 1] - u[j]);
    t = std::clamp(t, 0.0, 1.0);
    out.row(i) = ((1.0 - t) * s[j] + t * s[j + 1]).transpose();
  }
  return out;
}

}  // namespace detail

inline LeafSegment compute_leaf(const FibrewiseSystem& F, const Mat& frame,
                                int stable_dim, double gamma,
                                const TorusPoint& b, const Lift& anchor,
                                LeafKind kind, double window, int depth,
                                int mesh_points = 201,
                                double newton_tol = 1e-13) {
  const int d = F.fibre_dim();
  const int l = stable_dim;
  if (window <= 0.0 || window > 10.0)
    throw std::invalid_argument("compute_leaf: window outside (0, 10]");
  if (depth < 1) throw std::invalid_argument("compute_leaf: depth < 1");
  if ((kind == LeafKind::Unstable && d - l != 1) ||
      (kind == LeafKind::Stable && l != 1))
    throw std::invalid_argument(
        "compute_leaf: leaf parameter must be one-dimensional");
  if (mesh_points % 2 == 0) ++mesh_points;  // keep u = 0 on the mesh

  LeafSegment leaf;
  leaf.kind = kind;
  leaf.base = b;
  leaf.frame = frame;
  leaf.stable_dim = l;
  leaf.gamma = gamma;
  leaf.window = window;
  leaf.depth = depth;
  leaf.u_mesh = Vec::LinSpaced(mesh_points, -window, window);

  // orbit of base points and anchor lifts; index 0 is the far end the
  // iteration starts from
  std::vector<TorusPoint> bases(depth + 1);
  std::vector<Lift> anchors(depth + 1);
  if (kind == LeafKind::Unstable) {
    bases[depth] = b;
    anchors[depth] = anchor;
    for (int j = depth; j > 0; --j) {
      bases[j - 1] = F.base().inverse(bases[j]);
      anchors[j - 1] = F.invert_fibre(bases[j - 1], anchors[j], newton_tol);
    }
  } else {
    bases[depth] = b;
    anchors[depth] = anchor;
    // forward orbit, stored reversed so the loop below runs 0 -> depth
    for (int j = depth; j > 0; --j) {
      bases[j - 1] = F.base().forward(bases[j]);
      anchors[j - 1] = F.fibre_lift(bases[j], anchors[j]);
    }
  }

  // start from the flat graph through the far anchor
  const int npts = mesh_points;
  std::vector<Lift> pts(npts);
  {
    LeafSegment seed = leaf;
    seed.anchor = anchors[0];
    seed.phi = Mat::Zero(npts, d - 1);
    for (int i = 0; i < npts; ++i) pts[i] = seed.point(i);
  }

  const int ublock = (kind == LeafKind::Unstable) ? l : 0;
  for (int j = 0; j < depth; ++j) {
    // map samples one orbit step toward b
    if (kind == LeafKind::Unstable) {
      for (auto& p : pts) p = F.fibre_lift(bases[j], p);
    } else {
      // stable: pull back from f(b_next) to b_next
      for (auto& p : pts) p = F.invert_fibre(bases[j + 1], p, newton_tol);
    }
    const Lift& a = anchors[j + 1];
    std::vector<double> u(npts);
    std::vector<Vec> s(npts);
    for (int i = 0; i < npts; ++i) {
      Vec xi = frame.transpose() * (pts[i] - a);
      u[i] = xi[ublock];
      if (kind == LeafKind::Unstable)
        s[i] = xi.head(l);
      else
        s[i] = xi.tail(d - 1);
    }
    for (int i = 0; i + 1 < npts; ++i)
      if (u[i + 1] <= u[i])
        throw std::runtime_error(
            "graph transform: leaf left the cone (non-monotone "
            "reparametrization); reduce gamma or the window");
    Mat phi = detail::resample_graph(u, s, leaf.u_mesh);
    // rebuild sample points on the uniform mesh
    LeafSegment stage = leaf;
    stage.anchor = a;
    stage.phi = phi;
    for (int i = 0; i < npts; ++i) pts[i] = stage.point(i);
    leaf.phi = std::move(phi);
  }
  leaf.anchor = anchors[depth];

  if (leaf.max_chord_slope() > gamma)
    throw std::runtime_error(
        "compute_leaf: graph slope exceeds the cone opening gamma");
  return leaf;
}

// Hausdorff-style one-step invariance defect: push the leaf at the orbit
// predecessor through F and compare graphs on the half window.
inline double leaf_invariance_residual(const FibrewiseSystem& F,
                                       const LeafSegment& leaf,
                                       double newton_tol = 1e-13) {
  const int d = F.fibre_dim();
  const int l = leaf.stable_dim;
  TorusPoint b_pre;
  Lift a_pre;
  if (leaf.kind == LeafKind::Unstable) {
    b_pre = F.base().inverse(leaf.base);
    a_pre = F.invert_fibre(b_pre, leaf.anchor, newton_tol);
  } else {
    b_pre = F.base().forward(leaf.base);
    a_pre = F.fibre_lift(leaf.base, leaf.anchor);
  }
  LeafSegment pre =
      compute_leaf(F, leaf.frame, l, leaf.gamma, b_pre, a_pre, leaf.kind,
                   leaf.window, leaf.depth,
                   static_cast<int>(leaf.u_mesh.size()), newton_tol);
  const int ublock = (leaf.kind == LeafKind::Unstable) ? l : 0;
  double worst = 0.0;
  for (int i = 0; i < pre.u_mesh.size(); ++i) {
    Lift p = pre.point(i);
    Lift q = (leaf.kind == LeafKind::Unstable)
                 ? F.fibre_lift(b_pre, p)
                 : F.invert_fibre(b_pre, p, newton_tol);
    Vec xi = leaf.frame.transpose() * (q - leaf.anchor);
    double u = xi[ublock];
    if (std::fabs(u) > leaf.window / 2.0) continue;
    Vec s = (leaf.kind == LeafKind::Unstable) ? Vec(xi.head(l))
                                              : Vec(xi.tail(d - 1));
    worst = std::max(worst, (s - leaf.interpolate(u)).norm());
  }
  return worst;
}

struct IntersectionReport {
  std::vector<Lift> points;
  int multiplicity = 0;
  double min_crossing_angle = 0.0;  // radians, over found intersections
  int starts = 0;
  int converged = 0;
  bool conclusive = false;  // false: nothing found inside the windows
};

// Unique-intersection search for a stable/unstable pair in the same fibre
// cover, by the contracting fixed-point iteration of the two graph
// equations (contraction factor <= gamma^2).
inline IntersectionReport find_intersections(const LeafSegment& Ws,
                                             const LeafSegment& Wu,
                                             double cluster_tol = 1e-8) {
  if (Ws.kind != LeafKind::Stable || Wu.kind != LeafKind::Unstable)
    throw std::invalid_argument("find_intersections: need a stable/unstable pair");
  if (torus_distance(Ws.base, Wu.base) > 1e-12)
    throw std::invalid_argument("find_intersections: leaves in different fibres");
  const int d = static_cast<int>(Ws.frame.rows());
  const int l = Ws.stable_dim;
  if (l != 1 || d - l != 1)
    throw std::invalid_argument("find_intersections: needs l = d - l = 1");
  const Mat& Q = Ws.frame;
  Vec delta = Q.transpose() * (Wu.anchor - Ws.anchor);

  IntersectionReport rep;
  const int stride = std::max(1, static_cast<int>(Wu.u_mesh.size()) / 16);
  for (int i0 = 0; i0 < Wu.u_mesh.size(); i0 += stride) {
    ++rep.starts;
    double u = Wu.u_mesh[i0];
    bool ok = true;
    for (int it = 0; it < 300; ++it) {
      double s, unew;
      try {
        s = delta[0] + Wu.interpolate(u)[0];       // s-coord on Wu at u
        unew = Ws.interpolate(s)[0] - delta[1];    // u-coord on Ws at s
      } catch (const std::out_of_range&) {
        ok = false;
        break;
      }
      double du = unew - u;
      u = unew;
      if (std::fabs(du) < 1e-13) break;
      if (it == 299) ok = false;
    }
    if (!ok) continue;
    ++rep.converged;
    double s = delta[0] + Wu.interpolate(u)[0];
    Lift p = Wu.point_at(u);
    // must lie on both leaves within mesh tolerance
    double on_s = (Ws.point_at(s) - p).norm();
    if (on_s > 1e-6) continue;
    bool fresh = true;
    for (const auto& q : rep.points)
      if ((q - p).norm() < cluster_tol) fresh = false;
    if (fresh) rep.points.push_back(p);
  }
  rep.multiplicity = static_cast<int>(rep.points.size());
  rep.conclusive = rep.multiplicity > 0;

  double min_angle = std::numbers::pi;
  for (const auto& p : rep.points) {
    Vec xi_u = Q.transpose() * (p - Wu.anchor);
    Vec xi_s = Q.transpose() * (p - Ws.anchor);
    Vec tu(2), ts(2);
    tu << Wu.slope_at(xi_u[l])[0], 1.0;
    ts << 1.0, Ws.slope_at(xi_s[0])[0];
    tu.normalize();
    ts.normalize();
    min_angle = std::min(min_angle, std::acos(std::clamp(
                                        std::fabs(tu.dot(ts)), 0.0, 1.0)));
  }
  rep.min_crossing_angle = rep.points.empty() ? 0.0 : min_angle;
  return rep;
}

// Max arc length of any sampled leaf inside the axis-aligned box [lo, hi],
// with segments clipped exactly to the box.
inline double leaf_distance_bound(const std::vector<LeafSegment>& leaves,
                                  const Vec& lo, const Vec& hi) {
  double bound = 0.0;
  for (const auto& leaf : leaves) {
    double len = 0.0;
    for (int i = 0; i + 1 < leaf.u_mesh.size(); ++i) {
      Lift p = leaf.point(i), q = leaf.point(i + 1);
      // Liang-Barsky clip of [p,q] to the box
      double t0 = 0.0, t1 = 1.0;
      bool reject = false;
      for (int c = 0; c < lo.size() && !reject; ++c) {
        double dir = q[c] - p[c];
        if (std::fabs(dir) < 1e-300) {
          if (p[c] < lo[c] || p[c] > hi[c]) reject = true;
          continue;
        }
        double ta = (lo[c] - p[c]) / dir;
        double tb = (hi[c] - p[c]) / dir;
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 > t1) reject = true;
      }
      if (!reject) len += (t1 - t0) * (q - p).norm();
    }
    bound = std::max(bound, len);
  }
  return bound;
}

}  // namespace fwa
