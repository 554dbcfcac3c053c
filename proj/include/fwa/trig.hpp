#pragma once

// Vector-valued trigonometric polynomials on tori.  These represent the
// base-dependent translation v(b) and the fibre perturbation p(b,x); the
// integer frequencies make 1-periodicity automatic and give closed-form
// Jacobians and certified sup / Lipschitz bounds.

#include "fwa/torus.hpp"

#include <numbers>
#include <vector>

namespace fwa {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct TrigTerm {
  IVec freq;      // integer frequency vector, length dim_in
  Vec cos_coef;   // length dim_out
  Vec sin_coef;   // length dim_out
};

class TrigPolynomial {
public:
  TrigPolynomial() : dim_in_(0), dim_out_(0) {}

  TrigPolynomial(int dim_in, int dim_out, std::vector<TrigTerm> terms = {})
      : dim_in_(dim_in), dim_out_(dim_out), terms_(std::move(terms)) {
    for (const auto& t : terms_) {
      if (t.freq.size() != dim_in_ || t.cos_coef.size() != dim_out_ ||
          t.sin_coef.size() != dim_out_)
        throw std::invalid_argument("TrigPolynomial: term dimension mismatch");
    }
  }

  static TrigPolynomial zero(int dim_in, int dim_out) {
    return TrigPolynomial(dim_in, dim_out);
  }

  int dim_in() const { return dim_in_; }
  int dim_out() const { return dim_out_; }
  const std::vector<TrigTerm>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  void add_term(TrigTerm t) {
    if (t.freq.size() != dim_in_ || t.cos_coef.size() != dim_out_ ||
        t.sin_coef.size() != dim_out_)
      throw std::invalid_argument("TrigPolynomial: term dimension mismatch");
    terms_.push_back(std::move(t));
  }

  // Evaluation at a lift; periodicity makes the choice of lift irrelevant.
  Vec eval(const Vec& x) const {
    Vec out = Vec::Zero(dim_out_);
    for (const auto& t : terms_) {
      double phase = kTwoPi * t.freq.cast<double>().dot(x);
      out += std::cos(phase) * t.cos_coef + std::sin(phase) * t.sin_coef;
    }
    return out;
  }

  // Analytic Jacobian, dim_out x dim_in.
  Mat jacobian(const Vec& x) const {
    Mat J = Mat::Zero(dim_out_, dim_in_);
    for (const auto& t : terms_) {
      double phase = kTwoPi * t.freq.cast<double>().dot(x);
      Vec dir = (-std::sin(phase)) * t.cos_coef + std::cos(phase) * t.sin_coef;
      J += kTwoPi * dir * t.freq.cast<double>().transpose();
    }
    return J;
  }

  // Certified bounds, summed over terms (triangle inequality).
  double sup_bound() const {
    double s = 0.0;
    for (const auto& t : terms_)
      s += std::hypot(t.cos_coef.norm(), t.sin_coef.norm());
    return s;
  }

  double lipschitz_bound() const {
    double s = 0.0;
    for (const auto& t : terms_)
      s += kTwoPi * t.freq.cast<double>().norm() *
           std::hypot(t.cos_coef.norm(), t.sin_coef.norm());
    return s;
  }

  // Lipschitz bound for the Jacobian itself (second-derivative bound).
  double jacobian_lipschitz_bound() const {
    double s = 0.0;
    for (const auto& t : terms_) {
      double f = kTwoPi * t.freq.cast<double>().norm();
      s += f * f * std::hypot(t.cos_coef.norm(), t.sin_coef.norm());
    }
    return s;
  }

  TrigPolynomial scaled(double factor) const {
    std::vector<TrigTerm> terms = terms_;
    for (auto& t : terms) {
      t.cos_coef *= factor;
      t.sin_coef *= factor;
    }
    return TrigPolynomial(dim_in_, dim_out_, std::move(terms));
  }

private:
  int dim_in_;
  int dim_out_;
  std::vector<TrigTerm> terms_;
};

}  // namespace fwa
