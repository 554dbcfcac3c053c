#pragma once

// Invertible base dynamics on T^k: translations, automorphisms from
// GL(k,Z), and their composites b -> B b + alpha.  All inverses are exact,
// which the backward orbits of the series solution rely on.

#include "fwa/integer_matrix.hpp"
#include "fwa/torus.hpp"

namespace fwa {

class BaseSystem {
public:
  enum class Kind { Translation, Automorphism, Composite };

  static BaseSystem translation(Vec alpha) {
    int k = static_cast<int>(alpha.size());
    return BaseSystem(Kind::Translation, IMat::Identity(k, k), std::move(alpha));
  }

  static BaseSystem automorphism(IMat B) {
    int k = static_cast<int>(B.rows());
    return BaseSystem(Kind::Automorphism, std::move(B), Vec::Zero(k));
  }

  static BaseSystem composite(IMat B, Vec alpha) {
    return BaseSystem(Kind::Composite, std::move(B), std::move(alpha));
  }

  static BaseSystem identity(int k) {
    return translation(Vec::Zero(k));
  }

  Kind kind() const { return kind_; }
  int dim() const { return static_cast<int>(alpha_.size()); }
  const IMat& matrix() const { return matrix_; }
  const Vec& alpha() const { return alpha_; }

  TorusPoint forward(const TorusPoint& b) const {
    return project(matrix_.cast<double>() * b.coords() + alpha_);
  }

  TorusPoint inverse(const TorusPoint& b) const {
    return project(inverse_.cast<double>() * (b.coords() - alpha_));
  }

  bool operator==(const BaseSystem& o) const {
    return kind_ == o.kind_ && matrix_ == o.matrix_ && alpha_ == o.alpha_;
  }

private:
  BaseSystem(Kind kind, IMat B, Vec alpha)
      : kind_(kind), matrix_(std::move(B)), alpha_(std::move(alpha)) {
    if (matrix_.rows() != matrix_.cols() || matrix_.rows() != alpha_.size())
      throw std::invalid_argument("BaseSystem: dimension mismatch");
    if (std::abs(determinant(matrix_)) != 1)
      throw std::invalid_argument("BaseSystem: matrix not in GL(k,Z)");
    inverse_ = unimodular_inverse(matrix_);
  }

  Kind kind_;
  IMat matrix_;
  IMat inverse_;
  Vec alpha_;
};

}  // namespace fwa
