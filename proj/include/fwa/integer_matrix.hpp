#pragma once

// Exact integer-matrix arithmetic for small dimensions: determinants by
// fraction-free (Bareiss) elimination and inverses of unimodular matrices
// via the adjugate.  |det| = 1 must be decided exactly, not in floating
// point.

#include "fwa/torus.hpp"

#include <cstdint>

namespace fwa {

// Fraction-free Gaussian elimination; exact for the entry sizes used here.
inline std::int64_t determinant(const IMat& A) {
  if (A.rows() != A.cols())
    throw std::invalid_argument("determinant: matrix not square");
  const int n = static_cast<int>(A.rows());
  if (n == 0) return 1;
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> M =
      A.cast<std::int64_t>();
  std::int64_t sign = 1;
  std::int64_t prev = 1;
  for (int k = 0; k + 1 < n; ++k) {
    if (M(k, k) == 0) {
      int p = -1;
      for (int i = k + 1; i < n; ++i)
        if (M(i, k) != 0) { p = i; break; }
      if (p < 0) return 0;
      M.row(k).swap(M.row(p));
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i) {
      for (int j = k + 1; j < n; ++j)
        M(i, j) = (M(i, j) * M(k, k) - M(i, k) * M(k, j)) / prev;
      M(i, k) = 0;
    }
    prev = M(k, k);
  }
  return sign * M(n - 1, n - 1);
}

inline bool is_unimodular(const IMat& A) {
  std::int64_t d = determinant(A);
  return d == 1 || d == -1;
}

// Inverse of A in GL(d,Z); integer because |det A| = 1.
inline IMat unimodular_inverse(const IMat& A) {
  std::int64_t det = determinant(A);
  if (det != 1 && det != -1)
    throw std::invalid_argument("unimodular_inverse: |det| != 1");
  const int n = static_cast<int>(A.rows());
  IMat inv(n, n);
  IMat minor(n - 1 > 0 ? n - 1 : 0, n - 1 > 0 ? n - 1 : 0);
  if (n == 1) {
    inv(0, 0) = static_cast<int>(det);
    return inv;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      int r = 0;
      for (int ii = 0; ii < n; ++ii) {
        if (ii == i) continue;
        int c = 0;
        for (int jj = 0; jj < n; ++jj) {
          if (jj == j) continue;
          minor(r, c++) = A(ii, jj);
        }
        ++r;
      }
      std::int64_t cof = determinant(minor);
      if ((i + j) % 2 != 0) cof = -cof;
      inv(j, i) = static_cast<int>(cof * det);  // adjugate transposed, / det
    }
  }
  return inv;
}

}  // namespace fwa
