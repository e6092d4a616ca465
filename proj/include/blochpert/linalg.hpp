#pragma once

// Dense symmetric / Hermitian eigensolvers on top of LAPACK (dsyevr).
// Complex Hermitian matrices are solved through the real-symmetric
// embedding [[A,-B],[B,A]] of H = A + iB; the doubled spectrum is
// deduplicated and complex eigenvectors are reconstructed with a
// deterministic phase.

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "blochpert/common.hpp"

namespace blochpert {

struct SymEigen {
  Vec values;   // ascending
  Mat vectors;  // columns, empty if not requested
};

struct HermEigen {
  Vec values;
  CMat vectors;
};

namespace detail {

inline SymEigen dsyevr_all(Mat A, bool vectors, double vl = 0, double vu = 0,
                           bool ranged = false) {
  const int n = static_cast<int>(A.rows());
  SymEigen out;
  if (n == 0) return out;
  std::vector<double> w(n);
  Mat z;
  if (vectors) z.resize(n, n);
  std::vector<lapack_int> isuppz(2 * std::max(1, n));
  lapack_int m = 0;
  lapack_int info = LAPACKE_dsyevr(
      LAPACK_COL_MAJOR, vectors ? 'V' : 'N', ranged ? 'V' : 'A', 'L', n,
      A.data(), n, vl, vu, 0, 0, 0.0, &m, w.data(),
      vectors ? z.data() : nullptr, n, isuppz.data());
  if (info != 0) throw NumericalFailure("dsyevr info=" + std::to_string(info));
  out.values = Eigen::Map<Vec>(w.data(), m);
  if (vectors) out.vectors = z.leftCols(m);
  return out;
}

}  // namespace detail

inline SymEigen sym_eigen(const Mat& A, bool vectors = true) {
  return detail::dsyevr_all(A, vectors);
}

// Eigenpairs with value in [lo, hi].
inline SymEigen sym_eigen_window(const Mat& A, double lo, double hi,
                                 bool vectors = true) {
  return detail::dsyevr_all(A, vectors, lo, hi, true);
}

inline bool is_effectively_real(const CMat& H, double tol = 1e-14) {
  double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  return H.imag().cwiseAbs().maxCoeff() <= tol * scale;
}

inline HermEigen herm_eigen(const CMat& H, bool vectors = true) {
  const int n = static_cast<int>(H.rows());
  HermEigen out;
  if (n == 0) return out;

  if (is_effectively_real(H)) {
    SymEigen se = sym_eigen(H.real(), vectors);
    out.values = se.values;
    if (vectors) out.vectors = se.vectors.cast<cplx>();
    return out;
  }

  Mat E(2 * n, 2 * n);
  E.topLeftCorner(n, n) = H.real();
  E.bottomRightCorner(n, n) = H.real();
  E.topRightCorner(n, n) = -H.imag();
  E.bottomLeftCorner(n, n) = H.imag();
  SymEigen se = sym_eigen(E, vectors);

  // Every eigenvalue of H appears exactly twice in E, so the ascending
  // spectrum pairs up sequentially.
  out.values.resize(n);
  for (int k = 0; k < n; ++k) out.values[k] = se.values[2 * k];
  if (!vectors) return out;

  // Complex-orthonormalize the images u+iv within each near-degenerate
  // group; exactly half of each (even-sized) group survives.
  out.vectors.resize(n, n);
  const double gap_tol = std::max(1.0, se.values.cwiseAbs().maxCoeff()) * 1e-9;
  int i = 0, col = 0;
  while (i < 2 * n) {
    int j = i + 2;
    while (j < 2 * n && se.values[j] - se.values[j - 1] <= gap_tol) j += 2;
    const int keep = (j - i) / 2;
    std::vector<CVec> basis;
    for (int k = i; k < j && static_cast<int>(basis.size()) < keep; ++k) {
      CVec z = se.vectors.col(k).head(n).cast<cplx>() +
               cplx(0, 1) * se.vectors.col(k).tail(n).cast<cplx>();
      for (const CVec& b : basis) z -= b * b.dot(z);
      double nz = z.norm();
      if (nz > 1e-6) basis.push_back(z / nz);
    }
    if (static_cast<int>(basis.size()) != keep)
      throw NumericalFailure("hermitian pair deduplication failed");
    for (CVec& b : basis) {
      // Deterministic phase: largest-magnitude entry made real positive.
      int imax = 0;
      b.cwiseAbs().maxCoeff(&imax);
      cplx piv = b[imax];
      if (std::abs(piv) > 0) b *= std::conj(piv) / std::abs(piv);
      out.vectors.col(col++) = b;
    }
    i = j;
  }
  return out;
}

// Rank of a set of row vectors by pivoted elimination with relative tolerance.
inline int numeric_rank(const std::vector<Vec>& rows, double rel_tol = 1e-10) {
  if (rows.empty()) return 0;
  Mat M(static_cast<int>(rows.size()), rows[0].size());
  for (size_t r = 0; r < rows.size(); ++r) M.row(static_cast<int>(r)) = rows[r];
  Eigen::ColPivHouseholderQR<Mat> qr(M);
  qr.setThreshold(rel_tol);
  return static_cast<int>(qr.rank());
}

}  // namespace blochpert
