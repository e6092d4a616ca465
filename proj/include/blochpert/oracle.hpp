#pragma once

// Truncated plane-wave Galerkin eigensolver for L_t(q): the ground truth the
// perturbation formulas are validated against. Eigenvalues are trusted only
// below (cutoff - support_radius)^2 - M, where truncation cannot reach.

#include <algorithm>
#include <map>
#include <memory>
#include <vector>

#include "blochpert/common.hpp"
#include "blochpert/lattice.hpp"
#include "blochpert/linalg.hpp"
#include "blochpert/potential.hpp"

namespace blochpert {

struct GalerkinProblem {
  Vec t;
  double cutoff = 0.0;
  std::vector<Coords> basis;       // sorted by (|g+t|, lex)
  std::vector<Vec> basis_carts;    // g + t
  std::map<Coords, int> index;
  CMat matrix;
  double trusted_upper = 0.0;
};

inline GalerkinProblem assemble(const Vec& t, const FourierPotential& q,
                                double cutoff, int basis_cap = 20000) {
  const DualLattice& gamma = q.lattice();
  const int d = gamma.d;
  GalerkinProblem p;
  p.t = t;
  p.cutoff = cutoff;

  Mat binv_t = gamma.basis.transpose().inverse();
  Vec center = -gamma.real_coords(t);
  std::vector<long long> lo(d), hi(d);
  for (int i = 0; i < d; ++i) {
    double w = binv_t.row(i).norm() * cutoff;
    lo[i] = static_cast<long long>(std::floor(center[i] - w)) - 1;
    hi[i] = static_cast<long long>(std::ceil(center[i] + w)) + 1;
  }
  Coords idx(d);
  for (int i = 0; i < d; ++i) idx[i] = lo[i];
  while (true) {
    Vec gpt = gamma.cartesian(idx) + t;
    if (gpt.norm() <= cutoff) {
      p.basis.push_back(idx);
      if (static_cast<int>(p.basis.size()) > basis_cap)
        throw TooLarge("basis exceeds cap of " + std::to_string(basis_cap));
    }
    int k = d - 1;
    while (k >= 0 && idx[k] == hi[k]) {
      idx[k] = lo[k];
      --k;
    }
    if (k < 0) break;
    ++idx[k];
  }
  std::stable_sort(p.basis.begin(), p.basis.end(),
                   [&](const Coords& a, const Coords& b) {
                     double na = (gamma.cartesian(a) + t).squaredNorm();
                     double nb = (gamma.cartesian(b) + t).squaredNorm();
                     if (na != nb) return na < nb;
                     return a < b;
                   });

  const int n = static_cast<int>(p.basis.size());
  p.basis_carts.resize(n);
  for (int i = 0; i < n; ++i) {
    p.basis_carts[i] = gamma.cartesian(p.basis[i]) + t;
    p.index[p.basis[i]] = i;
  }
  p.matrix = CMat::Zero(n, n);
  for (int i = 0; i < n; ++i) p.matrix(i, i) = p.basis_carts[i].squaredNorm();
  for (const auto& [g, qg] : q.coeffs()) {
    for (int i = 0; i < n; ++i) {
      auto it = p.index.find(p.basis[i] - g);
      if (it != p.index.end()) p.matrix(i, it->second) = qg;
    }
  }
  double sr = q.support_radius();
  p.trusted_upper = (cutoff - sr) * (cutoff - sr) - q.sup_bound();
  return p;
}

struct OracleSpectrum {
  Vec eigenvalues;  // ascending, restricted to the window
  CMat vectors;     // columns; empty when values-only
  std::vector<Coords> basis;
  std::map<Coords, int> index;
  double window_lo = 0.0, window_hi = 0.0;
  double trusted_upper = 0.0;

  bool covers(double a) const { return a >= window_lo && a <= window_hi; }
};

inline OracleSpectrum eigen(const GalerkinProblem& p, double window_lo,
                            double window_hi, bool vectors = true) {
  if (window_hi > p.trusted_upper)
    throw Error(ErrorKind::Domain,
                "requested window exceeds the trustworthy region (" +
                    std::to_string(p.trusted_upper) + ")");
  OracleSpectrum s;
  s.basis = p.basis;
  s.index = p.index;
  s.window_lo = window_lo;
  s.window_hi = window_hi;
  s.trusted_upper = p.trusted_upper;

  if (is_effectively_real(p.matrix)) {
    SymEigen se = sym_eigen_window(p.matrix.real(), window_lo, window_hi, vectors);
    s.eigenvalues = se.values;
    if (vectors) s.vectors = se.vectors.cast<cplx>();
  } else {
    // Hermitian case through the doubled real-symmetric embedding; the
    // duplicated spectrum pairs up inside the window.
    const int n = static_cast<int>(p.matrix.rows());
    Mat E(2 * n, 2 * n);
    E.topLeftCorner(n, n) = p.matrix.real();
    E.bottomRightCorner(n, n) = p.matrix.real();
    E.topRightCorner(n, n) = -p.matrix.imag();
    E.bottomLeftCorner(n, n) = p.matrix.imag();
    SymEigen se = sym_eigen_window(E, window_lo, window_hi, vectors);
    const int m2 = static_cast<int>(se.values.size());
    if (m2 % 2 != 0)
      throw NumericalFailure("embedded spectrum did not pair inside window");
    const int m = m2 / 2;
    s.eigenvalues.resize(m);
    for (int k = 0; k < m; ++k) s.eigenvalues[k] = se.values[2 * k];
    if (vectors) {
      s.vectors.resize(n, m);
      int col = 0, i = 0;
      const double gap_tol =
          std::max(1.0, se.values.cwiseAbs().maxCoeff()) * 1e-9;
      while (i < m2) {
        int j = i + 2;
        while (j < m2 && se.values[j] - se.values[j - 1] <= gap_tol) j += 2;
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
          int imax = 0;
          b.cwiseAbs().maxCoeff(&imax);
          cplx piv = b[imax];
          if (std::abs(piv) > 0) b *= std::conj(piv) / std::abs(piv);
          s.vectors.col(col++) = b;
        }
        i = j;
      }
    }
  }

  if (vectors) {
    for (int k = 0; k < s.eigenvalues.size(); ++k) {
      double nrm = s.vectors.col(k).norm();
      if (std::abs(nrm - 1.0) > 1e-10)
        throw NumericalFailure("eigenvector normalization off by " +
                               std::to_string(std::abs(nrm - 1.0)));
      double res = (p.matrix * s.vectors.col(k) -
                    s.eigenvalues[k] * s.vectors.col(k))
                       .norm();
      if (res > 1e-8 * (1.0 + std::abs(s.eigenvalues[k])))
        throw NumericalFailure("eigenpair residual " + std::to_string(res));
    }
  }
  return s;
}

struct MatchResult {
  int N = -1;
  double lambda = 0.0;
  double gap_to_next = 0.0;  // distance from approx to the second-nearest
  bool ambiguous = false;
  int second_N = -1;
  double second_lambda = 0.0;
};

inline MatchResult match(double approx, const OracleSpectrum& s, double tol) {
  MatchResult r;
  int best = -1;
  double bd = 0;
  for (int i = 0; i < s.eigenvalues.size(); ++i) {
    double d = std::abs(s.eigenvalues[i] - approx);
    if (best < 0 || d < bd) {
      best = i;
      bd = d;
    }
  }
  if (best < 0 || bd > tol) throw NoCandidate("no eigenvalue within tolerance");
  r.N = best;
  r.lambda = s.eigenvalues[best];
  // distance from approx to the next eigenvalue above the match
  r.gap_to_next = best + 1 < s.eigenvalues.size()
                      ? std::abs(s.eigenvalues[best + 1] - approx)
                      : std::numeric_limits<double>::infinity();
  // any other eigenvalue inside the tolerance makes the match ambiguous
  for (int i = 0; i < s.eigenvalues.size(); ++i) {
    if (i == best) continue;
    if (std::abs(s.eigenvalues[i] - approx) <= tol) {
      r.ambiguous = true;
      r.second_N = i;
      r.second_lambda = s.eigenvalues[i];
      break;
    }
  }
  return r;
}

inline cplx b_coefficient(const OracleSpectrum& s, int N, const Coords& g) {
  if (N < 0 || N >= s.eigenvalues.size() || s.vectors.cols() == 0)
    throw IndexOutOfRange("eigenpair index " + std::to_string(N));
  auto it = s.index.find(g);
  if (it == s.index.end()) throw IndexOutOfRange("vector outside basis " + coords_str(g));
  return s.vectors(it->second, N);
}

// One-stop solve used by the pipelines.
struct OracleCfg {
  double cutoff = 0.0;          // 0 => max(1.5 rho, rho + support) + 1
  double window_halfwidth = 0;  // 0 => 2 + 2 * sup_bound
  int basis_cap = 20000;
};

inline double default_cutoff(double rho, const FourierPotential& q) {
  return std::max(1.5 * rho, rho + q.support_radius()) + 1.0;
}

inline OracleSpectrum solve_window(const Vec& t, const FourierPotential& q,
                                   double center, const OracleCfg& cfg,
                                   double rho, bool vectors = true) {
  double cutoff = cfg.cutoff > 0 ? cfg.cutoff : default_cutoff(rho, q);
  double hw = cfg.window_halfwidth > 0 ? cfg.window_halfwidth
                                       : 2.0 + 2.0 * q.sup_bound();
  GalerkinProblem p = assemble(t, q, cutoff, cfg.basis_cap);
  return eigen(p, center - hw, std::min(center + hw, p.trusted_upper), vectors);
}

}  // namespace blochpert
