#pragma once

// Direct lattice Omega, dual lattice Gamma, and the delta-direction frame:
// the sublattice of Omega orthogonal to a primitive dual vector delta, its
// dual inside the hyperplane, and the two decompositions t = a + tau + s*delta
// and gamma + t = beta + tau + (j+v)*delta.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "blochpert/common.hpp"

namespace blochpert {

namespace detail {

// Extended gcd: returns g = gcd(a,b) >= 0 with x*a + y*b = g.
inline long long egcd(long long a, long long b, long long& x, long long& y) {
  if (b == 0) {
    x = (a < 0) ? -1 : 1;
    y = 0;
    return std::llabs(a);
  }
  long long x1, y1;
  long long g = egcd(b, a % b, x1, y1);
  x = y1;
  y = x1 - (a / b) * y1;
  return g;
}

// Unimodular integer matrix V (rows) with V*c = (g,0,...,0), g = gcd(c) >= 0.
inline std::vector<Coords> unimodular_clear(const Coords& c, long long& g) {
  const int d = static_cast<int>(c.size());
  std::vector<Coords> V(d, Coords(d, 0));
  for (int i = 0; i < d; ++i) V[i][i] = 1;
  Coords w = c;
  for (int i = 1; i < d; ++i) {
    if (w[i] == 0) continue;
    long long x, y;
    long long gi = egcd(w[0], w[i], x, y);
    Coords r0 = V[0], ri = V[i];
    for (int k = 0; k < d; ++k) {
      V[0][k] = x * r0[k] + y * ri[k];
      V[i][k] = -(w[i] / gi) * r0[k] + (w[0] / gi) * ri[k];
    }
    w[0] = gi;
    w[i] = 0;
  }
  if (w[0] < 0) {
    for (int k = 0; k < d; ++k) V[0][k] = -V[0][k];
    w[0] = -w[0];
  }
  g = w[0];
  return V;
}

inline long long gcd_all(const Coords& c) {
  long long g = 0;
  for (long long v : c) g = std::gcd(g, std::llabs(v));
  return g;
}

}  // namespace detail

struct Lattice {
  int d = 0;
  Mat basis;  // generator rows
  double cell_volume = 0.0;

  Lattice() = default;
  explicit Lattice(const Mat& b) : d(static_cast<int>(b.rows())), basis(b) {
    if (b.rows() < 2 || b.rows() != b.cols())
      throw InvalidLattice("basis must be square with d >= 2");
    double det = b.determinant();
    if (std::abs(det) < 1e-12 * std::pow(b.cwiseAbs().maxCoeff() + 1.0, d))
      throw InvalidLattice("basis rows are linearly dependent");
    cell_volume = std::abs(det);
  }

  Vec cartesian(const Coords& n) const {
    Vec x = Vec::Zero(d);
    for (int i = 0; i < d; ++i) x += static_cast<double>(n[i]) * basis.row(i).transpose();
    return x;
  }
};

struct DualLattice {
  int d = 0;
  Mat basis;  // generator rows

  DualLattice() = default;
  explicit DualLattice(const Mat& b) : d(static_cast<int>(b.rows())), basis(b) {
    if (std::abs(b.determinant()) <= 0)
      throw InvalidLattice("dual basis singular");
  }

  Vec cartesian(const Coords& n) const {
    Vec x = Vec::Zero(d);
    for (int i = 0; i < d; ++i) x += static_cast<double>(n[i]) * basis.row(i).transpose();
    return x;
  }

  // Real coordinates of x in the generator basis.
  Vec real_coords(const Vec& x) const {
    return basis.transpose().partialPivLu().solve(x);
  }

  // Integer coordinates if x is a lattice point within abs tolerance, else throws.
  Coords coords_of(const Vec& x, double tol = 1e-8) const {
    Vec y = real_coords(x);
    Coords n(d);
    for (int i = 0; i < d; ++i) {
      double r = std::round(y[i]);
      if (std::abs(y[i] - r) > tol)
        throw NotLatticePoint("off-lattice by " + std::to_string(std::abs(y[i] - r)));
      n[i] = static_cast<long long>(r);
    }
    return n;
  }

  bool is_lattice_point(const Vec& x, double tol = 1e-8) const {
    Vec y = real_coords(x);
    for (int i = 0; i < d; ++i)
      if (std::abs(y[i] - std::round(y[i])) > tol) return false;
    return true;
  }
};

inline DualLattice dual(const Lattice& lat) {
  Mat binv = lat.basis.inverse();
  return DualLattice(kTwoPi * binv.transpose());
}

inline Lattice dual_of(const DualLattice& gamma) {
  Mat binv = gamma.basis.inverse();
  return Lattice(kTwoPi * binv.transpose());
}

// All lattice vectors with |x| < radius (0 < |x| when zero excluded),
// sorted lexicographically on integer coordinates.
inline std::vector<Coords> enumerate_ball(const DualLattice& lat, double radius,
                                          bool exclude_zero = true) {
  if (!(radius > 0)) throw Error(ErrorKind::Domain, "enumerate_ball: radius must be > 0");
  const int d = lat.d;
  Mat binv_t = lat.basis.transpose().inverse();  // rows give coords from cartesian
  std::vector<long long> bound(d);
  for (int i = 0; i < d; ++i)
    bound[i] = static_cast<long long>(std::ceil(binv_t.row(i).norm() * radius)) + 1;

  std::vector<Coords> out;
  Coords n(d, 0);
  std::vector<long long> idx(d);
  // odometer over the integer box
  for (int i = 0; i < d; ++i) idx[i] = -bound[i];
  while (true) {
    for (int i = 0; i < d; ++i) n[i] = idx[i];
    bool zero = is_zero(n);
    if (!(zero && exclude_zero)) {
      if (lat.cartesian(n).norm() < radius) out.push_back(n);
    }
    int k = d - 1;
    while (k >= 0 && idx[k] == bound[k]) {
      idx[k] = -bound[k];
      --k;
    }
    if (k < 0) break;
    ++idx[k];
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Frame attached to a primitive dual vector delta: the hyperplane sublattices
// and everything needed for the beta + tau + (j+v)delta decomposition.
struct DeltaFrame {
  DualLattice gamma;      // ambient dual lattice
  Lattice omega;          // ambient direct lattice
  Coords delta_coords;    // delta in the Gamma basis
  Vec delta;              // cartesian
  Vec delta_star;         // in Omega, (delta_star, delta) = 2*pi
  Mat gamma_delta_basis;  // (d-1) x d rows, dual of omega_delta inside H_delta
  Mat omega_delta_basis;  // (d-1) x d rows, sublattice of Omega with (h,delta)=0
  double f_delta_diameter = 0.0;

  int d() const { return gamma.d; }
  int hd() const { return gamma.d - 1; }

  Vec gd_cartesian(const Coords& n) const {
    Vec x = Vec::Zero(d());
    for (int i = 0; i < hd(); ++i)
      x += static_cast<double>(n[i]) * gamma_delta_basis.row(i).transpose();
    return x;
  }

  // Real coordinates of a vector of H_delta in the Gamma_delta basis.
  Vec gd_real_coords(const Vec& x) const {
    Mat G = gamma_delta_basis * gamma_delta_basis.transpose();
    return G.ldlt().solve(gamma_delta_basis * x);
  }

  Coords gd_coords_of(const Vec& x, double tol = 1e-8) const {
    Vec y = gd_real_coords(x);
    Coords n(hd());
    for (int i = 0; i < hd(); ++i) {
      double r = std::round(y[i]);
      if (std::abs(y[i] - r) > tol)
        throw NotLatticePoint("not in Gamma_delta");
      n[i] = static_cast<long long>(r);
    }
    return n;
  }

  // Gamma_delta vectors with |b| < radius, lexicographic order.
  std::vector<Coords> gd_enumerate_ball(double radius, bool exclude_zero = true) const {
    std::vector<Coords> out;
    Mat G = gamma_delta_basis * gamma_delta_basis.transpose();
    Mat Ginv = G.inverse();
    std::vector<long long> bound(hd());
    for (int i = 0; i < hd(); ++i)
      bound[i] = static_cast<long long>(std::ceil(std::sqrt(Ginv(i, i)) * radius)) + 1;
    Coords idx(hd());
    for (int i = 0; i < hd(); ++i) idx[i] = -bound[i];
    while (true) {
      bool zero = is_zero(idx);
      if (!(zero && exclude_zero)) {
        if (gd_cartesian(idx).norm() < radius) out.push_back(idx);
      }
      int k = hd() - 1;
      while (k >= 0 && idx[k] == bound[k]) {
        idx[k] = -bound[k];
        --k;
      }
      if (k < 0) break;
      ++idx[k];
    }
    std::sort(out.begin(), out.end());
    return out;
  }
};

struct GammaDeltaDecomposition {
  Coords beta_coords;  // in the Gamma_delta basis
  Vec beta;            // cartesian
  Vec tau;             // in F_delta
  long long j = 0;
  double v = 0.0;  // in [0,1)
};

inline DeltaFrame delta_frame(const DualLattice& gamma, const Coords& delta_coords) {
  const int d = gamma.d;
  if (static_cast<int>(delta_coords.size()) != d || is_zero(delta_coords))
    throw Error(ErrorKind::Domain, "delta must be a nonzero Gamma vector");
  if (detail::gcd_all(delta_coords) != 1)
    throw NotPrimitive(coords_str(delta_coords));

  DeltaFrame f;
  f.gamma = gamma;
  f.omega = dual_of(gamma);
  f.delta_coords = delta_coords;
  f.delta = gamma.cartesian(delta_coords);

  // (omega_i, delta)/2pi are integers; clear them with a unimodular matrix.
  Coords c(d);
  for (int i = 0; i < d; ++i) {
    double ip = f.omega.basis.row(i).dot(f.delta) / kTwoPi;
    double r = std::round(ip);
    if (std::abs(ip - r) > 1e-9)
      throw Error(ErrorKind::Domain, "delta is not a dual lattice vector");
    c[i] = static_cast<long long>(r);
  }
  long long g = 0;
  std::vector<Coords> V = detail::unimodular_clear(c, g);
  if (g != 1) throw NotPrimitive("gcd of pairings is " + std::to_string(g));

  f.delta_star = f.omega.cartesian(V[0]);

  f.omega_delta_basis.resize(d - 1, d);
  for (int i = 1; i < d; ++i) {
    Coords row = V[i];
    // canonical sign: first nonzero coordinate positive
    for (long long x : row) {
      if (x > 0) break;
      if (x < 0) {
        row = negate(row);
        break;
      }
    }
    f.omega_delta_basis.row(i - 1) = f.omega.cartesian(row).transpose();
  }

  // Dual of Omega_delta inside the hyperplane H_delta.
  Mat W = f.omega_delta_basis;
  Mat G = W * W.transpose();
  f.gamma_delta_basis = kTwoPi * (G.inverse() * W);

  // Diameter of the fundamental parallelepiped of Gamma_delta.
  const int m = d - 1;
  double best = 0.0;
  for (long long mask = 0; mask < (1LL << m); ++mask) {
    Vec s = Vec::Zero(d);
    for (int i = 0; i < m; ++i)
      s += ((mask >> i) & 1 ? 1.0 : -1.0) * f.gamma_delta_basis.row(i).transpose();
    best = std::max(best, s.norm());
  }
  f.f_delta_diameter = best;
  return f;
}

struct TDecomposition {
  Coords a_coords;  // Gamma_delta part of t
  Vec a;
  Vec tau;
  double s = 0.0;  // coefficient of delta
};

// t = a + tau + |delta|^{-2} (t,delta) delta with a in Gamma_delta, tau in F_delta.
inline TDecomposition decompose_t(const Vec& t, const DeltaFrame& f) {
  TDecomposition r;
  r.s = t.dot(f.delta) / f.delta.squaredNorm();
  Vec perp = t - r.s * f.delta;
  Vec y = f.gd_real_coords(perp);
  r.a_coords.resize(f.hd());
  for (int i = 0; i < f.hd(); ++i) r.a_coords[i] = static_cast<long long>(std::floor(y[i]));
  r.a = f.gd_cartesian(r.a_coords);
  r.tau = perp - r.a;
  return r;
}

// x = gamma + t = beta + tau + (j + v) delta with the induced fractional twist v.
inline GammaDeltaDecomposition gamma_delta_decompose(const Vec& x, const DeltaFrame& f,
                                                     const Vec& t, double tol = 1e-8) {
  Coords gcoords = f.gamma.coords_of(x - t, tol);
  Vec gam = f.gamma.cartesian(gcoords);
  double sg = gam.dot(f.delta) / f.delta.squaredNorm();
  Vec b = gam - sg * f.delta;
  Coords b_coords = f.gd_coords_of(b);

  TDecomposition td = decompose_t(t, f);
  GammaDeltaDecomposition r;
  r.beta_coords = b_coords + td.a_coords;
  r.beta = f.gd_cartesian(r.beta_coords);
  r.tau = td.tau;
  r.v = frac01(td.s - f.gd_cartesian(b_coords).dot(f.delta_star) / kTwoPi);
  double total = x.dot(f.delta) / f.delta.squaredNorm();
  r.j = static_cast<long long>(std::llround(total - r.v));

  Vec rebuilt = r.beta + r.tau + (static_cast<double>(r.j) + r.v) * f.delta;
  if ((rebuilt - x).norm() > 1e-10 * std::max(1.0, x.norm()))
    throw NumericalFailure("gamma-delta decomposition failed to reassemble");
  return r;
}

// Split an arbitrary point into gamma + t with t in the basis parallelepiped of Gamma.
inline std::pair<Coords, Vec> split_x(const Vec& x, const DualLattice& gamma) {
  Vec y = gamma.real_coords(x);
  Coords g(gamma.d);
  for (int i = 0; i < gamma.d; ++i) g[i] = static_cast<long long>(std::floor(y[i]));
  Vec t = x - gamma.cartesian(g);
  return {g, t};
}

}  // namespace blochpert
