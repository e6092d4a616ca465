#pragma once

// The eigenvalue function Lambda(x) on the simple set, its gradient from the
// oracle eigenvector, and isoenergetic-surface point tracing by bisection of
// Lambda - rho^2 along a coordinate axis.

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "blochpert/common.hpp"
#include "blochpert/geometry.hpp"
#include "blochpert/nonres.hpp"
#include "blochpert/oracle.hpp"
#include "blochpert/rng.hpp"
#include "blochpert/simpleset.hpp"

namespace blochpert {

struct LambdaValue {
  double lambda = 0.0;
  int N = -1;
  double dominance = 0.0;
};

// Oracle eigenvalue matched to F(x) within eps1, with dominance > 1/2.
inline LambdaValue lambda_of_x(const Vec& x, const FourierPotential& q,
                               const AsymptoticParams& params, const Classifier& cls,
                               const OracleCfg& cfg, bool force = false) {
  if (!force) {
    SimpleSetCertificate cert = in_B(x, q, params, cls);
    if (cert.verdict != Verdict::Accepted)
      throw Error(ErrorKind::Domain, "point is not certified simple: " + cert.reason);
  }
  double F = F_series(x, q, params, params.known_order()).lambda_pred;
  auto [gcoords, t] = split_x(x, q.lattice());
  OracleSpectrum spec = solve_window(t, q, F, cfg, params.rho, true);
  double eps1 = params.eps1();
  int in_eps = 0;
  for (int i = 0; i < spec.eigenvalues.size(); ++i)
    if (std::abs(spec.eigenvalues[i] - F) <= eps1) ++in_eps;
  if (in_eps == 0) throw NoCandidate("no oracle eigenvalue within eps1 of F");
  if (in_eps > 1) throw Ambiguous("several oracle eigenvalues within eps1");
  MatchResult m = match(F, spec, eps1);
  LambdaValue out;
  out.lambda = m.lambda;
  out.N = m.N;
  out.dominance = std::norm(b_coefficient(spec, m.N, gcoords));
  if (out.dominance <= 0.5)
    throw Ambiguous("dominant coefficient squared is " + std::to_string(out.dominance));
  return out;
}

// Gradient of Lambda at a simple point from its oracle eigenvector:
// d/dt_j Lambda = sum_{g} 2 (g + t)_j |b(N,g)|^2.
inline Vec grad_lambda(const Vec& x, const FourierPotential& q,
                       const AsymptoticParams& params, const OracleCfg& cfg) {
  double F = F_series(x, q, params, params.known_order()).lambda_pred;
  auto [gcoords, t] = split_x(x, q.lattice());
  OracleSpectrum spec = solve_window(t, q, F, cfg, params.rho, true);
  double eps1 = params.eps1();
  int in_eps = 0;
  for (int i = 0; i < spec.eigenvalues.size(); ++i)
    if (std::abs(spec.eigenvalues[i] - F) <= eps1) ++in_eps;
  if (in_eps == 0) throw NoCandidate("no oracle eigenvalue within eps1 of F");
  if (in_eps > 1) throw Ambiguous("gradient undefined near degeneracy");
  MatchResult m = match(F, spec, eps1);
  Vec g = Vec::Zero(params.d);
  for (size_t i = 0; i < spec.basis.size(); ++i) {
    double w = std::norm(spec.vectors(static_cast<int>(i), m.N));
    if (w < 1e-30) continue;
    g += 2.0 * w * (q.lattice().cartesian(spec.basis[i]) + t);
  }
  return g;
}

struct IsoSurfacePoint {
  Vec y;
  Coords gamma;
  int axis = 0;
  double lambda = 0.0;
  double residual = 0.0;
  int bisection_steps = 0;
};

namespace detail {

// Lambda(y) for y near the seed, tracked through the fixed lattice vector
// gamma: values-only solve, unique match within eps1 required.
inline double lambda_tracked(const Vec& y, const Coords& gamma_coords,
                             const FourierPotential& q, const AsymptoticParams& params,
                             const OracleCfg& cfg, bool first) {
  Vec t = y - q.lattice().cartesian(gamma_coords);
  double F = F_series(y, q, params, params.known_order()).lambda_pred;
  OracleSpectrum spec = solve_window(t, q, F, cfg, params.rho, false);
  double eps1 = params.eps1();
  int in_eps = 0;
  double best = 0, bd = std::numeric_limits<double>::infinity();
  for (int i = 0; i < spec.eigenvalues.size(); ++i) {
    double dist = std::abs(spec.eigenvalues[i] - F);
    if (dist <= eps1) ++in_eps;
    if (dist < bd) {
      bd = dist;
      best = spec.eigenvalues[i];
    }
  }
  if (in_eps == 0) {
    if (first) throw NoCandidate("no eigenvalue within eps1 at bracket end");
    throw LostSimplicity("no eigenvalue within eps1 during bisection");
  }
  if (in_eps > 1) throw LostSimplicity("near-degenerate match mid-bisection");
  return best;
}

}  // namespace detail

inline IsoSurfacePoint trace_point(const Vec& a, int axis, double eps, double rho2,
                                   const FourierPotential& q,
                                   const AsymptoticParams& params, const OracleCfg& cfg,
                                   double tol = 0.0, int max_steps = 60) {
  if (tol <= 0) tol = 1e-8 * rho2;
  Coords gamma_coords = split_x(a, q.lattice()).first;
  Vec e = Vec::Zero(a.size());
  e[axis] = 1.0;

  Vec lo = a - 0.5 * eps * e, hi = a + 0.5 * eps * e;
  double flo = detail::lambda_tracked(lo, gamma_coords, q, params, cfg, true) - rho2;
  double fhi = detail::lambda_tracked(hi, gamma_coords, q, params, cfg, true) - rho2;
  if (flo == 0.0) return {lo, gamma_coords, axis, rho2, 0.0, 0};
  if (fhi == 0.0) return {hi, gamma_coords, axis, rho2, 0.0, 0};
  if ((flo > 0) == (fhi > 0))
    throw NoSignChange("Lambda - rho^2 has the same sign at both bracket ends");

  IsoSurfacePoint out;
  out.gamma = gamma_coords;
  out.axis = axis;
  Vec mid = a;
  double fmid = 0.0, lambda_mid = 0.0;
  for (int step = 1; step <= max_steps; ++step) {
    mid = 0.5 * (lo + hi);
    lambda_mid = detail::lambda_tracked(mid, gamma_coords, q, params, cfg, false);
    fmid = lambda_mid - rho2;
    out.bisection_steps = step;
    if (std::abs(fmid) < tol) break;
    if ((fmid > 0) == (fhi > 0)) {
      hi = mid;
      fhi = fmid;
    } else {
      lo = mid;
      flo = fmid;
    }
  }
  out.y = mid;
  out.lambda = lambda_mid;
  out.residual = std::abs(fmid);
  return out;
}

struct SurfaceDirection {
  Vec direction;
  std::string status;  // "ok" or the failure stage
  Vec y;
  double lambda = 0.0;
  double residual = 0.0;
  int steps = 0;
  int seed_attempts = 0;
};

struct SurfaceSample {
  std::vector<SurfaceDirection> rows;
  long long certified = 0;
  long long traced = 0;
  double rho2 = 0.0;
  bool spectrum_witness = false;  // at least one traced point => rho^2 in Spec
};

inline SurfaceSample surface_sample(double rho, const FourierPotential& q,
                                    const AsymptoticParams& params, int n_dirs,
                                    uint64_t seed, const OracleCfg& cfg,
                                    double eps = 0.0, int threads = 1) {
  SurfaceSample out;
  out.rho2 = rho * rho;
  Classifier cls(params, q.lattice());
  if (eps <= 0) eps = std::max(params.eps1() / rho, 1e-4 * rho);
  Rng master(seed);
  out.rows.resize(n_dirs);

  parallel_for(n_dirs, threads, [&](long long dir) {
    Rng r = master.substream(static_cast<uint64_t>(dir));
    SurfaceDirection row;
    row.direction = r.sphere_dir(params.d);
    row.status = "seed-rejected";

    // one Newton step of |ru|^2 + F(ru) = rho^2 from r = rho, then certify,
    // jittering the direction a few times if the certificate fails
    Vec u = row.direction;
    std::optional<Vec> seed_point;
    for (int attempt = 0; attempt < 5; ++attempt) {
      row.seed_attempts = attempt + 1;
      Vec uu = u;
      if (attempt > 0) {
        Vec jit(params.d);
        for (int i = 0; i < params.d; ++i) jit[i] = r.normal();
        uu = (u + 0.02 * attempt * jit).normalized();
      }
      try {
        Vec x0 = rho * uu;
        double Fcorr =
            F_series(x0, q, params, std::min(params.known_order(), 3)).lambda_pred -
            x0.squaredNorm();
        Vec y0 = (rho - Fcorr / (2.0 * rho)) * uu;
        if (in_B(y0, q, params, cls).verdict == Verdict::Accepted) {
          seed_point = y0;
          break;
        }
      } catch (const Error&) {
      }
    }
    if (!seed_point) {
      out.rows[dir] = row;
      return;
    }
    Vec a = *seed_point;
    int axis = 0;
    a.cwiseAbs().maxCoeff(&axis);

    try {
      Vec g = grad_lambda(a, q, params, cfg);
      if (std::abs(g[axis]) < rho / (2.0 * params.d))
        throw NoSignChange("axis derivative too small");
      row.status = "trace-failed";
      IsoSurfacePoint pt;
      try {
        pt = trace_point(a, axis, eps, out.rho2, q, params, cfg);
      } catch (const NoSignChange&) {
        pt = trace_point(a, axis, 8.0 * eps, out.rho2, q, params, cfg);
      }
      row.status = "ok";
      row.y = pt.y;
      row.lambda = pt.lambda;
      row.residual = pt.residual;
      row.steps = pt.bisection_steps;
    } catch (const Error& e) {
      row.status = std::string("trace-failed: ") + e.what();
    }
    out.rows[dir] = row;
  });
  for (const auto& row : out.rows) {
    if (row.seed_attempts > 0 && row.status != "seed-rejected") ++out.certified;
    if (row.status == "ok") ++out.traced;
  }
  out.spectrum_witness = out.traced > 0;
  return out;
}

}  // namespace blochpert
