#pragma once

// Non-resonance eigenvalue series: the k-fold sums S_k, the recursion
// F_s = sum_{m<=s} S_m(|x|^2 + F_{s-1}, x), and the matching Bloch-function
// coefficient maps (S_k with its leading coefficient replaced by a shifted
// plane wave).

#include <map>
#include <vector>

#include "blochpert/common.hpp"
#include "blochpert/geometry.hpp"
#include "blochpert/lattice.hpp"
#include "blochpert/oracle.hpp"
#include "blochpert/potential.hpp"

namespace blochpert {

namespace detail {

struct SeriesMode {
  const std::vector<std::pair<Coords, Vec>>* support = nullptr;  // trig modes of P
  const FourierPotential* q = nullptr;
  double denom_floor = 0.0;
};

// Depth-first walk over tuples (g_1..g_k) with all partial sums nonzero.
// `closing` receives the running data at depth k and accumulates.
template <typename Leaf>
inline void walk_tuples(const SeriesMode& sm, const Vec& x, double a, int k,
                        int depth, Coords& partial, Vec& partial_cart,
                        cplx coeff, double denom, Leaf&& leaf) {
  for (const auto& [g, gc] : *sm.support) {
    Coords np = partial + g;
    if (is_zero(np)) continue;  // condition: partial sums never vanish
    Vec nc = partial_cart + gc;
    double dj = a - (x - nc).squaredNorm();
    if (std::abs(dj) < sm.denom_floor)
      throw SmallDenominator("tuple " + coords_str(np) + " denominator " +
                             std::to_string(dj));
    cplx ncoeff = coeff * sm.q->value(g);
    double ndenom = denom * dj;
    if (depth == k) {
      leaf(np, nc, ncoeff, ndenom);
    } else {
      walk_tuples(sm, x, a, k, depth + 1, np, nc, ncoeff, ndenom, leaf);
    }
    // references partial/partial_cart are not mutated: np/nc are locals
  }
}

inline SeriesMode series_mode(const FourierPotential& P,
                              std::vector<std::pair<Coords, Vec>>& storage,
                              const AsymptoticParams& params) {
  storage.clear();
  for (const auto& [g, c] : P.coeffs())
    storage.push_back({g, P.lattice().cartesian(g)});
  SeriesMode sm;
  sm.support = &storage;
  sm.q = &P;
  sm.denom_floor = 1e-8 * params.rho;
  return sm;
}

inline double take_real(cplx acc, const char* what) {
  if (std::abs(acc.imag()) > 1e-8 * std::max(1.0, std::abs(acc.real())))
    throw NumericalFailure(std::string(what) + " has imaginary residue " +
                           std::to_string(acc.imag()));
  return acc.real();
}

}  // namespace detail

// S_k(a, x): k-fold sum with closing coefficient q_{-g_1-...-g_k}.
inline double S_k_term(double a, const Vec& x, const FourierPotential& q,
                       const AsymptoticParams& params, int k) {
  if (k < 1) throw OrderTooHigh("S_k needs k >= 1");
  if (std::abs(a - x.squaredNorm()) >= 0.5 * params.threshold(1))
    throw Error(ErrorKind::Domain,
                "S_k requires |a - |x|^2| < half the first resonance width");
  FourierPotential P = truncate(q, params.series_radius());
  if (P.empty()) return 0.0;
  std::vector<std::pair<Coords, Vec>> storage;
  auto sm = detail::series_mode(P, storage, params);
  cplx acc(0, 0);
  Coords zero(q.lattice().d, 0);
  Vec zc = Vec::Zero(q.lattice().d);
  detail::walk_tuples(sm, x, a, k, 1, zero, zc, cplx(1, 0), 1.0,
                      [&](const Coords& total, const Vec&, cplx coeff, double denom) {
                        cplx closing = P.value(negate(total));
                        if (closing != cplx(0, 0)) acc += coeff * closing / denom;
                      });
  return detail::take_real(acc, "S_k");
}

struct PerturbationSeries {
  Vec x;
  int order = 0;
  std::vector<double> F;                   // F[0] = 0, ..., F[order-1]
  std::vector<std::vector<double>> S_terms;  // S_terms[s] = {S_1..S_s} at a_s
  double lambda_pred = 0.0;
};

inline PerturbationSeries F_series(const Vec& x, const FourierPotential& q,
                                   const AsymptoticParams& params, int k) {
  if (k < 1 || k > static_cast<int>(std::floor(params.p / 3.0)))
    throw OrderTooHigh("order " + std::to_string(k) + " exceeds floor(p/3)");
  PerturbationSeries ps;
  ps.x = x;
  ps.order = k;
  ps.F.assign(k, 0.0);
  ps.S_terms.assign(k, {});
  double x2 = x.squaredNorm();
  for (int s = 1; s < k; ++s) {
    double a = x2 + ps.F[s - 1];
    double acc = 0.0;
    for (int m = 1; m <= s; ++m) {
      double sm = S_k_term(a, x, q, params, m);
      ps.S_terms[s].push_back(sm);
      acc += sm;
    }
    ps.F[s] = acc;
  }
  ps.lambda_pred = x2 + ps.F[k - 1];
  return ps;
}

struct BlochSeries {
  Vec x;
  int order = 0;
  std::map<Coords, cplx> coefficients;  // absolute lattice keys, normalized
  double norm_factor = 1.0;
};

// Order-k Bloch coefficient map: the spike at gamma plus the series terms,
// normalized by (1 + ||tail||)^{-1}.
inline BlochSeries bloch_series(const Vec& x, const FourierPotential& q,
                                const AsymptoticParams& params, int k) {
  BlochSeries bs;
  bs.x = x;
  bs.order = k;
  auto [gcoords, t] = split_x(x, q.lattice());
  if (k < 1) throw OrderTooHigh("order must be >= 1");

  std::map<Coords, cplx> tail;
  if (k >= 2) {
    PerturbationSeries ps = F_series(x, q, params, k - 1);
    double a = x.squaredNorm() + ps.F[k - 2];
    FourierPotential P = truncate(q, params.series_radius());
    if (!P.empty()) {
      std::vector<std::pair<Coords, Vec>> storage;
      auto sm = detail::series_mode(P, storage, params);
      Coords zero(q.lattice().d, 0);
      Vec zc = Vec::Zero(q.lattice().d);
      for (int m = 1; m <= k - 1; ++m) {
        // first factor q_{g_1} replaced by the plane wave at gamma - g_1:
        // walk the remaining tuple with coeff 1 and divide by q_{g_1} lazily.
        for (const auto& [g1, c1] : P.coeffs()) {
          Coords p1 = g1;
          Vec p1c = P.lattice().cartesian(g1);
          double d1 = a - (x - p1c).squaredNorm();
          if (std::abs(d1) < sm.denom_floor)
            throw SmallDenominator("leading denominator");
          Coords key = gcoords - g1;
          if (m == 1) {
            cplx closing = P.value(negate(p1));
            if (closing != cplx(0, 0)) tail[key] += closing / d1;
          } else {
            detail::walk_tuples(
                sm, x, a, m - 1, 1, p1, p1c, cplx(1, 0), d1,
                [&](const Coords& total, const Vec&, cplx coeff, double denom) {
                  cplx closing = P.value(negate(total));
                  if (closing != cplx(0, 0)) tail[key] += coeff * closing / denom;
                });
          }
        }
      }
    }
  }
  // The spike and the tail are orthogonal, so dividing by
  // sqrt(1 + ||tail||^2) makes the map exactly unit norm.
  double tail_norm2 = 0.0;
  for (auto& [g, c] : tail) tail_norm2 += std::norm(c);
  bs.norm_factor = 1.0 / std::sqrt(1.0 + tail_norm2);
  bs.coefficients[gcoords] = bs.norm_factor;
  for (auto& [g, c] : tail) {
    if (g == gcoords) throw NumericalFailure("tail hit the spike index");
    bs.coefficients[g] += bs.norm_factor * c;
  }
  return bs;
}

struct PredictionMatch {
  int N = -1;
  double lambda = 0.0;
  double error = 0.0;  // lambda_oracle - lambda_pred
  double gap_to_next = 0.0;
};

inline PredictionMatch predict_and_match(const Vec& x, const FourierPotential& q,
                                         const AsymptoticParams& params, int k,
                                         const OracleSpectrum& spectrum) {
  PerturbationSeries ps = F_series(x, q, params, k);
  if (spectrum.eigenvalues.size() == 0 || !spectrum.covers(ps.lambda_pred))
    throw NoCandidate("oracle window does not cover the prediction");
  MatchResult m = match(ps.lambda_pred, spectrum,
                        spectrum.window_hi - spectrum.window_lo);
  PredictionMatch out;
  out.N = m.N;
  out.lambda = m.lambda;
  out.error = m.lambda - ps.lambda_pred;
  out.gap_to_next = m.gap_to_next;
  return out;
}

}  // namespace blochpert
