#pragma once

// Finite resonance matrices: plane-wave sites x + b + a with b in the integer
// span of the resonance directions and a a short lattice vector, the
// Hermitian matrix with q couplings, and its spectrum.

#include <algorithm>
#include <map>
#include <vector>

#include "blochpert/common.hpp"
#include "blochpert/geometry.hpp"
#include "blochpert/lattice.hpp"
#include "blochpert/linalg.hpp"
#include "blochpert/potential.hpp"

namespace blochpert {

struct SiteSet {
  Vec x;
  std::vector<Coords> directions;
  std::vector<Coords> offsets;  // h_i - gamma(x), lattice coordinates
  std::vector<Vec> sites;       // h_i + t
  int self_index = -1;
};

inline SiteSet build_sites(const Vec& x, const std::vector<Coords>& directions,
                           const AsymptoticParams& params, const DualLattice& gamma) {
  if (directions.empty()) throw NeedDirections("resonance block needs directions");
  const int k = static_cast<int>(directions.size());
  const double b_rad = params.block_b_radius(k);
  const double a_rad = params.block_a_radius();

  std::vector<Vec> dir_carts;
  for (const auto& dcoords : directions) dir_carts.push_back(gamma.cartesian(dcoords));

  // integer combinations b = sum n_i gamma_i with |b| < b_rad
  Mat D(k, gamma.d);
  for (int i = 0; i < k; ++i) D.row(i) = dir_carts[i];
  Mat G = D * D.transpose();
  if (numeric_rank(dir_carts) < k)
    throw NeedDirections("directions are linearly dependent");
  Mat Ginv = G.inverse();
  std::vector<long long> nb(k);
  for (int i = 0; i < k; ++i)
    nb[i] = static_cast<long long>(std::ceil(std::sqrt(Ginv(i, i)) * b_rad)) + 1;

  std::map<Coords, Vec> offset_set;
  std::vector<Coords> a_list = enumerate_ball(gamma, a_rad, false);
  Coords n(k);
  for (int i = 0; i < k; ++i) n[i] = -nb[i];
  while (true) {
    Vec b = Vec::Zero(gamma.d);
    for (int i = 0; i < k; ++i) b += static_cast<double>(n[i]) * dir_carts[i];
    if (b.norm() < b_rad) {
      Coords bcoords(gamma.d, 0);
      for (int i = 0; i < k; ++i)
        for (int c = 0; c < gamma.d; ++c) bcoords[c] += n[i] * directions[i][c];
      for (const Coords& a : a_list) {
        Coords off = bcoords + a;
        if (!offset_set.count(off)) offset_set[off] = gamma.cartesian(off);
        if (static_cast<int>(offset_set.size()) > params.site_cap())
          throw TooLarge("resonance block exceeds site cap of " +
                         std::to_string(params.site_cap()));
      }
    }
    int i = k - 1;
    while (i >= 0 && n[i] == nb[i]) {
      n[i] = -nb[i];
      --i;
    }
    if (i < 0) break;
    ++n[i];
  }

  SiteSet s;
  s.x = x;
  s.directions = directions;
  std::vector<std::pair<Coords, Vec>> items(offset_set.begin(), offset_set.end());
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& a, const auto& b) {
                     double na = a.second.squaredNorm(), nbn = b.second.squaredNorm();
                     if (na != nbn) return na < nbn;
                     return a.first < b.first;
                   });
  for (auto& [off, cart] : items) {
    if (is_zero(off)) s.self_index = static_cast<int>(s.offsets.size());
    s.offsets.push_back(off);
    s.sites.push_back(x + cart);
  }
  if (s.self_index < 0) throw NumericalFailure("x missing from its own site set");
  return s;
}

struct ResonanceBlock {
  SiteSet sites;
  CMat C;
  Vec eigenvalues;  // ascending, filled by res_eigenvalues
};

inline ResonanceBlock assemble_C(const SiteSet& sites, const FourierPotential& q) {
  ResonanceBlock b;
  b.sites = sites;
  const int n = static_cast<int>(sites.sites.size());
  b.C = CMat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    b.C(i, i) = sites.sites[i].squaredNorm();
    for (int j = 0; j < i; ++j) {
      cplx qij = q.value(sites.offsets[i] - sites.offsets[j]);
      b.C(i, j) = qij;
      b.C(j, i) = std::conj(qij);
    }
  }
  return b;
}

inline Vec res_eigenvalues(ResonanceBlock& block) {
  block.eigenvalues = herm_eigen(block.C, false).values;
  return block.eigenvalues;
}

// Convenience: spectrum of the block at x with the given directions.
inline Vec block_spectrum(const Vec& x, const std::vector<Coords>& directions,
                          const AsymptoticParams& params, const DualLattice& gamma,
                          const FourierPotential& q) {
  SiteSet s = build_sites(x, directions, params, gamma);
  ResonanceBlock b = assemble_C(s, q);
  return res_eigenvalues(b);
}

struct LipschitzProbe {
  double lhs = 0.0;  // max_i |r_i(x) - r_i(x')|
  double rhs = 0.0;  // 2 rho^{alpha_d / 2} |x - x'|
  bool pass = false;
};

// r_i = lambda_i - |.|^2 computed on the same site offsets at x and x'.
inline LipschitzProbe r_lipschitz_probe(const std::vector<Coords>& directions,
                                        const AsymptoticParams& params,
                                        const DualLattice& gamma,
                                        const FourierPotential& q, const Vec& x,
                                        const Vec& xp) {
  SiteSet sx = build_sites(x, directions, params, gamma);
  SiteSet sxp = sx;
  sxp.x = xp;
  for (size_t i = 0; i < sxp.offsets.size(); ++i)
    sxp.sites[i] = xp + gamma.cartesian(sxp.offsets[i]);

  ResonanceBlock bx = assemble_C(sx, q);
  ResonanceBlock bxp = assemble_C(sxp, q);
  Vec lx = res_eigenvalues(bx);
  Vec lxp = res_eigenvalues(bxp);

  LipschitzProbe pr;
  for (int i = 0; i < lx.size(); ++i) {
    double ri = lx[i] - x.squaredNorm();
    double rip = lxp[i] - xp.squaredNorm();
    pr.lhs = std::max(pr.lhs, std::abs(ri - rip));
  }
  pr.rhs = 2.0 * std::pow(params.rho, 0.5 * params.alphas[params.d]) * (x - xp).norm();
  pr.pass = pr.lhs <= pr.rhs + 1e-12;
  return pr;
}

}  // namespace blochpert
