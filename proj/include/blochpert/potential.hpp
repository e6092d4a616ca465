#pragma once

// Finite Fourier representation of the periodic potential and its
// restriction to integer multiples of a dual direction delta.

#include <map>
#include <vector>

#include "blochpert/common.hpp"
#include "blochpert/lattice.hpp"

namespace blochpert {

class FourierPotential {
 public:
  FourierPotential() = default;

  // Entries must be hermitian-closed (q_{-g} = conj q_g) and omit g = 0.
  FourierPotential(const DualLattice& gamma, int smoothness,
                   const std::map<Coords, cplx>& entries)
      : gamma_(gamma), s_(smoothness), coeffs_(entries) {
    validate();
  }

  const DualLattice& lattice() const { return gamma_; }
  int smoothness() const { return s_; }
  const std::map<Coords, cplx>& coeffs() const { return coeffs_; }

  cplx value(const Coords& g) const {
    auto it = coeffs_.find(g);
    return it == coeffs_.end() ? cplx(0, 0) : it->second;
  }

  // sup-norm proxy M = sum |q_g|
  double sup_bound() const {
    double m = 0;
    for (const auto& [g, q] : coeffs_) m += std::abs(q);
    return m;
  }

  double support_radius() const {
    double r = 0;
    for (const auto& [g, q] : coeffs_) r = std::max(r, gamma_.cartesian(g).norm());
    return r;
  }

  cplx evaluate(const Vec& x) const {
    cplx acc(0, 0);
    for (const auto& [g, q] : coeffs_) {
      double phase = gamma_.cartesian(g).dot(x);
      acc += q * cplx(std::cos(phase), std::sin(phase));
    }
    return acc;
  }

  bool empty() const { return coeffs_.empty(); }

 private:
  void validate() const {
    for (const auto& [g, q] : coeffs_) {
      if (is_zero(g))
        throw ConfigError("potential must have zero mean (q_0 omitted)");
      auto it = coeffs_.find(negate(g));
      if (it == coeffs_.end())
        throw ConfigError("missing conjugate coefficient for " + coords_str(g));
      if (std::abs(it->second - std::conj(q)) > 1e-12 * (1.0 + std::abs(q)))
        throw ConfigError("coefficients at " + coords_str(g) +
                          " violate hermitian symmetry");
    }
  }

  DualLattice gamma_;
  int s_ = 0;
  std::map<Coords, cplx> coeffs_;
};

// Coefficients restricted to 0 < |g| < radius.
inline FourierPotential truncate(const FourierPotential& q, double radius) {
  if (!(radius > 0)) throw Error(ErrorKind::Domain, "truncate: radius must be > 0");
  std::map<Coords, cplx> kept;
  for (const auto& [g, c] : q.coeffs())
    if (q.lattice().cartesian(g).norm() < radius) kept[g] = c;
  return FourierPotential(q.lattice(), q.smoothness(), kept);
}

// Exact sum of |q_g| over |g| >= radius within the stored support.
inline double tail_bound(const FourierPotential& q, double radius) {
  double t = 0;
  for (const auto& [g, c] : q.coeffs())
    if (q.lattice().cartesian(g).norm() >= radius) t += std::abs(c);
  return t;
}

struct DirectionalPotential {
  Coords delta_coords;
  std::map<long long, cplx> line_coeffs;  // n -> q_{n delta}

  cplx value(long long n) const {
    auto it = line_coeffs.find(n);
    return it == line_coeffs.end() ? cplx(0, 0) : it->second;
  }

  double sup_bound() const {
    double m = 0;
    for (const auto& [n, q] : line_coeffs) m += std::abs(q);
    return m;
  }

  long long max_index() const {
    long long m = 0;
    for (const auto& [n, q] : line_coeffs) m = std::max(m, std::llabs(n));
    return m;
  }

  cplx evaluate(double zeta) const {
    cplx acc(0, 0);
    for (const auto& [n, q] : line_coeffs)
      acc += q * cplx(std::cos(n * zeta), std::sin(n * zeta));
    return acc;
  }
};

// Extract the coefficients at integer multiples of delta.
inline DirectionalPotential directional(const FourierPotential& q, const DeltaFrame& frame) {
  DirectionalPotential dp;
  dp.delta_coords = frame.delta_coords;
  const Coords& dc = frame.delta_coords;
  int pivot = 0;
  while (dc[pivot] == 0) ++pivot;
  for (const auto& [g, c] : q.coeffs()) {
    if (g[pivot] % dc[pivot] != 0) continue;
    long long n = g[pivot] / dc[pivot];
    bool multiple = true;
    for (size_t i = 0; i < g.size(); ++i)
      if (g[i] != n * dc[i]) {
        multiple = false;
        break;
      }
    if (multiple) dp.line_coeffs[n] = c;
  }
  return dp;
}

// Modes of q off the delta line, resolved in the frame: q_{gamma1} with
// gamma1 = beta1 + (n1 - (beta1,delta*)/2pi) delta and beta1 != 0.
struct OffLineMode {
  Coords beta_coords;  // in the Gamma_delta basis, nonzero
  long long n1 = 0;
  cplx q;
  Coords gamma_coords;
};

inline std::vector<OffLineMode> off_line_modes(const FourierPotential& q,
                                               const DeltaFrame& frame) {
  std::vector<OffLineMode> out;
  for (const auto& [g, c] : q.coeffs()) {
    Vec gc = frame.gamma.cartesian(g);
    double sg = gc.dot(frame.delta) / frame.delta.squaredNorm();
    Vec b = gc - sg * frame.delta;
    Coords bc = frame.gd_coords_of(b);
    if (is_zero(bc)) continue;
    double n1 = gc.dot(frame.delta_star) / kTwoPi;
    double r = std::round(n1);
    if (std::abs(n1 - r) > 1e-8)
      throw NumericalFailure("off-line mode index not integral");
    OffLineMode m;
    m.beta_coords = bc;
    m.n1 = static_cast<long long>(r);
    m.q = c;
    m.gamma_coords = g;
    out.push_back(m);
  }
  return out;
}

}  // namespace blochpert
