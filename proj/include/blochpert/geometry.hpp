#pragma once

// The exponent hierarchy (kappa, alpha, alpha_k, p, p1, k1, k2, eps1) and the
// resonance classification of shell points against the diffraction-plane
// neighborhoods V_gamma(thr_k).

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "blochpert/common.hpp"
#include "blochpert/lattice.hpp"
#include "blochpert/linalg.hpp"

namespace blochpert {

enum class ParamMode { Paper, ResonanceSec6 };

struct ParamOverrides {
  std::vector<double> thresholds;  // per k = 1..d, strictly increasing
  std::optional<double> series_radius;
  std::optional<double> dir_radius;
  std::optional<double> eps1;
  std::optional<double> block_b_radius;
  std::optional<double> block_a_radius;
  std::optional<double> ladder_base;
  std::optional<int> known_order;      // series order for known parts F
  std::optional<int> known_order_res;  // correction order for known parts E
  std::optional<int> site_cap;
  std::optional<int> hill_basis;  // half-size M of the 1-D Galerkin basis
};

// Smoothness floor used as the default declared s.
inline double default_smoothness(int d, ParamMode mode) {
  double p3 = std::pow(3.0, d);
  if (mode == ParamMode::ResonanceSec6) return 6.0 * p3 * (d + 1) * (d + 1) + d;
  return 0.5 * (3.0 * d - 1) * (p3 + d + 2) + d * p3 / 4.0 + d + 6;
}

struct AsymptoticParams;
inline bool params_defaults_ok(const AsymptoticParams& pr);

struct AsymptoticParams {
  double rho = 0.0;
  int d = 0;
  ParamMode mode = ParamMode::Paper;
  double s = 0.0;  // declared smoothness index
  double kappa = 0.0;
  double alpha = 0.0;
  std::vector<double> alphas;  // alphas[k] = 3^k alpha, k = 0..d+1
  double p = 0.0;
  int p1 = 0;
  int k1 = 0;
  int k2 = 0;
  double c4 = 1.0;
  ParamOverrides overrides;

  AsymptoticParams() = default;
  AsymptoticParams(int dim, double rho_, ParamMode m = ParamMode::Paper,
                   double smoothness = 0.0, ParamOverrides ov = {})
      : rho(rho_), d(dim), mode(m), overrides(std::move(ov)) {
    if (dim < 2) throw ConfigError("dimension must be >= 2");
    if (!(rho_ > 1.0)) throw ConfigError("rho must exceed 1");
    s = smoothness > 0 ? smoothness : default_smoothness(dim, m);
    kappa = (m == ParamMode::ResonanceSec6) ? 4.0 * std::pow(3.0, d) * (d + 1)
                                            : std::pow(3.0, d) + d + 2;
    alpha = 1.0 / kappa;
    alphas.resize(d + 2);
    for (int k = 0; k <= d + 1; ++k) alphas[k] = std::pow(3.0, k) * alpha;
    p = s - d;
    if (!(p > 0)) throw ConfigError("smoothness must exceed the dimension");
    p1 = static_cast<int>(std::floor(p / 3.0)) + 1;
    k1 = static_cast<int>(std::floor(d / (3.0 * alpha))) + 2;
    k2 = static_cast<int>(std::floor(d / (9.0 * alpha))) + 2;
    if (!overrides.thresholds.empty()) {
      if (static_cast<int>(overrides.thresholds.size()) != d)
        throw ConfigError("threshold overrides must supply one value per k = 1..d");
      for (int k = 1; k < d; ++k)
        if (!(overrides.thresholds[k] > overrides.thresholds[k - 1]))
          throw ConfigError("threshold overrides must be strictly increasing");
    }
    // the defining inequalities must hold when s comes from the mode default;
    // user-declared smoothness is reported by selfcheck instead
    if (smoothness <= 0 && !params_defaults_ok(*this))
      throw NumericalFailure("exponent hierarchy inequalities failed at defaults");
  }

  double threshold(int k) const {
    if (k < 1 || k > d + 1) throw IndexOutOfRange("resonance order k");
    if (!overrides.thresholds.empty() && k <= d)
      return overrides.thresholds[k - 1];
    return c4 * std::pow(rho, alphas[k]);
  }

  double series_radius() const {
    return overrides.series_radius.value_or(std::pow(rho, alpha));
  }
  double dir_radius() const {
    return overrides.dir_radius.value_or(p * std::pow(rho, alpha));
  }
  double eps1() const {
    return overrides.eps1.value_or(std::pow(rho, -d - 2.0 * alpha));
  }
  double block_b_radius(int k) const {
    return overrides.block_b_radius.value_or(
        0.5 * std::pow(rho, 0.5 * alphas[std::min(k + 1, d + 1)]));
  }
  double block_a_radius() const {
    return overrides.block_a_radius.value_or(p1 * std::pow(rho, alpha));
  }
  int known_order() const {
    int cap = static_cast<int>(std::floor(p / 3.0));
    return std::min(overrides.known_order.value_or(k1), cap);
  }
  int known_order_res() const { return overrides.known_order_res.value_or(k2); }
  int site_cap() const { return overrides.site_cap.value_or(2000); }
  int hill_basis() const { return overrides.hill_basis.value_or(32); }

  // Base radius of the correction ladder; later rungs grow by factors of 10.
  double ladder_base(double delta_norm) const {
    if (overrides.ladder_base) return *overrides.ladder_base;
    if (mode == ParamMode::ResonanceSec6) {
      double n1 = std::floor((p - kappa * (3.0 * d - 1) / 2.0 -
                              d * std::pow(3.0, d) / 4.0 - 3.0) / 9.0);
      return std::pow(10.0, n1 - p) * std::pow(rho, 0.5 * alphas[2]);
    }
    return std::pow(rho, alphas[1]) / (2.0 * delta_norm) + 2.0 * delta_norm;
  }

  bool in_shell(const Vec& x) const {
    double n = x.norm();
    return n > 0.5 * rho && n < 1.5 * rho;
  }
  bool in_trimmed_shell(const Vec& x) const {
    double trim = std::pow(rho, alphas[1] - 1.0);
    double n = x.norm();
    return n > 0.5 * rho + trim && n < 1.5 * rho - trim;
  }
};

struct InVResult {
  bool inside = false;
  double margin = 0.0;  // | |x|^2 - |x+b|^2 | - threshold
};

inline InVResult in_V(const Vec& x, const Vec& b, double threshold, double rho) {
  InVResult r;
  double diff = std::abs(x.squaredNorm() - (x + b).squaredNorm());
  double n = x.norm();
  r.inside = diff <= threshold && n > 0.5 * rho && n < 1.5 * rho;
  r.margin = diff - threshold;
  return r;
}

enum class DomainKind { NonResonance, Resonance };

struct DomainLabel {
  DomainKind kind = DomainKind::NonResonance;
  int k = 0;
  std::vector<Coords> directions;
  std::vector<Vec> direction_carts;
  std::vector<double> margins;  // vs the order-k threshold, negative inside
  bool single_resonance = false;
};

// Precomputes the direction list Gamma(dir_radius) ordered by increasing
// norm with lexicographic tie-break, for repeated classification.
class Classifier {
 public:
  Classifier(const AsymptoticParams& params, const DualLattice& gamma)
      : params_(params), gamma_(gamma) {
    auto coords = enumerate_ball(gamma, params.dir_radius(), true);
    dirs_.reserve(coords.size());
    for (auto& c : coords) dirs_.push_back({c, gamma.cartesian(c)});
    std::stable_sort(dirs_.begin(), dirs_.end(),
                     [](const Dir& a, const Dir& b) {
                       double na = a.cart.squaredNorm(), nb = b.cart.squaredNorm();
                       if (na != nb) return na < nb;
                       return a.coords < b.coords;
                     });
  }

  const AsymptoticParams& params() const { return params_; }

  DomainLabel classify(const Vec& x) const {
    if (!params_.in_shell(x))
      throw OutOfShell("|x| = " + std::to_string(x.norm()));
    const int d = params_.d;
    std::vector<double> diff(dirs_.size());
    double x2 = x.squaredNorm();
    for (size_t i = 0; i < dirs_.size(); ++i)
      diff[i] = std::abs(x2 - (x + dirs_[i].cart).squaredNorm());

    DomainLabel label;
    for (int k = d; k >= 1; --k) {
      double thr = params_.threshold(k);
      auto picked = independent_subset(diff, thr, k);
      if (static_cast<int>(picked.size()) == k) {
        label.kind = DomainKind::Resonance;
        label.k = k;
        for (size_t idx : picked) {
          label.directions.push_back(dirs_[idx].coords);
          label.direction_carts.push_back(dirs_[idx].cart);
          label.margins.push_back(diff[idx] - thr);
        }
        if (k == 1) {
          auto pair2 = independent_subset(diff, params_.threshold(2), 2);
          label.single_resonance = pair2.size() < 2;
        }
        return label;
      }
    }
    label.kind = DomainKind::NonResonance;
    label.k = 0;
    return label;
  }

 private:
  struct Dir {
    Coords coords;
    Vec cart;
  };

  // First k linearly independent directions (in search order) whose plane
  // margin passes thr; returns fewer if rank is deficient.
  std::vector<size_t> independent_subset(const std::vector<double>& diff,
                                         double thr, int k) const {
    std::vector<size_t> picked;
    std::vector<Vec> rows;
    for (size_t i = 0; i < dirs_.size() && static_cast<int>(picked.size()) < k; ++i) {
      if (diff[i] > thr) continue;
      rows.push_back(dirs_[i].cart);
      if (numeric_rank(rows) == static_cast<int>(rows.size())) {
        picked.push_back(i);
      } else {
        rows.pop_back();
      }
    }
    return picked;
  }

  AsymptoticParams params_;
  DualLattice gamma_;
  std::vector<Dir> dirs_;
};

inline DomainLabel classify(const Vec& x, const AsymptoticParams& params,
                            const DualLattice& gamma) {
  return Classifier(params, gamma).classify(x);
}

struct InequalityCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool strict = true;
  bool pass = false;
  double slack = 0.0;
};

struct ParamReport {
  std::vector<InequalityCheck> checks;
  bool all_pass = true;
};

inline ParamReport check_param_inequalities(const AsymptoticParams& pr) {
  ParamReport rep;
  auto add = [&](const std::string& name, double lhs, double rhs, bool strict = true) {
    InequalityCheck c{name, lhs, rhs, strict, false, rhs - lhs};
    c.pass = strict ? lhs < rhs : lhs <= rhs;
    rep.checks.push_back(c);
    rep.all_pass = rep.all_pass && c.pass;
  };
  const auto& a = pr.alphas;
  add("alpha1 + d*alpha < 1 - alpha", a[1] + pr.d * pr.alpha, 1.0 - pr.alpha);
  add("d*alpha < alpha_d / 2", pr.d * pr.alpha, 0.5 * a[pr.d]);
  for (int k = 1; k <= pr.d; ++k) {
    add("alpha_" + std::to_string(k) + " + (k-1)alpha < 1",
        a[k] + (k - 1) * pr.alpha, 1.0);
    add("alpha_" + std::to_string(k + 1) + " > 2(alpha_" + std::to_string(k) +
            " + (k-1)alpha)",
        2.0 * (a[k] + (k - 1) * pr.alpha), a[k + 1]);
  }
  add("k1 <= (p - kappa(d-1)/2)/3", pr.k1,
      (pr.p - 0.5 * pr.kappa * (pr.d - 1)) / 3.0, false);
  add("3 k1 alpha > d + 2 alpha", pr.d + 2.0 * pr.alpha, 3.0 * pr.k1 * pr.alpha);
  if (pr.mode == ParamMode::ResonanceSec6) {
    add("k2 < (p - kappa(d-1)/2)/9", pr.k2,
        (pr.p - 0.5 * pr.kappa * (pr.d - 1)) / 9.0);
    add("k2 alpha_2 > d + 2 alpha", pr.d + 2.0 * pr.alpha, pr.k2 * a[2]);
    InequalityCheck c{"4(d+1) alpha_d == 1", 4.0 * (pr.d + 1) * a[pr.d], 1.0,
                      false, false, 0.0};
    c.pass = std::abs(c.lhs - 1.0) < 1e-12;
    rep.checks.push_back(c);
    rep.all_pass = rep.all_pass && c.pass;
  }
  return rep;
}

inline bool params_defaults_ok(const AsymptoticParams& pr) {
  return check_param_inequalities(pr).all_pass;
}

}  // namespace blochpert
