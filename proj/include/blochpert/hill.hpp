#pragma once

// The twisted 1-D operator T_v(Q) on [0,2pi], its Galerkin eigenpairs
// mu_j(v), phi_{j,v}, the transfer coefficients a and A between fibers at
// different twists, and the single-resonance correction series E_s built
// from chains of A factors over (j, beta) nodes.

#include <algorithm>
#include <map>
#include <memory>
#include <vector>

#include "blochpert/common.hpp"
#include "blochpert/geometry.hpp"
#include "blochpert/lattice.hpp"
#include "blochpert/linalg.hpp"
#include "blochpert/potential.hpp"

namespace blochpert {

struct HillSpectrum {
  Coords delta_coords;
  double delta_norm = 0.0;
  double v = 0.0;
  int M = 0;        // basis indices m in [-M, M]
  double supQ = 0;  // sum |q_{n delta}|
  std::vector<double> mu;  // mu[j + M]
  CMat phi;                // phi(m + M, j + M) = (phi_j, e^{i(m+v)zeta})

  double mu_of(long long j) const {
    if (std::llabs(j) > M) throw IndexOutOfRange("hill label j = " + std::to_string(j));
    return mu[static_cast<size_t>(j + M)];
  }
  cplx coeff(long long j, long long m) const {
    if (std::llabs(j) > M || std::llabs(m) > M)
      throw IndexOutOfRange("hill coefficient index");
    return phi(static_cast<int>(m + M), static_cast<int>(j + M));
  }
};

inline HillSpectrum solve_hill(const DirectionalPotential& Q, double delta_norm,
                               double v, int M) {
  if (!(v >= 0.0 && v < 1.0))
    throw Error(ErrorKind::Domain, "twist v must lie in [0,1)");
  if (M < 8 + Q.max_index())
    throw BasisTooSmall("hill basis M must be >= 8 + support radius of Q");

  const int n = 2 * M + 1;
  CMat H = CMat::Zero(n, n);
  for (int mi = -M; mi <= M; ++mi) {
    double kin = (mi + v) * delta_norm;
    H(mi + M, mi + M) = kin * kin;
    for (int mj = -M; mj < mi; ++mj) {
      cplx c = Q.value(mi - mj);
      if (c != cplx(0, 0)) {
        H(mi + M, mj + M) = c;
        H(mj + M, mi + M) = std::conj(c);
      }
    }
  }
  HermEigen he = herm_eigen(H, true);

  HillSpectrum hs;
  hs.delta_coords = Q.delta_coords;
  hs.delta_norm = delta_norm;
  hs.v = v;
  hs.M = M;
  hs.supQ = Q.sup_bound();
  hs.mu.assign(n, 0.0);
  hs.phi.resize(n, n);

  // Label eigenvectors by dominant Fourier index; on collision fall back to
  // pairing the ascending spectrum with the ascending unperturbed values.
  std::vector<int> label(n, 0);
  bool collision = false;
  std::vector<char> claimed(n, 0);
  for (int c = 0; c < n; ++c) {
    int imax = 0;
    double best = 0;
    for (int m = 0; m < n; ++m) {
      double a = std::norm(he.vectors(m, c));
      if (a > best) {
        best = a;
        imax = m;
      }
    }
    if (best < 0.4)
      throw LabelingAmbiguity("dominance " + std::to_string(best) + " below 0.4");
    label[c] = imax - M;
    if (claimed[imax]) collision = true;
    claimed[imax] = 1;
  }
  if (collision) {
    std::vector<std::pair<double, int>> unpert(n);
    for (int j = -M; j <= M; ++j) {
      double kin = (j + v) * delta_norm;
      unpert[j + M] = {kin * kin, j};
    }
    std::sort(unpert.begin(), unpert.end());
    for (int c = 0; c < n; ++c) label[c] = unpert[c].second;
  }
  for (int c = 0; c < n; ++c) {
    hs.mu[label[c] + M] = he.values[c];
    hs.phi.col(label[c] + M) = he.vectors.col(c);
  }
  return hs;
}

inline double lambda_j_beta(const Vec& beta, const Vec& tau, const HillSpectrum& hill,
                            long long j) {
  return (beta + tau).squaredNorm() + hill.mu_of(j);
}

struct GapCheck {
  bool pass = false;
  double min_gap = 0.0;
  int window = 0;  // gaps inspected over |j| <= window
};

// W(rho) membership on the computed window: all pairwise mu gaps > 2/ln rho.
inline GapCheck gap_check_W(const HillSpectrum& hill, double rho, int window = 0) {
  GapCheck g;
  g.window = window > 0 ? std::min(window, hill.M) : hill.M / 2;
  std::vector<double> vals;
  for (long long j = -g.window; j <= g.window; ++j) vals.push_back(hill.mu_of(j));
  std::sort(vals.begin(), vals.end());
  g.min_gap = std::numeric_limits<double>::infinity();
  for (size_t i = 1; i < vals.size(); ++i)
    g.min_gap = std::min(g.min_gap, vals[i] - vals[i - 1]);
  g.pass = g.min_gap > 2.0 / std::log(rho);
  return g;
}

// a(n1, beta1, j, beta, j+j1, beta+beta1): overlap of e^{i theta zeta} phi_{j,v}
// with phi_{j+j1, v'}, evaluated on the finite Fourier basis.
inline cplx a_coeff(long long n1, const Vec& beta1_cart, long long j, long long j1,
                    const HillSpectrum& hb, const HillSpectrum& hb1,
                    const DeltaFrame& frame) {
  double theta = static_cast<double>(n1) - beta1_cart.dot(frame.delta_star) / kTwoPi;
  double n_real = theta + hb.v - hb1.v;
  double n_round = std::round(n_real);
  if (std::abs(n_real - n_round) > 1e-6)
    throw Error(ErrorKind::Domain, "spectra have incompatible twists");
  long long n = static_cast<long long>(n_round);
  if (std::llabs(n) > 2 * hb.M) throw BasisTooSmall("shift exceeds hill basis");
  long long mlo = std::max<long long>(-hb1.M, -hb.M + n);
  long long mhi = std::min<long long>(hb1.M, hb.M + n);
  cplx acc(0, 0);
  for (long long m = mlo; m <= mhi; ++m)
    acc += hb.coeff(j, m - n) * std::conj(hb1.coeff(j + j1, m));
  return acc;
}

// Cache of Hill spectra indexed by the Gamma_delta offset from a base beta.
class HillCache {
 public:
  HillCache(const DirectionalPotential& Q, const DeltaFrame& frame, double v_base,
            int M)
      : Q_(Q), frame_(&frame), v_base_(v_base), M_(M) {}

  double v_of(const Coords& offset) const {
    return frac01(v_base_ -
                  frame_->gd_cartesian(offset).dot(frame_->delta_star) / kTwoPi);
  }

  const HillSpectrum& at(const Coords& offset) {
    auto it = spectra_.find(offset);
    if (it != spectra_.end()) return it->second;
    HillSpectrum hs = solve_hill(Q_, frame_->delta.norm(), v_of(offset), M_);
    return spectra_.emplace(offset, std::move(hs)).first->second;
  }

  const DeltaFrame& frame() const { return *frame_; }
  int M() const { return M_; }

 private:
  DirectionalPotential Q_;
  const DeltaFrame* frame_;
  double v_base_;
  int M_;
  std::map<Coords, HillSpectrum> spectra_;
};

// A(j', beta' -> j'+j1, beta'+beta1) = sum_{n1} q_{gamma1} a(n1, ...), with the
// sum over potential modes whose hyperplane part equals beta1 (nonzero).
inline cplx A_coeff(long long jp, const Coords& betap_offset, long long j1,
                    const Coords& beta1_coords,
                    const std::vector<OffLineMode>& modes, HillCache& hills,
                    double series_radius) {
  if (is_zero(beta1_coords))
    throw UseDirectionalPath("beta1 = 0 couplings belong to the directional operator");
  const DeltaFrame& f = hills.frame();
  Vec beta1_cart = f.gd_cartesian(beta1_coords);
  const HillSpectrum& hb = hills.at(betap_offset);
  const HillSpectrum& hb1 = hills.at(betap_offset + beta1_coords);
  cplx acc(0, 0);
  for (const OffLineMode& m : modes) {
    if (m.beta_coords != beta1_coords) continue;
    if (f.gamma.cartesian(m.gamma_coords).norm() >= series_radius) continue;
    acc += m.q * a_coeff(m.n1, beta1_cart, jp, j1, hb, hb1, f);
  }
  return acc;
}

struct LadderInfo {
  std::vector<double> rungs;  // hop radii actually used (|delta j| * |delta| bound)
  int j_cap = 0;              // node truncation from the finite hill basis
  bool clipped = false;       // true when a rung exceeded the j_cap range
};

struct SingleResCorrection {
  long long j = 0;
  Coords beta_coords;
  double v = 0.0;
  Vec tau;
  double lambda = 0.0;            // lambda_{j,beta}(v,tau)
  std::vector<double> E;          // E[0] = 0, ..., E[k-1]
  double predicted = 0.0;         // lambda + E[k-1]
  LadderInfo ladder;
  GapCheck gap;
};

namespace detail {

struct ChainNode {
  Coords offset;  // Gamma_delta offset from the base beta
  long long j = 0;
  double lambda = 0.0;
};

// Shared engine for the E_s recursion and the resonance Bloch map.
class ChainEngine {
 public:
  ChainEngine(long long j, const Coords& beta_coords, double v, const Vec& tau,
              const FourierPotential& q, const AsymptoticParams& params,
              const DeltaFrame& frame, int max_order)
      : params_(params),
        frame_(frame),
        Q_(directional(q, frame)),
        hills_(Q_, frame, v, params.hill_basis()),
        j_(j),
        beta_coords_(beta_coords),
        tau_(tau) {
    modes_ = off_line_modes(q, frame);
    const HillSpectrum& base = hills_.at(Coords(frame.hd(), 0));
    gap_ = gap_check_W(base, params.rho);
    beta_cart_ = frame.gd_cartesian(beta_coords);
    lambda_base_ = lambda_j_beta(beta_cart_, tau, base, j);

    ladder_.j_cap = params.hill_basis() / 2;
    double base_radius = params.ladder_base(frame.delta.norm());
    int max_rungs = std::max(2, 2 * std::max(1, max_order - 1));
    for (int i = 1; i <= max_rungs; ++i) {
      double r = 9.0 * base_radius * std::pow(10.0, i - 1);
      if (i == 1) r = base_radius * (params_.mode == ParamMode::ResonanceSec6 ? 1.0 : 9.0);
      ladder_.rungs.push_back(r);
      if (r > ladder_.j_cap * frame.delta.norm()) ladder_.clipped = true;
    }

    if (!modes_.empty() && max_order > 1) build_nodes(max_order);
  }

  bool trivial() const { return modes_.empty(); }
  double lambda_base() const { return lambda_base_; }
  const GapCheck& gap() const { return gap_; }
  const LadderInfo& ladder() const { return ladder_; }
  HillCache& hills() { return hills_; }
  const std::vector<ChainNode>& nodes() const { return nodes_; }
  long long base_j() const { return j_; }

  // E_s = sum_{m=1}^{2s} S'_m(lambda + E_{s-1}); returns E[0..k-1].
  std::vector<double> corrections(int k) {
    std::vector<double> E(std::max(1, k), 0.0);
    for (int s = 1; s < k; ++s) {
      double a = lambda_base_ + E[s - 1];
      cplx acc(0, 0);
      std::vector<cplx> f = first_hop(a);
      for (int m = 1; m <= 2 * s; ++m) {
        if (m > 1) f = advance(f, a, rung(m));
        for (size_t n = 0; n < nodes_.size(); ++n)
          if (f[n] != cplx(0, 0)) acc += f[n] * A_to_base(n);
      }
      E[s] = take_real(acc, "E_s");
    }
    return E;
  }

  // Amplitudes of the order-k Bloch map at the chain's first node,
  // sum_{m=1}^{2k} of closed chains, divided by (a - lambda_{n1}).
  std::vector<cplx> bloch_amplitudes(double a, int k, double first_hop_radius) {
    std::vector<cplx> amp(nodes_.size(), cplx(0, 0));
    for (int m = 1; m <= 2 * k; ++m) {
      // B[n] = sum over completions n -> ... -> base of length m
      std::vector<cplx> B(nodes_.size(), cplx(0, 0));
      for (size_t n = 0; n < nodes_.size(); ++n) B[n] = A_to_base(n);
      for (int i = m; i >= 2; --i) B = retreat(B, a, rung(i));
      for (size_t n = 0; n < nodes_.size(); ++n) {
        if (B[n] == cplx(0, 0)) continue;
        // first hop lives in the h1 rectangle; beta jump unrestricted there
        if (std::abs(static_cast<double>(nodes_[n].j - j_)) * frame_.delta.norm() >=
            first_hop_radius)
          continue;
        double den = a - nodes_[n].lambda;
        check_denominator(den);
        amp[n] += B[n] / den;
      }
    }
    return amp;
  }

 private:
  double rung(int i) const {
    return ladder_.rungs[std::min<size_t>(i - 1, ladder_.rungs.size() - 1)];
  }

  void check_denominator(double den) const {
    if (std::abs(den) < 1e-8 * params_.rho)
      throw SmallDenominator("chain denominator " + std::to_string(den));
  }

  void build_nodes(int max_order) {
    int hops = std::max(2, 2 * std::max(1, max_order - 1));
    double reach = (hops + 1) * params_.series_radius();
    std::vector<Coords> offsets = frame_.gd_enumerate_ball(reach, false);
    for (const Coords& off : offsets) {
      for (long long jj = -ladder_.j_cap; jj <= ladder_.j_cap; ++jj) {
        if (is_zero(off) && jj == j_) continue;  // exclude the base pair
        ChainNode n;
        n.offset = off;
        n.j = jj;
        const HillSpectrum& hs = hills_.at(off);
        n.lambda = (beta_cart_ + frame_.gd_cartesian(off) + tau_).squaredNorm() +
                   hs.mu_of(jj);
        nodes_.push_back(n);
      }
    }
  }

  cplx A_hop(const Coords& off_from, long long j_from, const Coords& off_to,
             long long j_to) {
    Coords db = off_to - off_from;
    if (is_zero(db)) return cplx(0, 0);
    auto key = std::make_tuple(off_from, j_from, off_to, j_to);
    auto it = a_memo_.find(key);
    if (it != a_memo_.end()) return it->second;
    cplx v(0, 0);
    bool supported = false;
    for (const OffLineMode& m : modes_)
      if (m.beta_coords == db) {
        supported = true;
        break;
      }
    if (supported)
      v = A_coeff(j_from, off_from, j_to - j_from, db, modes_, hills_,
                  params_.series_radius());
    a_memo_[key] = v;
    return v;
  }

  cplx A_to_base(size_t n) {
    return A_hop(nodes_[n].offset, nodes_[n].j, Coords(frame_.hd(), 0), j_);
  }

  std::vector<cplx> first_hop(double a) {
    std::vector<cplx> f(nodes_.size(), cplx(0, 0));
    Coords zero(frame_.hd(), 0);
    for (size_t n = 0; n < nodes_.size(); ++n) {
      if (is_zero(nodes_[n].offset)) continue;  // rung 1 requires beta1 != 0
      if (std::abs(static_cast<double>(nodes_[n].j - j_)) * frame_.delta.norm() >=
          rung(1))
        continue;
      cplx A = A_hop(zero, j_, nodes_[n].offset, nodes_[n].j);
      if (A == cplx(0, 0)) continue;
      double den = a - nodes_[n].lambda;
      check_denominator(den);
      f[n] = A / den;
    }
    return f;
  }

  std::vector<cplx> advance(const std::vector<cplx>& f, double a, double hop_radius) {
    std::vector<cplx> g(nodes_.size(), cplx(0, 0));
    for (size_t from = 0; from < nodes_.size(); ++from) {
      if (f[from] == cplx(0, 0)) continue;
      for (size_t to = 0; to < nodes_.size(); ++to) {
        if (nodes_[to].offset == nodes_[from].offset) continue;
        if (std::abs(static_cast<double>(nodes_[to].j - nodes_[from].j)) *
                frame_.delta.norm() >=
            hop_radius)
          continue;
        cplx A = A_hop(nodes_[from].offset, nodes_[from].j, nodes_[to].offset,
                       nodes_[to].j);
        if (A == cplx(0, 0)) continue;
        double den = a - nodes_[to].lambda;
        check_denominator(den);
        g[to] += f[from] * A / den;
      }
    }
    return g;
  }

  // Backward analogue of advance: B'[n] = sum_to A(n->to)/(a-lambda_to) B[to].
  std::vector<cplx> retreat(const std::vector<cplx>& B, double a, double hop_radius) {
    std::vector<cplx> g(nodes_.size(), cplx(0, 0));
    for (size_t from = 0; from < nodes_.size(); ++from) {
      for (size_t to = 0; to < nodes_.size(); ++to) {
        if (B[to] == cplx(0, 0)) continue;
        if (nodes_[to].offset == nodes_[from].offset) continue;
        if (std::abs(static_cast<double>(nodes_[to].j - nodes_[from].j)) *
                frame_.delta.norm() >=
            hop_radius)
          continue;
        cplx A = A_hop(nodes_[from].offset, nodes_[from].j, nodes_[to].offset,
                       nodes_[to].j);
        if (A == cplx(0, 0)) continue;
        double den = a - nodes_[to].lambda;
        check_denominator(den);
        g[from] += A / den * B[to];
      }
    }
    return g;
  }

  static double take_real(cplx acc, const char* what) {
    if (std::abs(acc.imag()) > 1e-8 * std::max(1.0, std::abs(acc.real())))
      throw NumericalFailure(std::string(what) + " has imaginary residue");
    return acc.real();
  }

  AsymptoticParams params_;
  const DeltaFrame& frame_;
  DirectionalPotential Q_;
  HillCache hills_;
  long long j_;
  Coords beta_coords_;
  Vec beta_cart_;
  Vec tau_;
  double lambda_base_ = 0.0;
  GapCheck gap_;
  LadderInfo ladder_;
  std::vector<OffLineMode> modes_;
  std::vector<ChainNode> nodes_;
  std::map<std::tuple<Coords, long long, Coords, long long>, cplx> a_memo_;
};

}  // namespace detail

inline SingleResCorrection E_corrections(long long j, const Coords& beta_coords,
                                         double v, const Vec& tau,
                                         const FourierPotential& q,
                                         const AsymptoticParams& params,
                                         const DeltaFrame& frame, int k) {
  if (k < 1) throw OrderTooHigh("order must be >= 1");
  detail::ChainEngine eng(j, beta_coords, v, tau, q, params, frame, k);
  if (!eng.gap().pass)
    throw OutsideW("hill gap " + std::to_string(eng.gap().min_gap) +
                   " below 2/ln rho");
  SingleResCorrection out;
  out.j = j;
  out.beta_coords = beta_coords;
  out.v = v;
  out.tau = tau;
  out.lambda = eng.lambda_base();
  out.gap = eng.gap();
  out.ladder = eng.ladder();
  out.E = eng.trivial() ? std::vector<double>(k, 0.0) : eng.corrections(k);
  out.predicted = out.lambda + out.E[k - 1];
  return out;
}

struct ResBlochEntry {
  long long j = 0;
  Coords beta_coords;  // absolute coordinates in the Gamma_delta basis
  cplx amplitude;
};

struct ResBlochMap {
  std::vector<ResBlochEntry> entries;  // includes the base spike
  double norm_factor = 1.0;
  long long base_j = 0;
  Coords base_beta;
};

inline ResBlochMap res_bloch(long long j, const Coords& beta_coords, double v,
                             const Vec& tau, const FourierPotential& q,
                             const AsymptoticParams& params, const DeltaFrame& frame,
                             int k) {
  if (k < 1) throw OrderTooHigh("order must be >= 1");
  detail::ChainEngine eng(j, beta_coords, v, tau, q, params, frame, k);
  if (!eng.gap().pass) throw OutsideW("twist outside the gap set W(rho)");

  ResBlochMap map;
  map.base_j = j;
  map.base_beta = beta_coords;

  if (k == 1 || eng.trivial()) {
    map.entries.push_back({j, beta_coords, cplx(1, 0)});
    return map;
  }
  std::vector<double> E = eng.corrections(k);
  double a = eng.lambda_base() + E[k - 1];
  double h1 = params.ladder_base(frame.delta.norm());
  std::vector<cplx> amp = eng.bloch_amplitudes(a, k, h1);
  double tail2 = 0.0;
  for (const cplx& c : amp) tail2 += std::norm(c);
  map.norm_factor = 1.0 / std::sqrt(1.0 + tail2);
  map.entries.push_back({j, beta_coords, cplx(map.norm_factor, 0)});
  const auto& nodes = eng.nodes();
  for (size_t n = 0; n < nodes.size(); ++n) {
    if (amp[n] == cplx(0, 0)) continue;
    map.entries.push_back(
        {nodes[n].j, beta_coords + nodes[n].offset, map.norm_factor * amp[n]});
  }
  return map;
}

}  // namespace blochpert
