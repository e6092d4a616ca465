#pragma once

// Membership certificates for the simple sets: the known part of the target
// eigenvalue must clear every competitor's known part by 2*eps1. Competitors
// are the lattice translates whose free energy lands in the comparison
// window; non-resonant ones carry a series value F, resonant ones the full
// spectrum of their resonance block.

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "blochpert/common.hpp"
#include "blochpert/geometry.hpp"
#include "blochpert/hill.hpp"
#include "blochpert/lattice.hpp"
#include "blochpert/nonres.hpp"
#include "blochpert/oracle.hpp"
#include "blochpert/potential.hpp"
#include "blochpert/resblock.hpp"
#include "blochpert/rng.hpp"
#include "blochpert/threading.hpp"

namespace blochpert {

struct CompetitorEntry {
  Coords gamma;
  enum class Kind { NonResF, ResLambda } kind = Kind::NonResF;
  double value = 0.0;   // F(gamma'+t) or the nearest block eigenvalue
  double margin = 0.0;  // distance of the known part to this competitor
  bool truncated = false;
  std::string note;  // per-competitor failure, entry flagged not fatal
};

enum class Verdict { Accepted, Rejected };

struct SimpleSetCertificate {
  Vec x;
  std::string variant;  // "B" or "Bdelta"
  double known_part = 0.0;
  double eps1 = 0.0;
  std::vector<CompetitorEntry> competitors;
  Verdict verdict = Verdict::Rejected;
  std::string reason;
  // Bdelta extras
  long long j = 0;
  Coords beta_coords;
  double v = 0.0;
  GapCheck gap;
};

namespace detail {

// Lattice vectors gamma' with | |gamma'+t|^2 - center | < width, self excluded.
inline std::vector<Coords> competitor_window(const Vec& t, const DualLattice& gamma,
                                             double center, double width,
                                             const Coords& self) {
  std::vector<Coords> out;
  double rmax = std::sqrt(std::max(0.0, center + width));
  Mat binv_t = gamma.basis.transpose().inverse();
  Vec c0 = -gamma.real_coords(t);
  const int d = gamma.d;
  std::vector<long long> lo(d), hi(d);
  for (int i = 0; i < d; ++i) {
    double w = binv_t.row(i).norm() * rmax;
    lo[i] = static_cast<long long>(std::floor(c0[i] - w)) - 1;
    hi[i] = static_cast<long long>(std::ceil(c0[i] + w)) + 1;
  }
  Coords idx(d);
  for (int i = 0; i < d; ++i) idx[i] = lo[i];
  while (true) {
    double e = (gamma.cartesian(idx) + t).squaredNorm();
    if (std::abs(e - center) < width && idx != self) out.push_back(idx);
    int k = d - 1;
    while (k >= 0 && idx[k] == hi[k]) {
      idx[k] = lo[k];
      --k;
    }
    if (k < 0) break;
    ++idx[k];
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline CompetitorEntry evaluate_competitor(const Coords& gc, const Vec& t,
                                           const FourierPotential& q,
                                           const AsymptoticParams& params,
                                           const Classifier& cls, double known) {
  CompetitorEntry e;
  e.gamma = gc;
  Vec xp = q.lattice().cartesian(gc) + t;
  try {
    DomainLabel lab = cls.classify(xp);
    if (lab.kind == DomainKind::NonResonance) {
      e.kind = CompetitorEntry::Kind::NonResF;
      e.value = F_series(xp, q, params, params.known_order()).lambda_pred;
      e.margin = std::abs(known - e.value);
    } else {
      e.kind = CompetitorEntry::Kind::ResLambda;
      Vec lam;
      try {
        lam = block_spectrum(xp, lab.directions, params, q.lattice(), q);
      } catch (const TooLarge&) {
        e.truncated = true;
        e.note = "block site cap";
        e.margin = 0.0;
        return e;
      }
      e.margin = std::numeric_limits<double>::infinity();
      for (int i = 0; i < lam.size(); ++i) {
        double dist = std::abs(known - lam[i]);
        if (dist < e.margin) {
          e.margin = dist;
          e.value = lam[i];
        }
      }
    }
  } catch (const Error& err) {
    e.note = err.what();
    e.margin = 0.0;
  }
  return e;
}

}  // namespace detail

// Known parts of all competitors in the comparison window of x.
inline std::vector<CompetitorEntry> known_parts(const Vec& x, const FourierPotential& q,
                                                const AsymptoticParams& params,
                                                const Classifier& cls) {
  auto [gcoords, t] = split_x(x, q.lattice());
  double known = F_series(x, q, params, params.known_order()).lambda_pred;
  double width = std::pow(params.rho, params.alphas[1]) / 3.0;
  std::vector<CompetitorEntry> out;
  for (const Coords& gc :
       detail::competitor_window(t, q.lattice(), known, width, gcoords))
    out.push_back(detail::evaluate_competitor(gc, t, q, params, cls, known));
  return out;
}

inline SimpleSetCertificate in_B(const Vec& x, const FourierPotential& q,
                                 const AsymptoticParams& params,
                                 const Classifier& cls) {
  if (!params.in_trimmed_shell(x)) throw OutOfShell("outside the trimmed shell");
  DomainLabel lab = cls.classify(x);
  if (lab.kind != DomainKind::NonResonance)
    throw WrongVariant("resonance point; use the Bdelta variant");

  SimpleSetCertificate cert;
  cert.x = x;
  cert.variant = "B";
  cert.eps1 = params.eps1();
  cert.known_part = F_series(x, q, params, params.known_order()).lambda_pred;
  cert.competitors = known_parts(x, q, params, cls);

  cert.verdict = Verdict::Accepted;
  for (const auto& e : cert.competitors) {
    if (!e.note.empty() || e.truncated) {
      cert.verdict = Verdict::Rejected;
      cert.reason = "competitor " + coords_str(e.gamma) + " not evaluable: " +
                    (e.note.empty() ? "truncated" : e.note);
      break;
    }
    if (e.margin < 2.0 * cert.eps1) {
      cert.verdict = Verdict::Rejected;
      cert.reason = "margin " + std::to_string(e.margin) + " at " +
                    coords_str(e.gamma);
      break;
    }
  }
  return cert;
}

inline SimpleSetCertificate in_B_delta(const Vec& x, const DeltaFrame& frame,
                                       const FourierPotential& q,
                                       const AsymptoticParams& params,
                                       const Classifier& cls) {
  if (!params.in_trimmed_shell(x)) throw OutOfShell("outside the trimmed shell");
  DomainLabel lab = cls.classify(x);
  bool dir_matches =
      lab.k == 1 && (lab.directions[0] == frame.delta_coords ||
                     lab.directions[0] == negate(frame.delta_coords));
  if (lab.kind != DomainKind::Resonance || !dir_matches || !lab.single_resonance)
    throw WrongVariant("not a single-resonance point for this delta");

  auto [gcoords, t] = split_x(x, q.lattice());
  GammaDeltaDecomposition dec = gamma_delta_decompose(x, frame, t);

  SimpleSetCertificate cert;
  cert.x = x;
  cert.variant = "Bdelta";
  cert.eps1 = params.eps1();
  cert.j = dec.j;
  cert.beta_coords = dec.beta_coords;
  cert.v = dec.v;

  SingleResCorrection corr;
  try {
    corr = E_corrections(dec.j, dec.beta_coords, dec.v, dec.tau, q, params, frame,
                         std::max(1, params.known_order_res()));
  } catch (const OutsideW& e) {
    cert.verdict = Verdict::Rejected;
    cert.reason = "OutsideW";
    return cert;
  }
  cert.gap = corr.gap;
  cert.known_part = corr.predicted;

  double width = std::pow(params.rho, params.alphas[1]) / 3.0;
  auto window =
      detail::competitor_window(t, q.lattice(), cert.known_part, width, gcoords);
  cert.verdict = Verdict::Accepted;
  for (const Coords& gc : window) {
    Vec xp = q.lattice().cartesian(gc) + t;
    CompetitorEntry e;
    // Split M into the non-resonance part (compare F) and the beta' != beta
    // part (compare the block spectrum); same-fiber translates are covered
    // by the gap condition on W(rho).
    try {
      GammaDeltaDecomposition dp = gamma_delta_decompose(xp, frame, t);
      DomainLabel lp = cls.classify(xp);
      if (lp.kind == DomainKind::NonResonance) {
        e = detail::evaluate_competitor(gc, t, q, params, cls, cert.known_part);
      } else if (dp.beta_coords != dec.beta_coords) {
        e = detail::evaluate_competitor(gc, t, q, params, cls, cert.known_part);
      } else {
        continue;
      }
    } catch (const Error& err) {
      e.gamma = gc;
      e.note = err.what();
      e.margin = 0.0;
    }
    cert.competitors.push_back(e);
    if (cert.verdict != Verdict::Accepted) continue;
    if (!e.note.empty() || e.truncated) {
      cert.verdict = Verdict::Rejected;
      cert.reason = "competitor " + coords_str(gc) + " not evaluable";
    } else if (e.margin < 2.0 * cert.eps1) {
      cert.verdict = Verdict::Rejected;
      cert.reason = "margin " + std::to_string(e.margin) + " at " + coords_str(gc);
    }
  }
  return cert;
}

struct SimplicityReport {
  int N = -1;
  double lambda = 0.0;
  double gap_to_next = 0.0;
  double dominance = 0.0;  // |b(N,gamma)|^2 or |<Psi, Phi_{j,beta}>|^2
  bool unique_in_eps1 = false;
  bool pass = false;
};

inline SimplicityReport verify_simplicity(const SimpleSetCertificate& cert,
                                          const OracleSpectrum& spectrum,
                                          const FourierPotential& q,
                                          const AsymptoticParams& params,
                                          const DeltaFrame* frame = nullptr) {
  if (cert.verdict != Verdict::Accepted)
    throw Error(ErrorKind::Domain, "verify_simplicity requires an accepted certificate");
  if (!spectrum.covers(cert.known_part - cert.eps1) ||
      !spectrum.covers(cert.known_part + cert.eps1))
    throw Error(ErrorKind::Domain, "oracle window must cover known_part +- eps1");

  SimplicityReport rep;
  int in_eps = 0;
  for (int i = 0; i < spectrum.eigenvalues.size(); ++i)
    if (std::abs(spectrum.eigenvalues[i] - cert.known_part) <= cert.eps1) ++in_eps;
  if (in_eps == 0) throw NoCandidate("no eigenvalue within eps1 of the known part");
  rep.unique_in_eps1 = in_eps == 1;

  MatchResult m = match(cert.known_part, spectrum, cert.eps1);
  rep.N = m.N;
  rep.lambda = m.lambda;
  rep.gap_to_next = m.gap_to_next;

  auto [gcoords, t] = split_x(cert.x, q.lattice());
  if (cert.variant == "B") {
    rep.dominance = std::norm(b_coefficient(spectrum, m.N, gcoords));
  } else {
    if (!frame) throw Error(ErrorKind::Domain, "Bdelta verification needs the frame");
    DirectionalPotential Q = directional(q, *frame);
    HillSpectrum hs = solve_hill(Q, frame->delta.norm(), cert.v, params.hill_basis());
    // overlap of the oracle eigenvector with Phi_{j,beta} in the plane-wave basis
    cplx overlap(0, 0);
    Vec beta_cart = frame->gd_cartesian(cert.beta_coords);
    for (long long mm = -hs.M; mm <= hs.M; ++mm) {
      cplx c = hs.coeff(cert.j, mm);
      if (std::abs(c) < 1e-15) continue;
      // plane wave at beta + tau + (mm+v) delta differs from x by (mm-j) delta
      Coords gm = gcoords;
      for (int i = 0; i < frame->d(); ++i)
        gm[i] += (mm - cert.j) * frame->delta_coords[i];
      auto it = spectrum.index.find(gm);
      if (it == spectrum.index.end()) continue;
      overlap += spectrum.vectors(it->second, m.N) * std::conj(c);
    }
    rep.dominance = std::norm(overlap);
  }
  rep.pass = rep.unique_in_eps1 && rep.dominance > 0.5;
  return rep;
}

enum class Region { U, Vdelta, B, Bdelta };

struct MeasureEstimate {
  double fraction = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;  // Wilson 95%
  long long hits = 0;
  long long denominator = 0;
};

inline MeasureEstimate wilson(long long hits, long long n) {
  MeasureEstimate m;
  m.hits = hits;
  m.denominator = n;
  if (n == 0) return m;
  const double z = 1.959963984540054;
  double ph = static_cast<double>(hits) / n;
  double z2n = z * z / n;
  double center = (ph + z2n / 2.0) / (1.0 + z2n);
  double half = z * std::sqrt(ph * (1 - ph) / n + z2n / (4.0 * n)) / (1.0 + z2n);
  m.fraction = ph;
  m.ci_lo = std::max(0.0, center - half);
  m.ci_hi = std::min(1.0, center + half);
  return m;
}

// Monte-Carlo membership fraction of a region; deterministic under seed.
// U and B sample the sphere |x| = rho; Vdelta and Bdelta sample the slab
// around the diffraction plane of frame->delta (fractions conditional on
// V_delta membership).
inline MeasureEstimate measure_fraction(Region region, const AsymptoticParams& params,
                                        const FourierPotential& q, long long n_samples,
                                        uint64_t seed, const Classifier& cls,
                                        const DeltaFrame* frame = nullptr,
                                        int threads = 1) {
  if (n_samples < 100)
    throw Error(ErrorKind::Domain, "measure_fraction needs n >= 100");
  Rng master(seed);
  const int d = params.d;
  // per-sample outcome: 0 outside denominator, 1 counted, 2 counted + hit
  std::vector<signed char> outcome(n_samples, 0);

  if (region == Region::U || region == Region::B) {
    parallel_for(n_samples, threads, [&](long long i) {
      Rng r = master.substream(static_cast<uint64_t>(i));
      Vec x = params.rho * r.sphere_dir(d);
      outcome[i] = 1;
      try {
        if (region == Region::U) {
          if (cls.classify(x).kind == DomainKind::NonResonance) outcome[i] = 2;
        } else {
          if (in_B(x, q, params, cls).verdict == Verdict::Accepted) outcome[i] = 2;
        }
      } catch (const Error&) {
        // outside shell / wrong variant / failed evaluation: not a hit
      }
    });
  } else {
    if (!frame) throw Error(ErrorKind::Domain, "Vdelta/Bdelta sampling needs a frame");
    double d2 = frame->delta.squaredNorm();
    double thr1 = params.threshold(1);
    double ulo = (-thr1 / d2 - 1.0) / 2.0;
    double uhi = (thr1 / d2 - 1.0) / 2.0;
    const int hd = d - 1;
    parallel_for(n_samples, threads, [&](long long i) {
      Rng r = master.substream(static_cast<uint64_t>(i));
      double u = r.uniform(ulo, uhi);
      // uniform point in the H_delta ball of radius 1.5 rho
      Vec w;
      if (hd == 1) {
        Vec e = frame->omega_delta_basis.row(0).transpose().normalized();
        w = r.uniform(-1.5 * params.rho, 1.5 * params.rho) * e;
      } else {
        Vec dirs(hd);
        for (int c = 0; c < hd; ++c) dirs[c] = r.normal();
        Eigen::HouseholderQR<Mat> qr(frame->omega_delta_basis.transpose());
        Mat basis = Mat(qr.householderQ()).leftCols(hd);
        double nn = dirs.norm();
        if (nn < 1e-12) nn = 1.0;
        double rad = 1.5 * params.rho * std::pow(r.uniform(), 1.0 / hd);
        w = basis * (dirs / nn) * rad;
      }
      Vec x = w + u * frame->delta;
      bool in_vdelta = params.in_shell(x);  // slab => plane margin already holds
      if (region == Region::Vdelta) {
        outcome[i] = in_vdelta ? 2 : 1;
        return;
      }
      if (!in_vdelta) return;  // Bdelta fraction is conditional on V_delta
      outcome[i] = 1;
      try {
        if (in_B_delta(x, *frame, q, params, cls).verdict == Verdict::Accepted)
          outcome[i] = 2;
      } catch (const Error&) {
      }
    });
  }
  long long hits = 0, denom = 0;
  for (signed char o : outcome) {
    if (o >= 1) ++denom;
    if (o == 2) ++hits;
  }
  return wilson(hits, denom);
}

}  // namespace blochpert
