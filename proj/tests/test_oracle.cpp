#include <catch2/catch_amalgamated.hpp>

#include "blochpert/oracle.hpp"
#include "blochpert/rng.hpp"

using namespace blochpert;

namespace {

DualLattice z2() { return dual(Lattice(Mat::Identity(2, 2) * kTwoPi)); }

FourierPotential make_q(const DualLattice& g,
                        std::initializer_list<std::pair<Coords, cplx>> entries,
                        int s = 5) {
  std::map<Coords, cplx> m;
  for (auto& [c, v] : entries) {
    m[c] = v;
    m[negate(c)] = std::conj(v);
  }
  return FourierPotential(g, s, m);
}

FourierPotential zero_q(const DualLattice& g) { return FourierPotential(g, 5, {}); }

}  // namespace

TEST_CASE("free operator spectrum is exact") {
  DualLattice g = z2();
  FourierPotential q = zero_q(g);
  Vec t(2);
  t << 0.3, 0.1;
  GalerkinProblem p = assemble(t, q, 6.0);
  CHECK(is_effectively_real(p.matrix));
  OracleSpectrum s = eigen(p, 0.0, 20.0, true);
  for (int i = 0; i < s.eigenvalues.size(); ++i) {
    // every eigenvalue equals |g+t|^2 for some basis vector, exactly
    double best = 1e9;
    for (size_t b = 0; b < s.basis.size(); ++b) {
      double e = (g.cartesian(s.basis[b]) + t).squaredNorm();
      best = std::min(best, std::abs(e - s.eigenvalues[i]));
    }
    CHECK(best < 1e-10);
    // eigenvector supported entirely on the free-energy class (a Kronecker
    // spike when the class is a singleton; t can produce exact ties)
    double class_mass = 0.0;
    int class_size = 0;
    for (size_t b = 0; b < s.basis.size(); ++b) {
      double e = (g.cartesian(s.basis[b]) + t).squaredNorm();
      if (std::abs(e - s.eigenvalues[i]) < 1e-9) {
        class_mass += std::norm(b_coefficient(s, i, s.basis[b]));
        ++class_size;
      }
    }
    CHECK(class_mass == Catch::Approx(1.0).margin(1e-9));
    if (class_size == 1) CHECK(class_mass > 1.0 - 1e-10);
  }
}

TEST_CASE("assembled matrix is Hermitian with potential couplings") {
  DualLattice g = z2();
  FourierPotential q = make_q(g, {{{1, 0}, cplx(0.05, 0.01)}});
  Vec t(2);
  t << 0.2, 0.4;
  GalerkinProblem p = assemble(t, q, 5.0);
  CHECK((p.matrix - p.matrix.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
  // couplings sit exactly on the (1,0) fibers
  for (size_t i = 0; i < p.basis.size(); ++i)
    for (size_t j = 0; j < p.basis.size(); ++j) {
      Coords diff = p.basis[i] - p.basis[j];
      cplx expect = q.value(diff);
      if (i == j) continue;
      CHECK(std::abs(p.matrix(i, j) - expect) < 1e-15);
    }
}

TEST_CASE("basis cap raises TooLarge") {
  DualLattice g = z2();
  FourierPotential q = zero_q(g);
  Vec t = Vec::Zero(2);
  CHECK_THROWS_AS(assemble(t, q, 40.0, 100), TooLarge);
}

TEST_CASE("window eigenvalues settle as the cutoff grows") {
  DualLattice g = z2();
  FourierPotential q = make_q(g, {{{1, 0}, 0.1}, {{0, 1}, cplx(0.0, 0.1)}});
  Vec t(2);
  t << 0.21, 0.37;
  GalerkinProblem p1 = assemble(t, q, 8.0);
  GalerkinProblem p2 = assemble(t, q, 12.0);
  OracleSpectrum s1 = eigen(p1, 0.0, 16.0, false);
  OracleSpectrum s2 = eigen(p2, 0.0, 16.0, false);
  REQUIRE(s1.eigenvalues.size() == s2.eigenvalues.size());
  for (int i = 0; i < s1.eigenvalues.size(); ++i)
    CHECK(std::abs(s1.eigenvalues[i] - s2.eigenvalues[i]) < 1e-8);
}

TEST_CASE("variational monotonicity on nested bases") {
  DualLattice g = z2();
  FourierPotential q = make_q(g, {{{1, 0}, 0.3}, {{1, 1}, 0.2}});
  Vec t(2);
  t << 0.11, 0.23;
  GalerkinProblem small = assemble(t, q, 4.0);
  GalerkinProblem big = assemble(t, q, 6.0);
  SymEigen es = sym_eigen(small.matrix.real(), false);
  SymEigen eb = sym_eigen(big.matrix.real(), false);
  for (int k = 0; k < es.values.size(); ++k)
    CHECK(eb.values[k] <= es.values[k] + 1e-12);
}

TEST_CASE("match semantics") {
  OracleSpectrum s;
  s.eigenvalues.resize(3);
  s.eigenvalues << 1.0, 4.0, 9.0;
  s.window_lo = 0.0;
  s.window_hi = 10.0;
  SECTION("nearest with the second-nearest distance") {
    MatchResult m = match(4.05, s, 0.1);
    CHECK(m.N == 1);
    CHECK(m.lambda == 4.0);
    CHECK(m.gap_to_next == Catch::Approx(4.95));
    CHECK_FALSE(m.ambiguous);
  }
  SECTION("no candidate") { CHECK_THROWS_AS(match(6.5, s, 0.1), NoCandidate); }
  SECTION("degenerate pair is flagged ambiguous") {
    OracleSpectrum d;
    d.eigenvalues.resize(2);
    d.eigenvalues << 4.0, 4.00001;
    MatchResult m = match(4.0, d, 0.1);
    CHECK(m.ambiguous);
    CHECK(m.second_N == 1);
  }
}

TEST_CASE("b_coefficient bounds") {
  DualLattice g = z2();
  FourierPotential q = zero_q(g);
  Vec t(2);
  t << 0.3, 0.1;
  GalerkinProblem p = assemble(t, q, 4.0);
  OracleSpectrum s = eigen(p, 0.0, 6.0, true);
  CHECK_THROWS_AS(b_coefficient(s, 0, Coords{50, 50}), IndexOutOfRange);
  CHECK_THROWS_AS(b_coefficient(s, 9999, Coords{0, 0}), IndexOutOfRange);
}

TEST_CASE("gradient identity from the eigenvector") {
  DualLattice g = z2();
  FourierPotential q = make_q(g, {{{1, 0}, 0.05}, {{0, 1}, 0.03}});
  Vec t(2);
  t << 0.21, 0.33;
  double cutoff = 7.0;
  GalerkinProblem p = assemble(t, q, cutoff);
  OracleSpectrum s = eigen(p, 3.0, 9.0, true);
  REQUIRE(s.eigenvalues.size() >= 1);
  // pick a well-isolated eigenvalue
  int pick = -1;
  for (int i = 0; i < s.eigenvalues.size(); ++i) {
    double gap = 1e9;
    for (int j = 0; j < s.eigenvalues.size(); ++j)
      if (j != i) gap = std::min(gap, std::abs(s.eigenvalues[i] - s.eigenvalues[j]));
    if (gap > 0.5) {
      pick = i;
      break;
    }
  }
  REQUIRE(pick >= 0);
  Vec grad = Vec::Zero(2);
  for (size_t b = 0; b < s.basis.size(); ++b)
    grad += 2.0 * std::norm(s.vectors(static_cast<int>(b), pick)) *
            (g.cartesian(s.basis[b]) + t);
  const double h = 1e-5;
  for (int dim = 0; dim < 2; ++dim) {
    Vec tp = t, tm = t;
    tp[dim] += h;
    tm[dim] -= h;
    auto lam = [&](const Vec& tt) {
      GalerkinProblem pp = assemble(tt, q, cutoff);
      OracleSpectrum ss = eigen(pp, 3.0, 9.0, false);
      double best = 1e18, val = 0;
      for (int i = 0; i < ss.eigenvalues.size(); ++i)
        if (std::abs(ss.eigenvalues[i] - s.eigenvalues[pick]) < best) {
          best = std::abs(ss.eigenvalues[i] - s.eigenvalues[pick]);
          val = ss.eigenvalues[i];
        }
      return val;
    };
    double fd = (lam(tp) - lam(tm)) / (2 * h);
    CHECK(std::abs(fd - grad[dim]) < 1e-4 * std::max(1.0, std::abs(grad[dim])));
  }
}

TEST_CASE("high-mode coefficients decay like the declared smoothness") {
  DualLattice g = z2();
  FourierPotential q = make_q(g, {{{1, 0}, 0.1}, {{0, 1}, 0.1}}, 5);
  double rho = 4.0;
  Vec t(2);
  t << 0.13, 0.29;
  GalerkinProblem p = assemble(t, q, 3.0 * rho);
  OracleSpectrum s = eigen(p, rho * rho - 3.0, rho * rho + 3.0, true);
  REQUIRE(s.eigenvalues.size() >= 1);
  // pick the eigenvector dominated by a shell vector
  int pick = 0;
  double bestdom = 0;
  for (int i = 0; i < s.eigenvalues.size(); ++i) {
    double dom = s.vectors.col(i).cwiseAbs().maxCoeff();
    if (dom > bestdom) {
      bestdom = dom;
      pick = i;
    }
  }
  // log-log regression of |b| against |g'| over 2rho <= |g'| <= 2.8 rho
  std::vector<double> lx, ly;
  for (size_t b = 0; b < s.basis.size(); ++b) {
    double r = (g.cartesian(s.basis[b]) + t).norm();
    double ab = std::abs(s.vectors(static_cast<int>(b), pick));
    if (r >= 2.0 * rho && r <= 2.8 * rho && ab > 1e-13) {
      lx.push_back(std::log(r));
      ly.push_back(std::log(ab));
    }
  }
  REQUIRE(lx.size() >= 4);
  double mx = 0, my = 0;
  for (size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= lx.size();
  my /= lx.size();
  double num = 0, den = 0;
  for (size_t i = 0; i < lx.size(); ++i) {
    num += (lx[i] - mx) * (ly[i] - my);
    den += (lx[i] - mx) * (lx[i] - mx);
  }
  double slope = num / den;
  double pexp = q.smoothness() - 2;  // p = s - d
  CHECK(slope <= -pexp + 1.0);
}

TEST_CASE("three-dimensional free spectrum") {
  Lattice om(Mat::Identity(3, 3) * kTwoPi);
  DualLattice g = dual(om);
  FourierPotential q(g, 60, {});
  Vec t(3);
  t << 0.2, 0.3, 0.4;
  GalerkinProblem p = assemble(t, q, 4.0);
  OracleSpectrum s = eigen(p, 0.0, 8.0, false);
  REQUIRE(s.eigenvalues.size() >= 4);
  for (int i = 0; i < s.eigenvalues.size(); ++i) {
    double best = 1e18;
    for (const auto& b : s.basis)
      best = std::min(best, std::abs((g.cartesian(b) + t).squaredNorm() - s.eigenvalues[i]));
    CHECK(best < 1e-10);
  }
}
