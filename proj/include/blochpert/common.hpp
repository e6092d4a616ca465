#pragma once

// Shared scalar/vector types and the error hierarchy used across the library.

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace blochpert {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using cplx = std::complex<double>;

// Integer coordinates of a lattice point in its generator basis.
using Coords = std::vector<long long>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Errors split into two families so the CLI can map them to exit codes:
// domain errors (bad inputs, violated preconditions) and numerical failures.
enum class ErrorKind { Domain, Numerical };

struct Error : std::runtime_error {
  ErrorKind kind;
  Error(ErrorKind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

#define BLOCHPERT_DOMAIN_ERROR(NAME)                                        \
  struct NAME : Error {                                                     \
    explicit NAME(const std::string& msg = #NAME)                           \
        : Error(ErrorKind::Domain, std::string(#NAME) + ": " + msg) {}      \
  }
#define BLOCHPERT_NUMERICAL_ERROR(NAME)                                     \
  struct NAME : Error {                                                     \
    explicit NAME(const std::string& msg = #NAME)                           \
        : Error(ErrorKind::Numerical, std::string(#NAME) + ": " + msg) {}   \
  }

BLOCHPERT_DOMAIN_ERROR(InvalidLattice);
BLOCHPERT_DOMAIN_ERROR(NotPrimitive);
BLOCHPERT_DOMAIN_ERROR(NotLatticePoint);
BLOCHPERT_DOMAIN_ERROR(OutOfShell);
BLOCHPERT_DOMAIN_ERROR(WrongVariant);
BLOCHPERT_DOMAIN_ERROR(OrderTooHigh);
BLOCHPERT_DOMAIN_ERROR(IndexOutOfRange);
BLOCHPERT_DOMAIN_ERROR(BasisTooSmall);
BLOCHPERT_DOMAIN_ERROR(NeedDirections);
BLOCHPERT_DOMAIN_ERROR(InconsistentSites);
BLOCHPERT_DOMAIN_ERROR(TooLarge);
BLOCHPERT_DOMAIN_ERROR(NoCandidate);
BLOCHPERT_DOMAIN_ERROR(Ambiguous);
BLOCHPERT_DOMAIN_ERROR(OutsideW);
BLOCHPERT_DOMAIN_ERROR(NoSignChange);
BLOCHPERT_DOMAIN_ERROR(UseDirectionalPath);
BLOCHPERT_DOMAIN_ERROR(ConfigError);

BLOCHPERT_NUMERICAL_ERROR(SmallDenominator);
BLOCHPERT_NUMERICAL_ERROR(NumericalFailure);
BLOCHPERT_NUMERICAL_ERROR(LabelingAmbiguity);
BLOCHPERT_NUMERICAL_ERROR(LostSimplicity);

#undef BLOCHPERT_DOMAIN_ERROR
#undef BLOCHPERT_NUMERICAL_ERROR

inline Coords operator+(const Coords& a, const Coords& b) {
  Coords r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline Coords operator-(const Coords& a, const Coords& b) {
  Coords r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Coords negate(const Coords& a) {
  Coords r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = -a[i];
  return r;
}

inline bool is_zero(const Coords& a) {
  for (long long v : a)
    if (v != 0) return false;
  return true;
}

inline std::string coords_str(const Coords& a) {
  std::string s = "(";
  for (size_t i = 0; i < a.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(a[i]);
  }
  return s + ")";
}

// Fractional part in [0,1).
inline double frac01(double x) {
  double f = x - std::floor(x);
  if (f >= 1.0) f -= 1.0;
  return f;
}

}  // namespace blochpert
