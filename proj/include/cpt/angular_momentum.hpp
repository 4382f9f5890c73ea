#pragma once

#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace cpt::angular {

using Rational = boost::multiprecision::cpp_rational;

/// A real number of the form sign * sqrt(square) with `square` an exact rational.
/// Closed under multiplication and division, which is all coupling algebra needs.
struct SignedSqrt {
  int sign = 0;  // -1, 0, +1
  Rational square = 0;

  static SignedSqrt zero() { return {}; }
  static SignedSqrt one() { return {1, 1}; }
  static SignedSqrt fromRational(const Rational& r);

  bool isZero() const { return sign == 0; }
  double value() const;

  SignedSqrt operator-() const { return {-sign, square}; }
  friend SignedSqrt operator*(const SignedSqrt& a, const SignedSqrt& b);
  friend SignedSqrt operator/(const SignedSqrt& a, const SignedSqrt& b);
  friend bool operator==(const SignedSqrt& a, const SignedSqrt& b) {
    return a.sign == b.sign && (a.sign == 0 || a.square == b.square);
  }

  /// e.g. "-sqrt(3/5)", "1", "0".
  std::string str() const;
};

// Arguments with an `x2` suffix are doubled so half-integer momenta stay integral.

/// <j1 m1; j2 m2 | J M> by the Racah sum, exact.
SignedSqrt clebschGordanX2(int j1x2, int m1x2, int j2x2, int m2x2, int Jx2, int Mx2);

/// {j1 j2 j3; j4 j5 j6} by the Racah sum, exact.
SignedSqrt wigner6jX2(int j1x2, int j2x2, int j3x2, int j4x2, int j5x2, int j6x2);

/// <F' mF' | F 1; m q> for integer momenta; zero unless mF' = m + q and |mF'| <= F'.
/// Throws InvalidQuantumNumbers for q outside {-1,0,1}, negative F or |m| > F.
SignedSqrt clebschGordanExact(int Fp, int mFp, int F, int m, int q);
double clebschGordan(int Fp, int mFp, int F, int m, int q);

/// Hyperfine reduced dipole element <F'||d||F> in units of <J'=1/2||d||J=1/2>,
/// (-1)^(F + J' + 1 + I) sqrt((2F+1)(2J'+1)) {J' J 1; F F' I}.
SignedSqrt reducedDipoleFactor(int I2, int F, int Fp);

}  // namespace cpt::angular
