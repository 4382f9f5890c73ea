#include "cpt/angular_momentum.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "cpt/error.hpp"

namespace cpt::angular {

namespace {

using boost::multiprecision::cpp_int;

const std::vector<cpp_int>& factorialTable() {
  static const std::vector<cpp_int> table = [] {
    std::vector<cpp_int> t(81);
    t[0] = 1;
    for (std::size_t i = 1; i < t.size(); ++i) t[i] = t[i - 1] * static_cast<unsigned>(i);
    return t;
  }();
  return table;
}

// Exact coefficients are pure functions of their integer arguments and are reused heavily.
template <class F>
SignedSqrt memoized(const std::array<int, 6>& key, F compute) {
  static std::mutex mutex;
  static std::map<std::array<int, 6>, SignedSqrt> cache;
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  SignedSqrt value = compute();
  std::lock_guard lock(mutex);
  return cache.emplace(key, std::move(value)).first->second;
}

cpp_int factorial(int n) {
  const auto& table = factorialTable();
  if (n < 0 || static_cast<std::size_t>(n) >= table.size()) {
    throw Error(ErrorCode::InvalidQuantumNumbers, "factorial argument out of range");
  }
  return table[static_cast<std::size_t>(n)];
}

bool even(int x) { return (x % 2) == 0; }

// Halves a doubled quantity that is known to be even.
int half(int x2) { return x2 / 2; }

// Triangle rule on doubled momenta.
bool triangle(int a2, int b2, int c2) {
  return c2 <= a2 + b2 && c2 >= std::abs(a2 - b2) && even(a2 + b2 + c2);
}

// Delta(abc)^2 = (a+b-c)!(a-b+c)!(-a+b+c)!/(a+b+c+1)!
Rational triangleSquare(int a2, int b2, int c2) {
  return Rational(factorial(half(a2 + b2 - c2)) * factorial(half(a2 - b2 + c2)) *
                      factorial(half(-a2 + b2 + c2)),
                  factorial(half(a2 + b2 + c2) + 1));
}

}  // namespace

SignedSqrt SignedSqrt::fromRational(const Rational& r) {
  if (r == 0) return zero();
  return {r > 0 ? 1 : -1, r * r};
}

double SignedSqrt::value() const {
  if (sign == 0) return 0.0;
  return sign * std::sqrt(static_cast<double>(square));
}

SignedSqrt operator*(const SignedSqrt& a, const SignedSqrt& b) {
  if (a.isZero() || b.isZero()) return SignedSqrt::zero();
  return {a.sign * b.sign, a.square * b.square};
}

SignedSqrt operator/(const SignedSqrt& a, const SignedSqrt& b) {
  if (b.isZero()) throw Error(ErrorCode::InvalidArgument, "division by an exact zero");
  if (a.isZero()) return SignedSqrt::zero();
  return {a.sign * b.sign, a.square / b.square};
}

std::string SignedSqrt::str() const {
  if (sign == 0) return "0";
  std::string prefix = sign < 0 ? "-" : "";
  if (square == 1) return prefix + "1";
  return prefix + "sqrt(" + square.str() + ")";
}

static SignedSqrt clebschGordanX2Uncached(int j1x2, int m1x2, int j2x2, int m2x2, int Jx2, int Mx2) {
  if (m1x2 + m2x2 != Mx2) return SignedSqrt::zero();
  if (std::abs(m1x2) > j1x2 || std::abs(m2x2) > j2x2 || std::abs(Mx2) > Jx2)
    return SignedSqrt::zero();
  if (!even(j1x2 + m1x2) || !even(j2x2 + m2x2) || !even(Jx2 + Mx2)) return SignedSqrt::zero();
  if (!triangle(j1x2, j2x2, Jx2)) return SignedSqrt::zero();

  const int a = half(j1x2 + j2x2 - Jx2);
  const int b = half(j1x2 - m1x2);
  const int c = half(j2x2 + m2x2);
  const int d = half(Jx2 - j2x2 + m1x2);
  const int e = half(Jx2 - j1x2 - m2x2);

  Rational prefactor = Rational(cpp_int(Jx2 + 1)) * triangleSquare(j1x2, j2x2, Jx2);
  prefactor *= factorial(half(Jx2 + Mx2)) * factorial(half(Jx2 - Mx2)) *
               factorial(half(j1x2 - m1x2)) * factorial(half(j1x2 + m1x2)) *
               factorial(half(j2x2 - m2x2)) * factorial(half(j2x2 + m2x2));

  Rational sum = 0;
  const int kmin = std::max({0, -d, -e});
  const int kmax = std::min({a, b, c});
  for (int k = kmin; k <= kmax; ++k) {
    cpp_int denom = factorial(k) * factorial(a - k) * factorial(b - k) * factorial(c - k) *
                    factorial(d + k) * factorial(e + k);
    Rational term(cpp_int(1), denom);
    sum += (k % 2 == 0) ? term : Rational(-term);
  }
  if (sum == 0) return SignedSqrt::zero();
  return {sum > 0 ? 1 : -1, prefactor * sum * sum};
}

static SignedSqrt wigner6jX2Uncached(int j1, int j2, int j3, int j4, int j5, int j6) {
  if (!triangle(j1, j2, j3) || !triangle(j1, j5, j6) || !triangle(j4, j2, j6) ||
      !triangle(j4, j5, j3))
    return SignedSqrt::zero();

  const Rational delta = triangleSquare(j1, j2, j3) * triangleSquare(j1, j5, j6) *
                         triangleSquare(j4, j2, j6) * triangleSquare(j4, j5, j3);
  const int a1 = half(j1 + j2 + j3);
  const int a2 = half(j1 + j5 + j6);
  const int a3 = half(j4 + j2 + j6);
  const int a4 = half(j4 + j5 + j3);
  const int b1 = half(j1 + j2 + j4 + j5);
  const int b2 = half(j2 + j3 + j5 + j6);
  const int b3 = half(j3 + j1 + j6 + j4);

  Rational sum = 0;
  const int tmin = std::max({a1, a2, a3, a4});
  const int tmax = std::min({b1, b2, b3});
  for (int t = tmin; t <= tmax; ++t) {
    cpp_int denom = factorial(t - a1) * factorial(t - a2) * factorial(t - a3) *
                    factorial(t - a4) * factorial(b1 - t) * factorial(b2 - t) * factorial(b3 - t);
    Rational term(factorial(t + 1), denom);
    sum += (t % 2 == 0) ? term : Rational(-term);
  }
  if (sum == 0) return SignedSqrt::zero();
  return {sum > 0 ? 1 : -1, delta * sum * sum};
}

SignedSqrt clebschGordanX2(int j1x2, int m1x2, int j2x2, int m2x2, int Jx2, int Mx2) {
  return memoized({j1x2, m1x2, j2x2, m2x2, Jx2, Mx2}, [&] {
    return clebschGordanX2Uncached(j1x2, m1x2, j2x2, m2x2, Jx2, Mx2);
  });
}

SignedSqrt wigner6jX2(int j1, int j2, int j3, int j4, int j5, int j6) {
  return memoized({j1, j2, j3, j4, j5, j6}, [&] { return wigner6jX2Uncached(j1, j2, j3, j4, j5, j6); });
}

SignedSqrt clebschGordanExact(int Fp, int mFp, int F, int m, int q) {
  if (q < -1 || q > 1 || F < 0 || Fp < 0 || std::abs(m) > F) {
    throw Error(ErrorCode::InvalidQuantumNumbers,
                "invalid <F'=" + std::to_string(Fp) + " m'=" + std::to_string(mFp) + " | F=" +
                    std::to_string(F) + " 1; m=" + std::to_string(m) + " q=" + std::to_string(q) +
                    ">");
  }
  if (mFp != m + q || std::abs(mFp) > Fp) return SignedSqrt::zero();
  return clebschGordanX2(2 * F, 2 * m, 2, 2 * q, 2 * Fp, 2 * mFp);
}

double clebschGordan(int Fp, int mFp, int F, int m, int q) {
  return clebschGordanExact(Fp, mFp, F, m, q).value();
}

SignedSqrt reducedDipoleFactor(int I2, int F, int Fp) {
  if (I2 < 0 || F < 0 || Fp < 0)
    throw Error(ErrorCode::InvalidQuantumNumbers, "negative angular momentum");
  // J = J' = 1/2 for the D1 line.
  const SignedSqrt sixj = wigner6jX2(1, 1, 2, 2 * F, 2 * Fp, I2);
  const int phase_x2 = 2 * F + 1 + 2 + I2;  // 2(F + J' + 1 + I), always even here
  const int phase = (half(phase_x2) % 2 == 0) ? 1 : -1;
  SignedSqrt scale{phase, Rational(cpp_int((2 * F + 1) * 2))};
  return scale * sixj;
}

}  // namespace cpt::angular
