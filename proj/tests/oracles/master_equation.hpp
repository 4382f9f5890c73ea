#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include <boost/numeric/odeint.hpp>
#include <Eigen/Dense>

#include "cpt/density_matrix.hpp"

// Time integration of the Lambda-system master equation written element by element
// in matrix form, independent of the vectorized Liouvillian.
namespace oracle {

using Mat = Eigen::MatrixXcd;

inline Mat masterRhs(const cpt::density::LevelModelParams& p, const Mat& rho) {
  const int n = p.dimension();
  const int exc = 2;
  const std::complex<double> I(0.0, 1.0);
  Mat H = Mat::Zero(n, n);
  H(0, 0) = p.delta_raman / 2.0;
  H(1, 1) = -p.delta_raman / 2.0;
  H(exc, exc) = -p.delta_opt;
  H(0, exc) = H(exc, 0) = p.omega1 / 2.0;
  H(1, exc) = H(exc, 1) = p.omega2 / 2.0;

  Mat d = -I * (H * rho - rho * H);

  std::vector<int> ground;
  for (int k = 0; k < n; ++k)
    if (k != exc) ground.push_back(k);
  const double ng = static_cast<double>(ground.size());

  d(exc, exc) -= p.Gamma * rho(exc, exc);
  for (int k : ground) d(k, k) += p.Gamma / ng * rho(exc, exc);

  // Relaxation of each ground population toward an equal share of the ground total.
  std::complex<double> total = 0.0;
  for (int k : ground) total += rho(k, k);
  if (n == 3) {
    for (int k : ground) d(k, k) -= p.gamma_p * (rho(k, k) - total / ng);
  } else {
    // g <-> e at gamma_p, and the trap b <-> g, e at trap_relaxation.
    const double w_ge = p.gamma_p / ng;
    const double w_b = p.trap_relaxation / ng;
    d(0, 0) += w_ge * (rho(1, 1) - rho(0, 0)) + w_b * (rho(3, 3) - rho(0, 0));
    d(1, 1) += w_ge * (rho(0, 0) - rho(1, 1)) + w_b * (rho(3, 3) - rho(1, 1));
    d(3, 3) += w_b * (rho(0, 0) + rho(1, 1) - 2.0 * rho(3, 3));
  }

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) d(i, j) -= ((i == exc || j == exc) ? p.Gamma_c : p.gamma_c) * rho(i, j);
  return d;
}

struct IntegrationResult {
  Mat rho;
  double final_rate = 0.0;  // max |d rho / dt| at the end
  double time = 0.0;
};

// Starts from equal ground populations and integrates until |d rho/dt| < rate_tol.
inline IntegrationResult integrateToSteadyState(const cpt::density::LevelModelParams& p,
                                                double rate_tol = 1e-11, double t_max = 1e6) {
  namespace ode = boost::numeric::odeint;
  const int n = p.dimension();
  using State = std::vector<double>;
  auto unpack = [n](const State& x) {
    Mat m(n, n);
    for (int k = 0; k < n * n; ++k) m(k % n, k / n) = {x[2 * k], x[2 * k + 1]};
    return m;
  };
  auto pack = [n](const Mat& m, State& x) {
    for (int k = 0; k < n * n; ++k) {
      x[2 * k] = m(k % n, k / n).real();
      x[2 * k + 1] = m(k % n, k / n).imag();
    }
  };

  Mat rho0 = Mat::Zero(n, n);
  for (int k = 0; k < n; ++k)
    if (k != 2) rho0(k, k) = 1.0 / (n - 1);
  State x(2 * n * n);
  pack(rho0, x);

  auto system = [&](const State& s, State& dxdt, double) { pack(masterRhs(p, unpack(s)), dxdt); };
  auto stepper = ode::make_controlled(1e-12, 1e-12, ode::runge_kutta_dopri5<State>());

  IntegrationResult r;
  double t = 0.0;
  double chunk = 10.0;
  while (t < t_max) {
    ode::integrate_adaptive(stepper, system, x, t, t + chunk, 1e-2);
    t += chunk;
    const Mat rho = unpack(x);
    r.final_rate = masterRhs(p, rho).cwiseAbs().maxCoeff();
    if (r.final_rate < rate_tol) break;
    chunk *= 1.5;
  }
  r.rho = unpack(x);
  r.time = t;
  return r;
}

}  // namespace oracle
