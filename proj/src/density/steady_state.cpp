#include <algorithm>
#include <cmath>

#include "cpt/density_matrix.hpp"
#include "cpt/error.hpp"

namespace cpt::density {

SteadyState steadyState(const LevelModelParams& p) {
  const Liouvillian L = buildLiouvillian(p);
  const int n = p.dimension();
  const int N = n * n;
  const double scale = L.cwiseAbs().maxCoeff();
  if (scale == 0.0) throw Error(ErrorCode::SingularSystem, "all rates and couplings are zero");

  // Population rows sum to zero, so the rho_00 equation is redundant; replace it by
  // the trace condition, scaled like the other rows.
  Eigen::MatrixXcd A = L;
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(N);
  A.row(0).setZero();
  for (int k = 0; k < n; ++k) A(0, k + n * k) = scale;
  rhs(0) = scale;

  Eigen::FullPivLU<Eigen::MatrixXcd> lu(A);
  lu.setThreshold(1e-13);
  if (!lu.isInvertible()) {
    throw Error(ErrorCode::SingularSystem,
                "steady state is not unique for these rates (rank " + std::to_string(lu.rank()) +
                    " of " + std::to_string(N) + ")");
  }
  const Eigen::VectorXcd x = lu.solve(rhs);

  SteadyState out;
  out.rho = Eigen::Map<const Eigen::MatrixXcd>(x.data(), n, n);
  out.residual = (L * x).cwiseAbs().maxCoeff();
  out.scale = scale;
  return out;
}

double absorption(const LevelModelParams& p) {
  return p.Gamma * steadyState(p).rho(2, 2).real();
}

double offResonanceDetuning(const LevelModelParams& p) {
  double width = p.gamma_c + p.gamma_p;
  if (p.Gamma_c > 0.0) width += (p.omega1 * p.omega1 + p.omega2 * p.omega2) / p.Gamma_c;
  return std::max(std::sqrt(width * p.Gamma_c), 100.0 * width);
}

}  // namespace cpt::density
