#include <cmath>
#include <string>

#include "cpt/density_matrix.hpp"
#include "cpt/error.hpp"

namespace cpt::density {

namespace {

constexpr int kExcited = 2;

bool isGround(const LevelModelParams& p, int k) { return k != kExcited && k < p.dimension(); }

int groundCount(const LevelModelParams& p) { return p.dimension() - 1; }

}  // namespace

void LevelModelParams::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  for (double r : {Gamma, Gamma_c, gamma_c, gamma_p, trap_relaxation})
    if (!(r >= 0.0) || !std::isfinite(r)) fail("decay and dephasing rates must be finite and >= 0");
  for (double v : {omega1, omega2, delta_opt, delta_raman})
    if (!std::isfinite(v)) fail("Rabi frequencies and detunings must be finite");
  const double expected = 1.0 / groundCount(*this);
  if (std::abs(ground_equilibrium - expected) > 1e-12)
    fail("ground_equilibrium must be 1/" + std::to_string(groundCount(*this)) + " for this model");
}

LevelModelParams LevelModelParams::make(ModelKind kind, double Gamma, double gamma_c,
                                        double gamma_p) {
  LevelModelParams p;
  p.kind = kind;
  p.Gamma = Gamma;
  p.Gamma_c = Gamma / 2.0;
  p.gamma_c = gamma_c;
  p.gamma_p = gamma_p;
  p.trap_relaxation = gamma_c;
  p.ground_equilibrium = kind == ModelKind::ThreeLevel ? 0.5 : 1.0 / 3.0;
  return p;
}

LevelModelParams defaultParams(ModelKind kind) {
  const double Gamma = kind == ModelKind::ThreeLevel ? angularFrequency(200e6) : angularFrequency(240e6);
  return LevelModelParams::make(kind, Gamma, angularFrequency(150.0), angularFrequency(300.0));
}

Liouvillian buildLiouvillian(const LevelModelParams& p) {
  p.validate();
  const int n = p.dimension();
  const int N = n * n;
  auto idx = [n](int i, int j) { return i + n * j; };
  const std::complex<double> I(0.0, 1.0);

  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(n, n);
  H(0, 0) = p.delta_raman / 2.0;
  H(1, 1) = -p.delta_raman / 2.0;
  H(kExcited, kExcited) = -p.delta_opt;
  H(0, kExcited) = H(kExcited, 0) = p.omega1 / 2.0;
  H(1, kExcited) = H(kExcited, 1) = p.omega2 / 2.0;

  Liouvillian L = Liouvillian::Zero(N, N);

  // -i [H, rho]
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        if (H(i, k) != 0.0) L(idx(i, j), idx(k, j)) += -I * H(i, k);
        if (H(k, j) != 0.0) L(idx(i, j), idx(i, k)) += I * H(k, j);
      }
    }
  }

  // Spontaneous decay of |i>, shared equally by the ground levels (trap included).
  const int ng = groundCount(p);
  L(idx(kExcited, kExcited), idx(kExcited, kExcited)) -= p.Gamma;
  for (int k = 0; k < n; ++k)
    if (isGround(p, k)) L(idx(k, k), idx(kExcited, kExcited)) += p.Gamma / ng;

  // Pairwise population exchange toward equal ground populations.
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      if (j == k || !isGround(p, j) || !isGround(p, k)) continue;
      const bool trap_pair = j == 3 || k == 3;
      const double w = (trap_pair ? p.trap_relaxation : p.gamma_p) * p.ground_equilibrium;
      L(idx(j, j), idx(k, k)) += w;
      L(idx(k, k), idx(k, k)) -= w;
    }
  }

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double rate = (i == kExcited || j == kExcited) ? p.Gamma_c : p.gamma_c;
      L(idx(i, j), idx(i, j)) -= rate;
    }
  }
  return L;
}

}  // namespace cpt::density
