#include <cmath>

#include "cpt/density_matrix.hpp"
#include "cpt/error.hpp"

namespace cpt::density {

void IntensityCalibration::validate() const {
  if (!(kappa > 0.0) || !std::isfinite(kappa))
    throw Error(ErrorCode::InvalidArgument, "calibration kappa must be finite and > 0");
  if (!(split > 0.0) || !(split <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "calibration split must lie in (0, 1]");
}

double IntensityCalibration::rabi(double intensity) const {
  return kappa * std::sqrt(split * intensity);
}

IntensityCalibration defaultCalibration(ModelKind kind) {
  // Output of calibrateKappa(defaultParams(kind), defaultCalibrationTarget(kind),
  // standardIntensityGrid()).
  if (kind == ModelKind::ThreeLevel) return {1746957.58, 0.5};
  return {1580257.24, 0.5};
}

CalibrationTarget defaultCalibrationTarget(ModelKind kind) {
  return {0.1, kind == ModelKind::ThreeLevel ? 200.0 : 100.0};
}

std::vector<double> standardIntensityGrid() {
  std::vector<double> grid;
  for (int i = 1; i <= 44; ++i) grid.push_back(i / 10.0);
  return grid;
}

IntensityCalibration calibrateKappa(const LevelModelParams& base, const CalibrationTarget& target,
                                    std::span<const double> grid, double split) {
  base.validate();
  if (grid.size() < 2) throw Error(ErrorCode::InvalidArgument, "calibration grid needs >= 2 points");
  if (!(target.slope_hz_per_unit > 0.0))
    throw Error(ErrorCode::InvalidArgument, "calibration slope must be > 0");
  if (!(base.Gamma_c > 0.0))
    throw Error(ErrorCode::InvalidArgument, "calibration needs a nonzero optical coherence decay");

  // Weak-field estimate: excess HWHM ~ Omega^2 / (4 pi Gamma_c) Hz.
  IntensityCalibration cal{
      std::sqrt(target.slope_hz_per_unit * 2.0 * kTwoPi * base.Gamma_c / split), split};
  cal.validate();
  const double floor_hz = hertz(base.gamma_c);

  for (int iter = 0; iter < 100; ++iter) {
    const auto rows = intensityScan(base.kind, grid, cal, base);
    double cross = 0.0;
    double norm = 0.0;
    for (const auto& r : rows) {
      const double e = r.hwhm_hz - floor_hz;
      const double e_ref = target.slope_hz_per_unit * (r.intensity - target.anchor_intensity);
      cross += e * e_ref;
      norm += e * e;
    }
    if (!(norm > 0.0) || !(cross > 0.0))
      throw Error(ErrorCode::DegenerateInput, "calibration grid gives no power broadening");
    const double factor = std::sqrt(cross / norm);
    cal.kappa *= factor;
    if (std::abs(factor - 1.0) < 1e-12) break;
  }
  return cal;
}

}  // namespace cpt::density
