#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "cpt/error.hpp"
#include "cpt/spectra.hpp"

namespace cpt::spectra {

QuadraticFieldFit fitQuadraticVsB(std::span<const std::pair<double, double>> points) {
  if (points.size() < 4)
    throw Error(ErrorCode::DegenerateInput, "quadratic fit needs at least 4 points");

  QuadraticFieldFit fit;
  std::vector<std::pair<double, double>> kept;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto [b, f] = points[i];
    if (!std::isfinite(b) || !std::isfinite(f))
      throw Error(ErrorCode::InvalidArgument, "non-finite point in field series");
    const bool duplicate = std::any_of(kept.begin(), kept.end(), [&](const auto& k) {
      return std::abs(k.first - b) <= 1e-12 * std::max(1.0, std::abs(b));
    });
    if (duplicate)
      fit.rejected.push_back(i);
    else
      kept.emplace_back(b, f);
  }
  const auto n = static_cast<Eigen::Index>(kept.size());
  if (n < 3) throw Error(ErrorCode::RankDeficient, "fewer than 3 distinct field values");

  // Centered and scaled abscissa keeps the design matrix well conditioned.
  double lo = kept.front().first, hi = lo;
  for (const auto& k : kept) {
    lo = std::min(lo, k.first);
    hi = std::max(hi, k.first);
  }
  const double b0 = 0.5 * (lo + hi);
  const double bs = 0.5 * (hi - lo);

  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = (kept[i].first - b0) / bs;
    X(i, 0) = 1.0;
    X(i, 1) = u;
    X(i, 2) = u * u;
    y[i] = kept[i].second / 1e3;  // kHz
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-12);
  if (qr.rank() < 3) throw Error(ErrorCode::RankDeficient, "design matrix is rank deficient");
  const Eigen::Vector3d a = qr.solve(y);
  if (!(a[2] > 0.0))
    throw Error(ErrorCode::DegenerateInput, "fitted curvature is not positive, no vertex");

  const double rss = (y - X * a).squaredNorm();
  fit.curvature_khz_per_uT2 = a[2] / (bs * bs);
  fit.vertex_uT = b0 - bs * a[1] / (2.0 * a[2]);
  fit.offset_khz = a[0] - a[1] * a[1] / (4.0 * a[2]);
  fit.rms_residual_hz = std::sqrt(rss / static_cast<double>(n)) * 1e3;

  if (n > 3) {
    const double sigma2 = rss / static_cast<double>(n - 3);
    const Eigen::Matrix3d cov = (X.transpose() * X).inverse() * sigma2;
    auto propagate = [&](const Eigen::Vector3d& grad) {
      return std::sqrt(std::max(0.0, grad.dot(cov * grad)));
    };
    fit.offset_stderr_khz = propagate({1.0, -a[1] / (2.0 * a[2]), a[1] * a[1] / (4.0 * a[2] * a[2])});
    fit.curvature_stderr = propagate({0.0, 0.0, 1.0 / (bs * bs)});
    fit.vertex_stderr_uT = propagate({0.0, -bs / (2.0 * a[2]), bs * a[1] / (2.0 * a[2] * a[2])});
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    fit.offset_stderr_khz = fit.curvature_stderr = fit.vertex_stderr_uT = nan;
  }
  return fit;
}

}  // namespace cpt::spectra
