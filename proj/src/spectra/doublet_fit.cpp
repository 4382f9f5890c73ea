#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "cpt/error.hpp"
#include "cpt/spectra.hpp"

namespace cpt::spectra {

namespace {

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;

enum Param { kC1 = 0, kC2, kW, kA, kB };

Vec5 toVector(const DoubletFit& f) {
  Vec5 p;
  p << f.center1, f.center2, f.hwhm, f.amplitude, f.baseline;
  return p;
}

double modelAt(const Vec5& p, double x) {
  return lorentzian(x, p[kC1], p[kW], p[kA]) + lorentzian(x, p[kC2], p[kW], p[kA]) + p[kB];
}

// Residuals and Jacobian of the model (not of the residual) on normalized data.
void evaluate(const Vec5& p, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
              Eigen::VectorXd& r, Eigen::MatrixXd* J) {
  const double w = p[kW];
  const double w2 = w * w;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double u1 = x[i] - p[kC1];
    const double u2 = x[i] - p[kC2];
    const double d1 = u1 * u1 + w2;
    const double d2 = u2 * u2 + w2;
    const double l1 = w2 / d1;
    const double l2 = w2 / d2;
    r[i] = y[i] - (p[kA] * (l1 + l2) + p[kB]);
    if (J) {
      (*J)(i, kC1) = p[kA] * 2.0 * w2 * u1 / (d1 * d1);
      (*J)(i, kC2) = p[kA] * 2.0 * w2 * u2 / (d2 * d2);
      (*J)(i, kW) = p[kA] * 2.0 * w * (u1 * u1 / (d1 * d1) + u2 * u2 / (d2 * d2));
      (*J)(i, kA) = l1 + l2;
      (*J)(i, kB) = 1.0;
    }
  }
}

// Pseudo-inverse with singular values floored at 1e-12 of the largest, so a
// near-degenerate doublet reports a large but finite uncertainty.
Mat5 flooredInverse(const Mat5& A) {
  Eigen::JacobiSVD<Mat5> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vec5 s = svd.singularValues();
  const double floor = std::max(s[0] * 1e-12, std::numeric_limits<double>::min());
  for (int i = 0; i < 5; ++i) s[i] = 1.0 / std::max(s[i], floor);
  return svd.matrixV() * s.asDiagonal() * svd.matrixU().transpose();
}

struct Scaling {
  double x0 = 0.0, xs = 1.0, y0 = 0.0, ys = 1.0;

  Vec5 normalize(const Vec5& p) const {
    Vec5 q;
    q << (p[kC1] - x0) / xs, (p[kC2] - x0) / xs, p[kW] / xs, p[kA] / ys, (p[kB] - y0) / ys;
    return q;
  }
  Vec5 restore(const Vec5& q) const {
    Vec5 p;
    p << x0 + xs * q[kC1], x0 + xs * q[kC2], xs * q[kW], ys * q[kA], y0 + ys * q[kB];
    return p;
  }
  Vec5 jacobianDiagonal() const {
    Vec5 d;
    d << xs, xs, xs, ys, ys;
    return d;
  }
};

Scaling scalingFor(const Spectrum& s) {
  const auto& x = s.detuning();
  const auto& y = s.signal();
  Scaling sc;
  sc.x0 = 0.5 * (x.front() + x.back());
  sc.xs = 0.5 * (x.back() - x.front());
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  sc.y0 = 0.5 * (*lo + *hi);
  sc.ys = 0.5 * (*hi - *lo);
  if (!(sc.ys > 0.0)) throw Error(ErrorCode::DegenerateInput, "constant signal, nothing to fit");
  return sc;
}

std::vector<double> smooth3(const std::vector<double>& y) {
  std::vector<double> s = y;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) s[i] = (y[i - 1] + y[i] + y[i + 1]) / 3.0;
  return s;
}

// Distance from `apex` to where s first falls through `level`, walking in `direction`.
double halfWidthNear(const std::vector<double>& x, const std::vector<double>& s, std::size_t apex,
                     double level, int direction) {
  std::size_t j = apex;
  while (true) {
    if (direction < 0 && j == 0) break;
    if (direction > 0 && j + 1 >= s.size()) break;
    const std::size_t k = direction < 0 ? j - 1 : j + 1;
    if (s[k] <= level) {
      const double t = (s[j] - level) / (s[j] - s[k]);
      return std::abs(x[j] + t * (x[k] - x[j]) - x[apex]);
    }
    j = k;
  }
  return std::abs(x[j] - x[apex]);
}

}  // namespace

std::array<double, 5> DoubletFit::standardErrors() const {
  std::array<double, 5> e{};
  for (int i = 0; i < 5; ++i) e[i] = std::sqrt(std::max(0.0, covariance[i][i]));
  return e;
}

double doubletModel(const DoubletFit& f, double x) { return modelAt(toVector(f), x); }

DoubletFit singlePeakInit(const Spectrum& s) {
  const auto& x = s.detuning();
  const double range = x.back() - x.front();
  std::vector<double> y = s.signal();

  // Work on peaks pointing up; a dip spectrum is flipped and flipped back at the end.
  std::vector<double> sorted = y;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double median = sorted[sorted.size() / 2];
  const auto [lo_it, hi_it] = std::minmax_element(y.begin(), y.end());
  const double polarity = (*hi_it - median) >= (median - *lo_it) ? 1.0 : -1.0;
  if (polarity < 0) std::transform(y.begin(), y.end(), y.begin(), std::negate<>());

  const std::vector<double> sm = smooth3(y);
  const double base = *std::min_element(sm.begin(), sm.end());
  const double top = *std::max_element(sm.begin(), sm.end());

  DoubletFit f;
  f.baseline = polarity * base;
  // Robust noise level from first differences; smoothing over 3 samples divides it by sqrt(3).
  std::vector<double> diffs(y.size() - 1);
  for (std::size_t i = 0; i + 1 < y.size(); ++i) diffs[i] = std::abs(y[i + 1] - y[i]);
  std::nth_element(diffs.begin(), diffs.begin() + diffs.size() / 2, diffs.end());
  const double noise = 1.4826 * diffs[diffs.size() / 2] / std::sqrt(2.0);
  const double prominence = std::max(0.02 * (top - base), 6.0 * noise / std::sqrt(3.0));
  std::vector<std::size_t> maxima = localMaxima(sm, prominence);
  std::sort(maxima.begin(), maxima.end(),
            [&](std::size_t a, std::size_t b) { return sm[a] > sm[b]; });
  // Both components share an amplitude, so a partner far below the apex is noise.
  if (!maxima.empty()) {
    const double apex_height = sm[maxima[0]] - base;
    std::erase_if(maxima, [&](std::size_t k) { return sm[k] - base < 0.5 * apex_height; });
  }

  if (maxima.empty()) {
    f.center1 = x.front() + 0.25 * range;
    f.center2 = x.front() + 0.75 * range;
    f.hwhm = range / 8.0;
    f.amplitude = polarity * std::max(top - base, 1e-300);
    return f;
  }

  const std::size_t apex = maxima[0];
  const double amp = y[apex] - base;
  const double level = base + 0.5 * amp;
  if (maxima.size() >= 2) {
    const std::size_t other = maxima[1];
    const int outward = x[other] > x[apex] ? -1 : 1;
    f.hwhm = halfWidthNear(x, sm, apex, level, outward);
    f.center1 = std::min(x[apex], x[other]);
    f.center2 = std::max(x[apex], x[other]);
    f.amplitude = polarity * amp;
  } else {
    const double w = std::min(halfWidthNear(x, sm, apex, level, -1),
                              halfWidthNear(x, sm, apex, level, 1));
    f.hwhm = w;
    f.center1 = x[apex] - 0.5 * w;
    f.center2 = x[apex] + 0.5 * w;
    f.amplitude = polarity * amp / 2.0;
  }
  const double min_step = range / static_cast<double>(x.size() - 1);
  f.hwhm = std::max(f.hwhm, min_step);
  return f;
}

DoubletFit fitDoublet(const Spectrum& s, const std::optional<DoubletFit>& init,
                      const FitOptions& options) {
  if (s.size() < kMinSpectrumSamples)
    throw Error(ErrorCode::DegenerateInput, "doublet fit needs at least 8 samples");
  const Scaling sc = scalingFor(s);
  const Eigen::Index n = static_cast<Eigen::Index>(s.size());
  Eigen::VectorXd x(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x[i] = (s.detuning()[i] - sc.x0) / sc.xs;
    y[i] = (s.signal()[i] - sc.y0) / sc.ys;
  }

  const DoubletFit start = init ? *init : singlePeakInit(s);
  if (!(start.hwhm > 0.0)) throw Error(ErrorCode::InvalidArgument, "initial hwhm must be > 0");
  Vec5 p = sc.normalize(toVector(start));

  Eigen::VectorXd r(n), r_trial(n);
  Eigen::MatrixXd J(n, 5);
  evaluate(p, x, y, r, &J);
  double cost = 0.5 * r.squaredNorm();
  double lambda = 1e-3;
  int quiet = 0;
  bool converged = false;
  int iter = 0;

  while (iter < options.max_iterations) {
    ++iter;
    if (cost == 0.0) {
      converged = true;
      break;
    }
    const Mat5 JtJ = J.transpose() * J;
    const Vec5 g = J.transpose() * r;
    Mat5 A = JtJ;
    for (int k = 0; k < 5; ++k) A(k, k) += lambda * std::max(JtJ(k, k), 1e-300);
    const Vec5 step = A.ldlt().solve(g);
    const Vec5 trial = p + step;
    const double step_norm = step.norm() / (p.norm() + options.step_tol);

    double trial_cost = std::numeric_limits<double>::infinity();
    if (trial.allFinite() && trial[kW] > 0.0) {
      evaluate(trial, x, y, r_trial, nullptr);
      trial_cost = 0.5 * r_trial.squaredNorm();
    }

    if (trial_cost <= cost) {
      const double rel = (cost - trial_cost) / cost;
      p = trial;
      cost = trial_cost;
      evaluate(p, x, y, r, &J);
      lambda = std::max(lambda / 3.0, 1e-15);
      quiet = (rel < options.rel_cost_tol || step_norm < options.step_tol) ? quiet + 1 : 0;
    } else {
      lambda *= 4.0;
      quiet = (step_norm < options.step_tol || lambda > 1e16) ? quiet + 1 : 0;
    }
    if (quiet >= options.stall_iterations) {
      converged = true;
      break;
    }
  }

  if (p[kC1] > p[kC2]) std::swap(p[kC1], p[kC2]);
  const Vec5 out = sc.restore(p);
  DoubletFit f;
  f.center1 = out[kC1];
  f.center2 = out[kC2];
  f.hwhm = out[kW];
  f.amplitude = out[kA];
  f.baseline = out[kB];
  f.converged = converged;
  f.iterations = iter;
  f.cost = cost * sc.ys * sc.ys;
  f.rms_residual = std::sqrt(2.0 * cost / static_cast<double>(n)) * sc.ys;

  evaluate(p, x, y, r, &J);
  const double dof = std::max<double>(1.0, static_cast<double>(n) - 5.0);
  const Mat5 cov_n = flooredInverse(J.transpose() * J) * (2.0 * cost / dof);
  const Vec5 d = sc.jacobianDiagonal();
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) f.covariance[i][j] = cov_n(i, j) * d[i] * d[j];
  return f;
}

}  // namespace cpt::spectra
