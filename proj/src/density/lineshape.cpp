#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>

#include <boost/math/tools/roots.hpp>

#include "cpt/density_matrix.hpp"
#include "cpt/error.hpp"

namespace cpt::density {

namespace {

struct DipProbe {
  double on_resonance = 0.0;
  double off_resonance = 0.0;
  double far = 0.0;
};

DipProbe probeDip(LevelModelParams p) {
  DipProbe d;
  d.far = offResonanceDetuning(p);
  p.delta_raman = 0.0;
  d.on_resonance = absorption(p);
  p.delta_raman = d.far;
  d.off_resonance = absorption(p);
  return d;
}

double halfWidthFrom(LevelModelParams p, const DipProbe& d) {
  const double depth = d.off_resonance - d.on_resonance;
  if (!(depth > 1e-12 * std::abs(d.off_resonance)))
    throw Error(ErrorCode::DegenerateInput, "no CPT dip to measure (zero depth)");
  const double half_level = 0.5 * (d.on_resonance + d.off_resonance);
  auto f = [&](double delta) {
    p.delta_raman = delta;
    return absorption(p) - half_level;
  };
  std::uintmax_t max_iter = 200;
  boost::math::tools::eps_tolerance<double> tol(48);
  const auto [lo, hi] =
      boost::math::tools::toms748_solve(f, 0.0, d.far, -0.5 * depth, f(d.far), tol, max_iter);
  return 0.5 * (lo + hi);
}

ScanRow scanRow(const LevelModelParams& base, const IntensityCalibration& cal, double intensity) {
  LevelModelParams p = base;
  p.omega1 = p.omega2 = cal.rabi(intensity);
  p.delta_raman = 0.0;
  const DipProbe d = probeDip(p);
  ScanRow row;
  row.intensity = intensity;
  row.hwhm_hz = hertz(halfWidthFrom(p, d));
  row.amplitude = std::max(0.0, d.off_resonance - d.on_resonance);
  row.absorption = d.off_resonance;
  return row;
}

void checkScanInput(ModelKind kind, std::span<const double> intensities,
                    const IntensityCalibration& cal, const LevelModelParams& base) {
  cal.validate();
  base.validate();
  if (base.kind != kind)
    throw Error(ErrorCode::InvalidArgument, "base parameters belong to a different model kind");
  for (double i : intensities)
    if (!(i > 0.0) || !std::isfinite(i))
      throw Error(ErrorCode::InvalidArgument, "intensities must be finite and > 0");
}

std::vector<double> checkedHzAxis(std::span<const double> delta_grid) {
  std::vector<double> hz(delta_grid.size());
  std::transform(delta_grid.begin(), delta_grid.end(), hz.begin(), hertz);
  return hz;
}

// Runs body(i) for i in [0, n) across threads and rethrows the first exception.
template <typename Body>
void parallelFor(std::size_t n, Body&& body) {
  std::exception_ptr failure;
  std::mutex guard;
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(guard);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

double cptAmplitude(const LevelModelParams& p) {
  const DipProbe d = probeDip(p);
  return std::max(0.0, d.off_resonance - d.on_resonance);
}

double cptHalfWidth(const LevelModelParams& p) { return halfWidthFrom(p, probeDip(p)); }

spectra::Spectrum cptLineshape(const LevelModelParams& p, std::span<const double> delta_grid,
                               SignalKind signal) {
  p.validate();
  std::vector<double> hz = checkedHzAxis(delta_grid);
  std::vector<double> values(delta_grid.size());
  const double sign = signal == SignalKind::Absorption ? 1.0 : -1.0;
  parallelFor(delta_grid.size(), [&](std::size_t i) {
    LevelModelParams q = p;
    q.delta_opt = 0.0;
    q.delta_raman = delta_grid[i];
    values[i] = sign * absorption(q);
  });
  return spectra::Spectrum(std::move(hz), std::move(values),
                           {spectra::Provenance::Kind::Solved, 0, {}});
}

spectra::Spectrum cptLineshapeSerial(const LevelModelParams& p,
                                     std::span<const double> delta_grid, SignalKind signal) {
  p.validate();
  std::vector<double> hz = checkedHzAxis(delta_grid);
  std::vector<double> values(delta_grid.size());
  const double sign = signal == SignalKind::Absorption ? 1.0 : -1.0;
  for (std::size_t i = 0; i < delta_grid.size(); ++i) {
    LevelModelParams q = p;
    q.delta_opt = 0.0;
    q.delta_raman = delta_grid[i];
    values[i] = sign * absorption(q);
  }
  return spectra::Spectrum(std::move(hz), std::move(values),
                           {spectra::Provenance::Kind::Solved, 0, {}});
}

std::vector<ScanRow> intensityScan(ModelKind kind, std::span<const double> intensities,
                                   const IntensityCalibration& cal, const LevelModelParams& base) {
  checkScanInput(kind, intensities, cal, base);
  std::vector<ScanRow> rows(intensities.size());
  parallelFor(intensities.size(),
              [&](std::size_t i) { rows[i] = scanRow(base, cal, intensities[i]); });
  return rows;
}

std::vector<ScanRow> intensityScanSerial(ModelKind kind, std::span<const double> intensities,
                                         const IntensityCalibration& cal,
                                         const LevelModelParams& base) {
  checkScanInput(kind, intensities, cal, base);
  std::vector<ScanRow> rows;
  rows.reserve(intensities.size());
  for (double i : intensities) rows.push_back(scanRow(base, cal, i));
  return rows;
}

std::vector<ScanRow> normalizeAmplitudes(std::vector<ScanRow> rows) {
  if (rows.empty()) return rows;
  double mean = 0.0;
  for (const auto& r : rows) mean += r.amplitude;
  mean /= static_cast<double>(rows.size());
  if (mean <= 0.0) return rows;
  for (auto& r : rows) r.amplitude /= mean;
  return rows;
}

}  // namespace cpt::density
