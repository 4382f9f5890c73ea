#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cpt/spectra.hpp"
#include "cpt/units.hpp"

// Steady-state Liouville models of a Lambda system in the rotating frame.
//
// Level order: |g> = 0, |e> = 1, |i> = 2 (excited), and the trap |b> = 3 for
// the four-level model. All rates and frequencies are angular (rad/s).
namespace cpt::density {

enum class ModelKind { ThreeLevel, FourLevelTrap };

struct LevelModelParams {
  ModelKind kind = ModelKind::ThreeLevel;
  double omega1 = 0.0;
  double omega2 = 0.0;
  double delta_opt = 0.0;
  double delta_raman = 0.0;
  double Gamma = 0.0;    // excited population decay
  double Gamma_c = 0.0;  // optical coherence decay
  double gamma_c = 0.0;  // ground coherence dephasing
  double gamma_p = 0.0;  // population exchange between |g> and |e>
  double trap_relaxation = 0.0;  // population exchange between |b> and each of |g>, |e>
  double ground_equilibrium = 0.5;

  int dimension() const { return kind == ModelKind::ThreeLevel ? 3 : 4; }

  /// Throws InvalidArgument on negative rates or an equilibrium other than 1/(ground levels).
  void validate() const;

  /// Rates with Gamma_c = Gamma/2, equilibrium 1/2 or 1/3 and trap relaxation at gamma_c.
  static LevelModelParams make(ModelKind kind, double Gamma, double gamma_c, double gamma_p);
};

/// Measured-condition defaults: gamma_p = 0.3 kHz, gamma_c = 0.15 kHz and
/// Gamma = 200 MHz (lin||lin, three-level) or 240 MHz (sigma-sigma, four-level).
LevelModelParams defaultParams(ModelKind kind);

using Liouvillian = Eigen::MatrixXcd;
using DensityMatrix = Eigen::MatrixXcd;

/// n^2 x n^2 generator acting on column-major vec(rho).
Liouvillian buildLiouvillian(const LevelModelParams& p);

struct SteadyState {
  DensityMatrix rho;
  double residual = 0.0;  // max |L vec(rho)|
  double scale = 0.0;     // max |L| entry
};

/// Unique trace-one null vector of L. Throws SingularSystem when it is not unique.
SteadyState steadyState(const LevelModelParams& p);

/// Gamma * rho_ii.
double absorption(const LevelModelParams& p);

/// Raman detuning used as the off-resonance reference: geometric mean of the
/// expected CPT width and the optical coherence width.
double offResonanceDetuning(const LevelModelParams& p);

/// absorption(far off Raman resonance) - absorption(delta_raman = 0), clamped at 0.
double cptAmplitude(const LevelModelParams& p);

/// Half width at half maximum of the CPT dip in Raman detuning (rad/s), by root bracketing.
double cptHalfWidth(const LevelModelParams& p);

enum class SignalKind { Absorption, Transmission };

/// Absorption (or its negative) sampled over Raman detuning with delta_opt = 0.
/// `delta_grid` in rad/s; the returned spectrum's detuning axis is in Hz.
spectra::Spectrum cptLineshape(const LevelModelParams& p, std::span<const double> delta_grid,
                               SignalKind signal = SignalKind::Absorption);
/// Single-threaded reference for cptLineshape.
spectra::Spectrum cptLineshapeSerial(const LevelModelParams& p,
                                     std::span<const double> delta_grid,
                                     SignalKind signal = SignalKind::Absorption);

struct IntensityCalibration {
  double kappa = 0.0;  // rad/s per sqrt(uW/mm^2)
  double split = 0.5;  // intensity fraction per sideband

  void validate() const;
  double rabi(double intensity) const;
};

/// Frozen calibrations (see calibrateKappa) for the default parameters.
IntensityCalibration defaultCalibration(ModelKind kind);

struct ScanRow {
  double intensity = 0.0;  // uW/mm^2
  double hwhm_hz = 0.0;
  double amplitude = 0.0;
  double absorption = 0.0;  // off Raman resonance
};

/// One row per intensity, Omega1 = Omega2 = kappa sqrt(split * I). Rows follow input order.
std::vector<ScanRow> intensityScan(ModelKind kind, std::span<const double> intensities,
                                   const IntensityCalibration& cal, const LevelModelParams& base);
/// Single-threaded reference for intensityScan.
std::vector<ScanRow> intensityScanSerial(ModelKind kind, std::span<const double> intensities,
                                         const IntensityCalibration& cal,
                                         const LevelModelParams& base);

/// Divides the amplitude column by its mean so scans of different kinds share a scale.
std::vector<ScanRow> normalizeAmplitudes(std::vector<ScanRow> rows);

struct CalibrationTarget {
  double anchor_intensity = 0.1;     // uW/mm^2 where the width starts at gamma_c
  double slope_hz_per_unit = 200.0;  // reference HWHM gradient, Hz per uW/mm^2
};

/// Reference HWHM gradients: 0.2 kHz (lin||lin) and 0.1 kHz (sigma-sigma) per uW/mm^2.
CalibrationTarget defaultCalibrationTarget(ModelKind kind);

/// Fits kappa so that the power-broadened width excess best matches, in least squares over
/// `grid`, a line of the target gradient through (anchor, gamma_c).
IntensityCalibration calibrateKappa(const LevelModelParams& base, const CalibrationTarget& target,
                                    std::span<const double> grid, double split = 0.5);

/// 0.1, 0.2, ..., 4.4 uW/mm^2.
std::vector<double> standardIntensityGrid();

}  // namespace cpt::density
