#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cpt/atom_spec.hpp"
#include "cpt/units.hpp"

namespace cpt::lambda {
class PolarizationConfig;
}

namespace cpt::spectra {

struct Provenance {
  enum class Kind { Synthesized, Solved, Ingested };
  Kind kind = Kind::Synthesized;
  std::uint64_t seed = 0;  // synthesized only
  std::string path;        // ingested only
  std::string str() const;
};

/// Signal versus detuning from f_hfs (Hz). At least 8 samples, strictly increasing detuning.
class Spectrum {
 public:
  Spectrum(std::vector<double> detuning, std::vector<double> signal, Provenance meta);

  const std::vector<double>& detuning() const { return detuning_; }
  const std::vector<double>& signal() const { return signal_; }
  const Provenance& meta() const { return meta_; }
  std::size_t size() const { return detuning_.size(); }

 private:
  std::vector<double> detuning_;
  std::vector<double> signal_;
  Provenance meta_;
};

inline constexpr std::size_t kMinSpectrumSamples = 8;

struct LorentzianPeak {
  double center = 0.0;  // Hz
  double hwhm = 0.0;    // Hz
  double amplitude = 0.0;
};

/// amplitude * hwhm^2 / ((x - center)^2 + hwhm^2)
double lorentzian(double x, double center, double hwhm, double amplitude);

// Noise stream: std::mt19937_64 seeded with `seed`; each Gaussian deviate uses two
// 53-bit uniforms through Box-Muller (cosine branch only).
inline constexpr const char* kNoiseAlgorithm = "mt19937_64/box-muller-v1";

/// baseline + sum of Lorentzians + seeded Gaussian noise. Deterministic given seed.
Spectrum synthesizeSpectrum(std::span<const LorentzianPeak> peaks, std::span<const double> grid,
                            double baseline, double noise_sigma, std::uint64_t seed);
/// Noise-free profile, evaluated in parallel over the grid.
std::vector<double> lorentzianProfile(std::span<const LorentzianPeak> peaks,
                                      std::span<const double> grid, double baseline);
/// Single-threaded reference for lorentzianProfile.
std::vector<double> lorentzianProfileSerial(std::span<const LorentzianPeak> peaks,
                                            std::span<const double> grid, double baseline);

/// Uniform grid lo, lo + step, ..., up to hi inclusive (within step/1e6).
std::vector<double> uniformGrid(double lo, double hi, double step);

/// Interior local maxima (s[i] > s[i-1] and s[i] >= s[i+1]) whose prominence above the
/// lower neighbouring minimum exceeds `min_prominence`, as sample indices.
std::vector<std::size_t> localMaxima(std::span<const double> signal, double min_prominence = 0.0);

struct DoubletFit {
  double center1 = 0.0;
  double center2 = 0.0;
  double hwhm = 0.0;
  double amplitude = 0.0;
  double baseline = 0.0;
  double rms_residual = 0.0;
  bool converged = false;
  int iterations = 0;
  // Parameter order: center1, center2, hwhm, amplitude, baseline.
  std::array<std::array<double, 5>, 5> covariance{};
  std::array<double, 5> standardErrors() const;
  double cost = 0.0;  // half the residual sum of squares
};

struct FitOptions {
  double rel_cost_tol = 1e-10;
  double step_tol = 1e-12;
  int max_iterations = 200;
  int stall_iterations = 2;  // consecutive iterations under tolerance before stopping
};

/// Initial guess from the two largest local maxima after 3-point smoothing.
DoubletFit singlePeakInit(const Spectrum& s);

/// Damped least squares for two Lorentzians sharing hwhm and amplitude over a constant
/// baseline. Throws DegenerateInput for constant signals or fewer than 8 samples.
DoubletFit fitDoublet(const Spectrum& s, const std::optional<DoubletFit>& init = std::nullopt,
                      const FitOptions& options = {});

/// Evaluates the doublet model at x.
double doubletModel(const DoubletFit& f, double x);

struct QuadraticFieldFit {
  double offset_khz = 0.0;             // value at the vertex, relative to f_hfs
  double curvature_khz_per_uT2 = 0.0;
  double vertex_uT = 0.0;
  double offset_stderr_khz = 0.0;
  double curvature_stderr = 0.0;
  double vertex_stderr_uT = 0.0;
  double rms_residual_hz = 0.0;
  std::vector<std::size_t> rejected;   // indices of dropped duplicate-B points
};

/// center = offset + curvature (B - vertex)^2 by ordinary least squares.
/// `points` are (B in uT, center in Hz relative to f_hfs). Requires >= 4 points;
/// repeated B values keep the first occurrence. Throws RankDeficient or DegenerateInput.
QuadraticFieldFit fitQuadraticVsB(std::span<const std::pair<double, double>> points);

/// One peak per observable resonance, at its detuning from f_hfs, with the heuristic
/// weight scaled so the strongest peak has amplitude 1.
std::vector<LorentzianPeak> predictedPeaks(const AtomSpec& spec,
                                           const lambda::PolarizationConfig& pol, int f_prime,
                                           MagneticField b, double hwhm_hz);

/// Noise-free spectrum of predictedPeaks.
Spectrum predictedSpectrum(const AtomSpec& spec, const lambda::PolarizationConfig& pol,
                           int f_prime, MagneticField b, double hwhm_hz,
                           std::span<const double> grid);

// CSV: optional '#' comment lines, a header line, then numeric rows.
Spectrum readSpectrumCsv(const std::filesystem::path& path);
Spectrum parseSpectrumCsv(const std::string& text, const std::string& origin);
std::vector<std::pair<double, double>> parseFieldSeriesCsv(const std::string& text,
                                                           const std::string& origin);

}  // namespace cpt::spectra
