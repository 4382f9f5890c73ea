#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>

#include "cpt/error.hpp"
#include "cpt/lambda_schemes.hpp"
#include "cpt/spectra.hpp"

namespace cpt::spectra {

std::string Provenance::str() const {
  switch (kind) {
    case Kind::Synthesized:
      return "synthesized(seed=" + std::to_string(seed) + ")";
    case Kind::Solved:
      return "solved";
    case Kind::Ingested:
      return "ingested(" + path + ")";
  }
  return "unknown";
}

Spectrum::Spectrum(std::vector<double> detuning, std::vector<double> signal, Provenance meta)
    : detuning_(std::move(detuning)), signal_(std::move(signal)), meta_(std::move(meta)) {
  if (detuning_.size() != signal_.size())
    throw Error(ErrorCode::InvalidArgument, "detuning and signal lengths differ");
  if (detuning_.size() < kMinSpectrumSamples)
    throw Error(ErrorCode::InvalidArgument,
                "a spectrum needs at least " + std::to_string(kMinSpectrumSamples) + " samples");
  for (std::size_t i = 0; i < detuning_.size(); ++i) {
    if (!std::isfinite(detuning_[i]) || !std::isfinite(signal_[i]))
      throw Error(ErrorCode::InvalidArgument, "non-finite spectrum sample");
    if (i > 0 && !(detuning_[i] > detuning_[i - 1]))
      throw Error(ErrorCode::InvalidArgument, "detuning must be strictly increasing");
  }
}

double lorentzian(double x, double center, double hwhm, double amplitude) {
  const double u = x - center;
  const double w2 = hwhm * hwhm;
  return amplitude * w2 / (u * u + w2);
}

namespace {

void checkPeaks(std::span<const LorentzianPeak> peaks) {
  for (const auto& p : peaks) {
    if (!(p.hwhm > 0.0) || !std::isfinite(p.hwhm))
      throw Error(ErrorCode::InvalidArgument, "peak hwhm must be finite and > 0");
    if (!(p.amplitude > 0.0) || !std::isfinite(p.amplitude) || !std::isfinite(p.center))
      throw Error(ErrorCode::InvalidArgument, "peak amplitude must be finite and > 0");
  }
}

void checkGrid(std::span<const double> grid) {
  if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "empty detuning grid");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw Error(ErrorCode::InvalidArgument, "detuning grid must be strictly increasing");
}

double profileAt(std::span<const LorentzianPeak> peaks, double x, double baseline) {
  double y = baseline;
  for (const auto& p : peaks) y += lorentzian(x, p.center, p.hwhm, p.amplitude);
  return y;
}

double unitUniform(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

double gaussian(std::mt19937_64& gen) {
  const double u1 = 1.0 - unitUniform(gen);  // (0, 1]
  const double u2 = unitUniform(gen);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

}  // namespace

std::vector<double> lorentzianProfile(std::span<const LorentzianPeak> peaks,
                                      std::span<const double> grid, double baseline) {
  checkPeaks(peaks);
  std::vector<double> y(grid.size());
  const auto n = static_cast<std::int64_t>(grid.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) y[i] = profileAt(peaks, grid[i], baseline);
  return y;
}

std::vector<double> lorentzianProfileSerial(std::span<const LorentzianPeak> peaks,
                                            std::span<const double> grid, double baseline) {
  checkPeaks(peaks);
  std::vector<double> y(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) y[i] = profileAt(peaks, grid[i], baseline);
  return y;
}

Spectrum synthesizeSpectrum(std::span<const LorentzianPeak> peaks, std::span<const double> grid,
                            double baseline, double noise_sigma, std::uint64_t seed) {
  checkGrid(grid);
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
    throw Error(ErrorCode::InvalidArgument, "noise sigma must be finite and >= 0");
  std::vector<double> y = lorentzianProfile(peaks, grid, baseline);
  if (noise_sigma > 0.0) {
    std::mt19937_64 gen(seed);
    for (double& v : y) v += noise_sigma * gaussian(gen);
  }
  return Spectrum(std::vector<double>(grid.begin(), grid.end()), std::move(y),
                  {Provenance::Kind::Synthesized, seed, {}});
}

std::vector<double> uniformGrid(double lo, double hi, double step) {
  if (!(step > 0.0) || !std::isfinite(lo) || !std::isfinite(hi) || !(hi >= lo))
    throw Error(ErrorCode::InvalidArgument, "grid needs lo <= hi and step > 0");
  const double span = (hi - lo) / step;
  if (span > 1e8) throw Error(ErrorCode::InvalidArgument, "grid has too many points");
  const auto count = static_cast<std::size_t>(std::floor(span + 1e-6)) + 1;
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i) g[i] = lo + static_cast<double>(i) * step;
  return g;
}

std::vector<std::size_t> localMaxima(std::span<const double> s, double min_prominence) {
  std::vector<std::size_t> out;
  if (s.size() < 3) return out;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    if (!(s[i] > s[i - 1] && s[i] >= s[i + 1])) continue;
    double left_min = s[i];
    for (std::size_t j = i; j-- > 0;) {
      if (s[j] > s[i]) break;
      left_min = std::min(left_min, s[j]);
    }
    double right_min = s[i];
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      if (s[j] > s[i]) break;
      right_min = std::min(right_min, s[j]);
    }
    if (s[i] - std::max(left_min, right_min) > min_prominence) out.push_back(i);
  }
  return out;
}

std::vector<LorentzianPeak> predictedPeaks(const AtomSpec& spec,
                                           const lambda::PolarizationConfig& pol, int f_prime,
                                           MagneticField b, double hwhm_hz) {
  const auto resonances = lambda::observableResonances(spec, pol, f_prime, b);
  double max_weight = 0.0;
  for (const auto& r : resonances) max_weight = std::max(max_weight, r.weight);
  std::vector<LorentzianPeak> peaks;
  for (const auto& r : resonances)
    if (r.weight > 0.0) peaks.push_back({r.frequency - spec.f_hfs, hwhm_hz, r.weight / max_weight});
  checkPeaks(peaks);
  return peaks;
}

Spectrum predictedSpectrum(const AtomSpec& spec, const lambda::PolarizationConfig& pol,
                           int f_prime, MagneticField b, double hwhm_hz,
                           std::span<const double> grid) {
  const auto peaks = predictedPeaks(spec, pol, f_prime, b, hwhm_hz);
  return synthesizeSpectrum(peaks, grid, 0.0, 0.0, 0);
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct CsvRows {
  std::vector<std::array<double, 2>> rows;
  std::vector<std::size_t> line_numbers;
};

[[noreturn]] void malformed(const std::string& origin, std::size_t line, const std::string& what) {
  throw Error(ErrorCode::MalformedInput, origin + ":" + std::to_string(line) + ": " + what);
}

double parseNumber(std::string_view field, const std::string& origin, std::size_t line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v))
    malformed(origin, line, "not a number: '" + std::string(field) + "'");
  return v;
}

// Two numeric columns after an optional comment block and one header line.
CsvRows parseTwoColumn(const std::string& text, const std::string& origin) {
  CsvRows out;
  std::istringstream in(text);
  std::string raw;
  std::size_t line = 0;
  bool header_seen = false;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view l = trim(raw);
    if (l.empty() || l.front() == '#') continue;
    const auto comma = l.find(',');
    if (comma == std::string_view::npos || l.find(',', comma + 1) != std::string_view::npos)
      malformed(origin, line, "expected exactly 2 comma-separated columns");
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    out.rows.push_back({parseNumber(l.substr(0, comma), origin, line),
                        parseNumber(l.substr(comma + 1), origin, line)});
    out.line_numbers.push_back(line);
  }
  if (!header_seen) malformed(origin, line, "missing header line");
  return out;
}

}  // namespace

Spectrum parseSpectrumCsv(const std::string& text, const std::string& origin) {
  const CsvRows csv = parseTwoColumn(text, origin);
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    if (i > 0 && !(csv.rows[i][0] > csv.rows[i - 1][0]))
      malformed(origin, csv.line_numbers[i], "detuning must be strictly increasing");
    x.push_back(csv.rows[i][0]);
    y.push_back(csv.rows[i][1]);
  }
  if (x.size() < kMinSpectrumSamples)
    throw Error(ErrorCode::MalformedInput, origin + ": need at least " +
                                               std::to_string(kMinSpectrumSamples) +
                                               " samples, found " + std::to_string(x.size()));
  return Spectrum(std::move(x), std::move(y), {Provenance::Kind::Ingested, 0, origin});
}

Spectrum readSpectrumCsv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parseSpectrumCsv(ss.str(), path.string());
}

std::vector<std::pair<double, double>> parseFieldSeriesCsv(const std::string& text,
                                                           const std::string& origin) {
  const CsvRows csv = parseTwoColumn(text, origin);
  std::vector<std::pair<double, double>> out;
  for (const auto& r : csv.rows) out.emplace_back(r[0], r[1]);
  return out;
}

}  // namespace cpt::spectra
