#include <doctest.h>

#include <cmath>
#include <vector>
#include <numeric>
#include <random>

#include "cpt/atomic_structure.hpp"
#include "cpt/error.hpp"
#include "cpt/lambda_schemes.hpp"
#include "cpt/spectra.hpp"

using namespace cpt;
using namespace cpt::spectra;

namespace {

const AtomSpec kCs = AtomSpec::cs133();

Spectrum doublet(double c1, double c2, double w, double a, double base, double noise,
                 std::uint64_t seed, double lo = -6000, double hi = 6000, double step = 20) {
  const LorentzianPeak peaks[] = {{c1, w, a}, {c2, w, a}};
  return synthesizeSpectrum(peaks, uniformGrid(lo, hi, step), base, noise, seed);
}

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

std::size_t maximaIn(const Spectrum& s) { return localMaxima(s.signal(), 1e-6).size(); }

}  // namespace

TEST_CASE("Lorentzian apex and half maximum") {
  const LorentzianPeak p[] = {{120.0, 240.0, 3.0}};
  const double grid[] = {-120.0, 120.0, 360.0, 500, 600, 700, 800, 900};
  const auto s = synthesizeSpectrum(p, grid, 0.5, 0.0, 0);
  CHECK(s.signal()[1] == doctest::Approx(3.5));
  CHECK(s.signal()[0] == doctest::Approx(2.0));
  CHECK(s.signal()[2] == doctest::Approx(2.0));
  CHECK(s.meta().str() == "synthesized(seed=0)");
}

TEST_CASE("spectrum invariants") {
  CHECK_THROWS_AS(Spectrum({1, 2, 3}, {1, 2, 3}, {}), Error);
  CHECK_THROWS_AS(Spectrum({1, 2, 3, 4, 5, 6, 7, 7}, {0, 0, 0, 0, 0, 0, 0, 0}, {}), Error);
  CHECK_THROWS_AS(Spectrum({1, 2, 3, 4, 5, 6, 7, 8}, {0, 0, 0, 0, 0, 0, 0}, {}), Error);
  const double empty[] = {0.0};
  CHECK_THROWS_AS(synthesizeSpectrum({}, std::span<const double>(empty, 0), 0.0, 0.0, 0), Error);
  CHECK_THROWS_AS(synthesizeSpectrum({}, uniformGrid(0, 10, 1), 0.0, -1.0, 0), Error);
  const LorentzianPeak bad[] = {{0.0, 0.0, 1.0}};
  CHECK_THROWS_AS(synthesizeSpectrum(bad, uniformGrid(0, 10, 1), 0.0, 0.0, 0), Error);
  CHECK(uniformGrid(0.0, 1.0, 0.1).size() == 11);
}

TEST_CASE("seeded noise is deterministic and Gaussian") {
  const auto grid = uniformGrid(0, 99999, 1);
  const auto a = synthesizeSpectrum({}, grid, 0.0, 2.0, 42);
  const auto b = synthesizeSpectrum({}, grid, 0.0, 2.0, 42);
  const auto c = synthesizeSpectrum({}, grid, 0.0, 2.0, 43);
  CHECK(a.signal() == b.signal());
  CHECK(a.signal() != c.signal());
  const auto& y = a.signal();
  const double n = static_cast<double>(y.size());
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double var = 0.0;
  for (double v : y) var += (v - mean) * (v - mean);
  var /= n - 1;
  CHECK(std::abs(mean) < 4 * 2.0 / std::sqrt(n));
  CHECK(std::sqrt(var) == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("resolved doublet at +-1.55 kHz") {
  const auto s = doublet(-1550, 1550, 240, 1.0, 0.0, 0.0, 0);
  CHECK(maximaIn(s) == 2);
}

TEST_CASE("noiseless doublet recovery") {
  const auto s = doublet(-777.66, 2332.9, 240.0, 0.8, 0.1, 0.0, 0);
  const auto f = fitDoublet(s);
  CHECK(f.converged);
  CHECK(rel(f.center1, -777.66) < 1e-6);
  CHECK(rel(f.center2, 2332.9) < 1e-6);
  CHECK(rel(f.hwhm, 240.0) < 1e-6);
  CHECK(rel(f.amplitude, 0.8) < 1e-6);
  CHECK(rel(f.baseline, 0.1) < 1e-6);
  CHECK(f.center1 < f.center2);
  const double at_c2 = 0.1 + 0.8 + lorentzian(2332.9, -777.66, 240.0, 0.8);
  CHECK(doubletModel(f, 2332.9) == doctest::Approx(at_c2).epsilon(1e-6));
}

TEST_CASE("noisy doublet Monte-Carlo") {
  int good = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto s = doublet(-1550, 1550, 240, 1.0, 0.0, 0.02, seed);
    const auto f = fitDoublet(s);
    if (std::abs(f.center1 + 1550) < 24 && std::abs(f.center2 - 1550) < 24) ++good;
  }
  CHECK(good >= 48);
}

TEST_CASE("overlapping doublet reports a large separation uncertainty") {
  // 8 uT lin||lin splitting is about 180 Hz, below the 240 Hz HWHM.
  auto separationStderr = [](const DoubletFit& g) {
    const auto& c = g.covariance;
    return std::sqrt(c[0][0] + c[1][1] - 2.0 * c[0][1]);
  };
  // Reported separation uncertainty versus the Monte-Carlo scatter of the separation.
  auto study = [&](double half_sep) {
    std::vector<double> seps;
    double reported = 0.0;
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
      DoubletFit f;
      CHECK_NOTHROW(f = fitDoublet(doublet(-half_sep, half_sep, 240, 1.0, 0.0, 0.02, seed)));
      CHECK(std::isfinite(f.center1));
      CHECK(std::isfinite(f.center2));
      seps.push_back(f.center2 - f.center1);
      reported += separationStderr(f) / 40.0;
    }
    double mean = 0.0, var = 0.0;
    for (double v : seps) mean += v / seps.size();
    for (double v : seps) var += (v - mean) * (v - mean) / (seps.size() - 1);
    return std::pair{reported, std::sqrt(var)};
  };
  const auto [overlap_reported, overlap_scatter] = study(90.0);
  const auto [resolved_reported, resolved_scatter] = study(1550.0);
  MESSAGE("separation stderr overlapping " << overlap_reported << " (scatter " << overlap_scatter
                                           << "), resolved " << resolved_reported << " (scatter "
                                           << resolved_scatter << ") Hz");
  // 40 samples give the scatter about 11% relative spread; allow 3 sigma.
  CHECK(overlap_reported == doctest::Approx(overlap_scatter).epsilon(0.35));
  CHECK(resolved_reported == doctest::Approx(resolved_scatter).epsilon(0.35));
  CHECK(overlap_reported > 2.0 * resolved_reported);
}

TEST_CASE("fit invariants: idempotence and equivariance") {
  const auto s = doublet(-800, 2300, 240, 0.7, 0.05, 0.01, 17);
  const auto f = fitDoublet(s);
  REQUIRE(f.converged);
  const auto again = fitDoublet(s, f);
  CHECK(std::abs(again.cost - f.cost) <= 1e-12 * f.cost);

  const double shift = 12345.0;
  std::vector<double> x = s.detuning();
  for (double& v : x) v += shift;
  const auto g = fitDoublet(Spectrum(x, s.signal(), {}));
  CHECK(rel(g.center1, f.center1 + shift) < 1e-9);
  CHECK(rel(g.center2, f.center2 + shift) < 1e-9);
  CHECK(rel(g.hwhm, f.hwhm) < 1e-9);

  const double k = 37.5;
  std::vector<double> y = s.signal();
  for (double& v : y) v *= k;
  const auto h = fitDoublet(Spectrum(s.detuning(), y, {}));
  CHECK(rel(h.amplitude, k * f.amplitude) < 1e-9);
  CHECK(rel(h.baseline, k * f.baseline) < 1e-9);
  CHECK(rel(h.center1, f.center1) < 1e-9);
  CHECK(rel(h.center2, f.center2) < 1e-9);
  CHECK(rel(h.hwhm, f.hwhm) < 1e-9);
}

TEST_CASE("dip spectra are fitted with a negative amplitude") {
  const auto up = doublet(-1000, 1500, 300, 1.0, 0.0, 0.0, 0);
  std::vector<double> y = up.signal();
  for (double& v : y) v = 5.0 - v;
  const auto f = fitDoublet(Spectrum(up.detuning(), y, {}));
  CHECK(rel(f.amplitude, -1.0) < 1e-6);
  CHECK(rel(f.baseline, 5.0) < 1e-6);
  CHECK(rel(f.center2, 1500) < 1e-6);
}

TEST_CASE("constant signal is degenerate") {
  const auto s = Spectrum(uniformGrid(0, 9, 1), std::vector<double>(10, 2.0), {});
  try {
    fitDoublet(s);
    FAIL("expected DegenerateInput");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateInput);
  }
}

TEST_CASE("initial guesses") {
  const auto s = doublet(-1550, 1550, 240, 1.0, 0.0, 0.0, 0);
  const auto g = singlePeakInit(s);
  CHECK(std::abs(g.center1 + 1550) <= 40);
  CHECK(std::abs(g.center2 - 1550) <= 40);

  const LorentzianPeak one[] = {{300, 200, 1.0}};
  const auto single = synthesizeSpectrum(one, uniformGrid(-3000, 3000, 20), 0.0, 0.0, 0);
  const auto gs = singlePeakInit(single);
  CHECK(std::abs(gs.center1 - 300) < 200);
  CHECK(std::abs(gs.center2 - 300) < 200);

  const auto ramp = Spectrum(uniformGrid(0, 15, 1), uniformGrid(0, 15, 1), {});
  DoubletFit gr;
  CHECK_NOTHROW(gr = singlePeakInit(ramp));
  CHECK(gr.center1 == doctest::Approx(3.75));
  CHECK(gr.center2 == doctest::Approx(11.25));
}

TEST_CASE("quadratic fit recovers the magic-field model") {
  const auto model = atomic::quadraticModel(kCs, -1, 1);
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < 20; ++i) {
    const double b = 8.0 + i * (470.0 - 8.0) / 19.0;
    pts.emplace_back(b, model.evaluate(MagneticField::microtesla(b)));
  }
  const auto q = fitQuadraticVsB(pts);
  CHECK(rel(q.vertex_uT, model.magic_field->inMicrotesla()) < 1e-9);
  CHECK(rel(q.curvature_khz_per_uT2, model.curvatureHzPerMicrotesla2() / 1e3) < 1e-9);
  CHECK(rel(q.offset_khz, *model.vertex_offset / 1e3) < 1e-9);
  CHECK(q.rms_residual_hz < 1e-6);
  CHECK(q.rejected.empty());
}

TEST_CASE("quadratic fit on noisy series gives finite standard errors") {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> noise(0.0, 27.0);
  std::vector<std::pair<double, double>> pts;
  for (double b = 10; b <= 470; b += 20)
    pts.emplace_back(b, 1420.0 + 40.9e-3 * (b - 141.0) * (b - 141.0) + noise(gen));
  const auto q = fitQuadraticVsB(pts);
  CHECK(q.vertex_uT == doctest::Approx(141.0).epsilon(0.05));
  CHECK(q.curvature_khz_per_uT2 == doctest::Approx(40.9e-6).epsilon(0.05));
  CHECK(q.vertex_stderr_uT > 0.0);
  CHECK(q.curvature_stderr > 0.0);
  CHECK(q.offset_stderr_khz > 0.0);
  CHECK(q.rms_residual_hz == doctest::Approx(27.0).epsilon(0.4));
}

TEST_CASE("quadratic fit input handling") {
  const std::vector<std::pair<double, double>> dup = {
      {10.0, 100.0}, {20.0, 400.0}, {30.0, 900.0}, {20.0, 555.0}};
  const auto q = fitQuadraticVsB(dup);
  REQUIRE(q.rejected.size() == 1);
  CHECK(q.rejected[0] == 3);
  CHECK(q.curvature_khz_per_uT2 == doctest::Approx(1e-3));
  CHECK(q.vertex_uT == doctest::Approx(0.0).scale(1));

  const std::vector<std::pair<double, double>> same = {{5, 1}, {5, 2}, {5, 3}, {5, 4}};
  try {
    fitQuadraticVsB(same);
    FAIL("expected RankDeficient");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RankDeficient);
  }
  CHECK_THROWS_AS(fitQuadraticVsB(std::vector<std::pair<double, double>>{{1, 1}, {2, 4}, {3, 9}}),
                  Error);
}

TEST_CASE("CSV ingestion") {
  std::string text = "# comment\ndetuning_hz,signal\n";
  for (int i = 0; i < 10; ++i) text += std::to_string(i * 10) + "," + std::to_string(i % 3) + "\n";
  const auto s = parseSpectrumCsv(text, "mem");
  CHECK(s.size() == 10);
  CHECK(s.meta().str() == "ingested(mem)");

  try {
    parseSpectrumCsv("detuning_hz,signal\n1,2\n2,abc\n", "bad.csv");
    FAIL("expected MalformedInput");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MalformedInput);
    CHECK(std::string(e.what()).find("bad.csv:3") != std::string::npos);
  }
  CHECK_THROWS_AS(parseSpectrumCsv("detuning_hz,signal\n2,1\n1,1\n", "x"), Error);
  CHECK_THROWS_AS(parseSpectrumCsv("detuning_hz,signal\n1,1,1\n", "x"), Error);
  CHECK_THROWS_AS(parseSpectrumCsv("detuning_hz,signal\n1,1\n", "x"), Error);
  const auto series = parseFieldSeriesCsv("b_uT,center_hz\n8,1\n9,2\n", "x");
  CHECK(series.size() == 2);
}

TEST_CASE("predicted spectra") {
  const auto lin = lambda::PolarizationConfig::linear(0.0);
  const auto narrow = uniformGrid(-5000, 5000, 10);
  const auto s139 = predictedSpectrum(kCs, lin, 3, MagneticField::microtesla(139.0), 240, narrow);
  const auto peaks = localMaxima(s139.signal(), 1e-3);
  REQUIRE(peaks.size() == 2);
  const double sep = s139.detuning()[peaks[1]] - s139.detuning()[peaks[0]];
  CHECK(std::abs(sep - 3100) < 50);

  const auto wide = uniformGrid(-1.5e6, 1.5e6, 500);
  const auto sig = predictedSpectrum(kCs, lambda::PolarizationConfig::sigmaMinus(), 3,
                                     MagneticField::microtesla(40.0), 240, wide);
  CHECK(localMaxima(sig.signal(), 1e-3).size() == 6);

  const auto s8 = predictedSpectrum(kCs, lin, 3, MagneticField::microtesla(8.0), 240,
                                    uniformGrid(-2000, 2000, 5));
  CHECK(localMaxima(s8.signal(), 1e-3).size() == 1);
  const auto s20 = predictedSpectrum(kCs, lin, 3, MagneticField::microtesla(20.0), 240,
                                     uniformGrid(-2000, 2000, 5));
  CHECK(localMaxima(s20.signal(), 1e-3).size() == 2);
}
