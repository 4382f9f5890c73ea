#include <doctest.h>

#include "cpt/density_matrix.hpp"
#include "cpt/spectra.hpp"

using namespace cpt;

TEST_CASE("parallel lineshape equals the serial reference") {
  auto p = density::defaultParams(density::ModelKind::FourLevelTrap);
  p.omega1 = p.omega2 = density::defaultCalibration(p.kind).rabi(1.8);
  std::vector<double> grid = spectra::uniformGrid(-3000, 3000, 25);
  for (double& d : grid) d = angularFrequency(d);
  const auto par = density::cptLineshape(p, grid, density::SignalKind::Transmission);
  const auto ser = density::cptLineshapeSerial(p, grid, density::SignalKind::Transmission);
  CHECK(par.detuning() == ser.detuning());
  CHECK(par.signal() == ser.signal());
  CHECK(par.meta().str() == "solved");
}

TEST_CASE("parallel intensity scan equals the serial reference") {
  const auto kind = density::ModelKind::ThreeLevel;
  const std::vector<double> grid = {0.1, 0.7, 1.3, 2.2, 3.1, 4.4};
  const auto cal = density::defaultCalibration(kind);
  const auto base = density::defaultParams(kind);
  const auto par = density::intensityScan(kind, grid, cal, base);
  const auto ser = density::intensityScanSerial(kind, grid, cal, base);
  REQUIRE(par.size() == ser.size());
  for (std::size_t i = 0; i < par.size(); ++i) {
    CHECK(par[i].intensity == ser[i].intensity);
    CHECK(par[i].hwhm_hz == ser[i].hwhm_hz);
    CHECK(par[i].amplitude == ser[i].amplitude);
    CHECK(par[i].absorption == ser[i].absorption);
  }
}

TEST_CASE("parallel Lorentzian profile equals the serial reference") {
  std::vector<spectra::LorentzianPeak> peaks;
  for (int k = -3; k <= 3; ++k) peaks.push_back({k * 280e3, 240.0 + 10 * k * k, 1.0 + 0.1 * k * k});
  const auto grid = spectra::uniformGrid(-1e6, 1e6, 37.0);
  CHECK(spectra::lorentzianProfile(peaks, grid, 0.25) ==
        spectra::lorentzianProfileSerial(peaks, grid, 0.25));
}

TEST_CASE("errors inside the parallel region propagate") {
  auto p = density::defaultParams(density::ModelKind::ThreeLevel);
  p.gamma_p = 0.0;
  p.gamma_c = 0.0;
  p.Gamma = 0.0;
  p.Gamma_c = 0.0;
  const std::vector<double> grid(16, 0.0);
  CHECK_THROWS(density::cptLineshape(p, grid));
}
