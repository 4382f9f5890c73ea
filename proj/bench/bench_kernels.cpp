// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <vector>

#include "cpt/density_matrix.hpp"
#include "cpt/spectra.hpp"
#include "cpt/units.hpp"

using namespace cpt;

namespace {

const auto kKind = density::ModelKind::FourLevelTrap;

std::vector<double> ramanGrid(int points) {
  std::vector<double> g;
  for (const double hz : spectra::uniformGrid(-2000.0, 2000.0, 4000.0 / (points - 1)))
    g.push_back(angularFrequency(hz));
  return g;
}

density::LevelModelParams drivenParams() {
  auto p = density::defaultParams(kKind);
  const auto cal = density::defaultCalibration(kKind);
  p.omega1 = p.omega2 = cal.rabi(1.0);
  return p;
}

void BM_ScanSerial(benchmark::State& state) {
  const auto grid = density::standardIntensityGrid();
  for (auto _ : state)
    benchmark::DoNotOptimize(density::intensityScanSerial(
        kKind, grid, density::defaultCalibration(kKind), density::defaultParams(kKind)));
}

void BM_ScanParallel(benchmark::State& state) {
  const auto grid = density::standardIntensityGrid();
  for (auto _ : state)
    benchmark::DoNotOptimize(density::intensityScan(
        kKind, grid, density::defaultCalibration(kKind), density::defaultParams(kKind)));
}

void BM_LineshapeSerial(benchmark::State& state) {
  const auto grid = ramanGrid(static_cast<int>(state.range(0)));
  const auto p = drivenParams();
  for (auto _ : state) benchmark::DoNotOptimize(density::cptLineshapeSerial(p, grid));
}

void BM_LineshapeParallel(benchmark::State& state) {
  const auto grid = ramanGrid(static_cast<int>(state.range(0)));
  const auto p = drivenParams();
  for (auto _ : state) benchmark::DoNotOptimize(density::cptLineshape(p, grid));
}

std::vector<spectra::LorentzianPeak> manyPeaks() {
  std::vector<spectra::LorentzianPeak> peaks;
  for (int k = -7; k <= 7; ++k) peaks.push_back({k * 90e3, 240.0, 1.0});
  return peaks;
}

void BM_ProfileSerial(benchmark::State& state) {
  const auto grid = spectra::uniformGrid(-1.5e6, 1.5e6, 3e6 / (state.range(0) - 1));
  const auto peaks = manyPeaks();
  for (auto _ : state) benchmark::DoNotOptimize(spectra::lorentzianProfileSerial(peaks, grid, 0.0));
}

void BM_ProfileParallel(benchmark::State& state) {
  const auto grid = spectra::uniformGrid(-1.5e6, 1.5e6, 3e6 / (state.range(0) - 1));
  const auto peaks = manyPeaks();
  for (auto _ : state) benchmark::DoNotOptimize(spectra::lorentzianProfile(peaks, grid, 0.0));
}

}  // namespace

BENCHMARK(BM_ScanSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScanParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_LineshapeSerial)->Arg(201)->Arg(2001)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LineshapeParallel)->Arg(201)->Arg(2001)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ProfileSerial)->Arg(6001)->Arg(600001)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ProfileParallel)->Arg(6001)->Arg(600001)->Unit(benchmark::kMicrosecond)->UseRealTime();

BENCHMARK_MAIN();
