#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cpt/atomic_structure.hpp"
#include "cpt/cli.hpp"
#include "cpt/lambda_schemes.hpp"
#include "cpt/spectra.hpp"

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cpt::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string l;
  while (std::getline(in, l)) out.push_back(l);
  return out;
}

// Data rows of a CSV (comments and header skipped), split on commas.
std::vector<std::vector<std::string>> csvRows(const std::string& s) {
  std::vector<std::vector<std::string>> rows;
  bool header = false;
  for (const auto& l : lines(s)) {
    if (l.empty() || l[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    std::vector<std::string> cells;
    std::istringstream in(l);
    std::string c;
    while (std::getline(in, c, ',')) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

std::vector<std::string> csvHeader(const std::string& s) {
  for (const auto& l : lines(s)) {
    if (l.empty() || l[0] == '#') continue;
    std::vector<std::string> cells;
    std::istringstream in(l);
    std::string c;
    while (std::getline(in, c, ',')) cells.push_back(c);
    return cells;
  }
  return {};
}

std::filesystem::path tempFile(const std::string& name, const std::string& content) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << content;
  return p;
}

}  // namespace

TEST_CASE("levels at zero field") {
  const auto r = run({"levels", "--b", "0"});
  REQUIRE(r.code == 0);
  const auto rows = csvRows(r.out);
  CHECK(rows.size() == 16);
  for (const auto& row : rows) CHECK(std::stod(row[4]) == 0.0);
  CHECK(r.out.rfind("# generated-by cpt ", 0) == 0);
  CHECK(r.out.find("levels --b 0") != std::string::npos);
}

TEST_CASE("levels rows reproduce the magic-field offset") {
  const auto up = csvRows(run({"levels", "--b", "139.3046", "--manifold", "upper"}).out);
  CHECK(up.size() == 9);
  const auto lo = csvRows(run({"levels", "--b", "139.3046", "--manifold", "lower"}).out);
  double s_up = 0, s_lo = 0;
  for (const auto& r : up)
    if (r[3] == "1") s_up = std::stod(r[4]);
  for (const auto& r : lo)
    if (r[3] == "-1") s_lo = std::stod(r[4]);
  CHECK(std::abs((s_up - s_lo) - (-777.662)) < 1e-3);
}

TEST_CASE("levels beyond the validity bound") {
  const auto r = run({"levels", "--b-range", "400:600:100"});
  CHECK(r.code != 0);
  CHECK(r.err.find("error [field_out_of_range]") == 0);
  CHECK(run({"levels", "--b-range", "400:600:100", "--allow-extrapolation"}).code == 0);
}

TEST_CASE("magic reports") {
  const auto j = nlohmann::json::parse(run({"magic"}).out);
  CHECK(std::abs(j["vertex_uT"].get<double>() - 139.3046) < 5e-4);
  const auto z = nlohmann::json::parse(run({"magic", "--transition", "0,0"}).out);
  CHECK(z["has_magic_field"].get<bool>());
  CHECK(z["vertex_uT"].get<double>() == 0.0);
  const auto none = nlohmann::json::parse(run({"magic", "--transition", "1,-1"}).out);
  CHECK_FALSE(none["has_magic_field"].get<bool>());
  CHECK(none["vertex_uT"].is_null());
}

TEST_CASE("schemes listings") {
  const auto par = run({"schemes", "--pol", "lin:0", "--fprime", "3"});
  CHECK(par.out.find("(0, 0) 2 schemes: no common dark state") != std::string::npos);
  const auto perp = run({"schemes", "--pol", "lin:90"});
  CHECK(perp.out.find("(0, 0) 2 schemes: common dark state") != std::string::npos);
  const auto sp = run({"schemes", "--pol", "sigma+", "--fprime", "3", "--format", "csv"});
  const auto rows = csvRows(sp.out);
  CHECK(rows.size() == 6);
  for (const auto& r : rows) CHECK(r[0] == r[1]);
  CHECK(run({"schemes", "--pol", "circular"}).code != 0);
}

TEST_CASE("json and csv carry the same numbers") {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"levels", "--b-range", "0:300:100"},
           {"scan", "--kind", "sigma", "--intensities", "0.2,1.5"},
           {"spectrum", "--b", "139", "--window=-3000:3000:500", "--noise", "0.01", "--seed", "4"}}) {
    auto csv_args = args;
    csv_args.insert(csv_args.end(), {"--format", "csv"});
    auto json_args = args;
    json_args.insert(json_args.end(), {"--format", "json"});
    const auto c = run(csv_args);
    const auto j = run(json_args);
    REQUIRE(c.code == 0);
    REQUIRE(j.code == 0);
    const auto header = csvHeader(c.out);
    const auto rows = csvRows(c.out);
    const auto doc = nlohmann::json::parse(j.out);
    REQUIRE(doc["rows"].size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t k = 0; k < header.size(); ++k) {
        const auto& v = doc["rows"][i][header[k]];
        if (v.is_number_float())
          CHECK(v.get<double>() == std::stod(rows[i][k]));
        else if (v.is_number_integer())
          CHECK(v.get<long long>() == std::stoll(rows[i][k]));
        else if (v.is_string())
          CHECK(v.get<std::string>() == rows[i][k]);
      }
    }
  }
}

TEST_CASE("identical invocations are byte-identical") {
  const std::vector<std::string> args = {"spectrum", "--b", "40", "--pol", "sigma-",
                                         "--noise", "0.02", "--seed", "7",
                                         "--window=-1000:1000:50"};
  CHECK(run(args).out == run(args).out);
  CHECK(run(args).out != run({"spectrum", "--b", "40", "--pol", "sigma-", "--noise", "0.02",
                              "--seed", "8", "--window=-1000:1000:50"})
                             .out);
}

TEST_CASE("spectrum to fit round trip") {
  const auto spec = run({"spectrum", "--b", "139", "--pol", "lin:0", "--hwhm", "240",
                         "--window=-4000:5000:2", "--noise", "0.01", "--seed", "1"});
  REQUIRE(spec.code == 0);
  const auto file = tempFile("cpt_roundtrip.csv", spec.out);
  const auto fit = run({"fit", "--input", file.string()});
  REQUIRE(fit.code == 0);
  const auto j = nlohmann::json::parse(fit.out);

  const auto peaks = cpt::spectra::predictedPeaks(cpt::AtomSpec::cs133(),
                                                  cpt::lambda::PolarizationConfig::linear(0.0), 3,
                                                  cpt::MagneticField::microtesla(139.0), 240.0);
  std::vector<double> centers;
  double amp = 0.0;
  for (const auto& p : peaks)
    if (std::abs(p.center) < 4000) {
      centers.push_back(p.center);
      amp = p.amplitude;
    }
  REQUIRE(centers.size() == 2);
  auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
  CHECK(rel(j["center1"].get<double>(), centers[0]) < 1e-3);
  CHECK(rel(j["center2"].get<double>(), centers[1]) < 1e-3);
  CHECK(rel(j["hwhm"].get<double>(), 240.0) < 1e-2);
  CHECK(rel(j["amplitude"].get<double>(), amp) < 1e-2);
  CHECK(j["converged"].get<bool>());
  std::filesystem::remove(file);
}

TEST_CASE("fit errors carry codes and line numbers") {
  const auto file = tempFile("cpt_bad.csv", "detuning_hz,signal\n1,2\n2,3\nthree,4\n");
  const auto r = run({"fit", "--input", file.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("error [malformed_input]") == 0);
  CHECK(r.err.find(":4:") != std::string::npos);
  std::filesystem::remove(file);
  CHECK(run({"fit", "--input", "/nonexistent/file.csv"}).err.find("error [io_error]") == 0);
  CHECK(run({"fit"}).code == cpt::cli::kExitUsage);
  CHECK(run({"bogus"}).code == cpt::cli::kExitUsage);
}

TEST_CASE("quadratic fit mode") {
  std::string text = "b_uT,center_hz\n";
  for (int i = 0; i < 20; ++i) {
    const double b = 8.0 + i * 462.0 / 19.0;
    const double f = -777.6619618194134 + 40.073758336264254e-3 * (b - 139.3045786068504) *
                                              (b - 139.3045786068504);
    std::ostringstream row;
    row.precision(17);
    row << b << "," << f << "\n";
    text += row.str();
  }
  const auto file = tempFile("cpt_quad.csv", text);
  const auto j = nlohmann::json::parse(run({"fit", "--input", file.string(), "--mode", "quadratic"}).out);
  CHECK(j["vertex_uT"].get<double>() == doctest::Approx(139.3045786068504).epsilon(1e-9));
  CHECK(j["curvature_khz_per_uT2"].get<double>() == doctest::Approx(40.073758336264254e-6).epsilon(1e-9));
  std::filesystem::remove(file);
}

TEST_CASE("scan rejects a zero intensity") {
  const auto r = run({"scan", "--kind", "linlin", "--intensities", "0,1"});
  CHECK(r.code == 1);
  CHECK(r.err.find("error [invalid_argument]") == 0);
}

TEST_CASE("lineshape command") {
  const auto r = run({"lineshape", "--kind", "sigma", "--intensity", "1", "--window=-1000:1000:100",
                      "--signal", "transmission"});
  REQUIRE(r.code == 0);
  const auto s = cpt::spectra::parseSpectrumCsv(r.out, "mem");
  CHECK(s.size() == 21);
  // Transmission peaks at Raman resonance.
  CHECK(s.signal()[10] > s.signal()[0]);
}
