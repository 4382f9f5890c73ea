#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cpt/atom_spec.hpp"
#include "cpt/atomic_structure.hpp"
#include "cpt/cli.hpp"
#include "cpt/density_matrix.hpp"
#include "cpt/error.hpp"
#include "cpt/lambda_schemes.hpp"
#include "cpt/spectra.hpp"
#include "output.hpp"

namespace cpt::cli {

namespace {

struct Globals {
  std::string atom = "cs133";
  std::string constants;
  std::string format;
  std::uint64_t seed = 0;
  bool allow_extrapolation = false;
};

std::string joinArgs(const std::vector<std::string>& args) {
  std::string s;
  for (const auto& a : args) {
    if (!s.empty()) s += ' ';
    s += a.find_first_of(" \t") == std::string::npos ? a : "'" + a + "'";
  }
  return s;
}

Format parseFormat(const std::string& requested, Format fallback, bool text_allowed) {
  if (requested.empty()) return fallback;
  if (requested == "csv") return Format::Csv;
  if (requested == "json") return Format::Json;
  if (requested == "text" && text_allowed) return Format::Text;
  throw Error(ErrorCode::InvalidArgument, "unsupported --format '" + requested + "' here");
}

double parseDouble(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty() || !std::isfinite(v))
    throw Error(ErrorCode::InvalidArgument, what + ": not a number: '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

// "lo:hi:step"
std::vector<double> parseRange(const std::string& s, const std::string& what) {
  const auto parts = split(s, ':');
  if (parts.size() != 3)
    throw Error(ErrorCode::InvalidArgument, what + " must be lo:hi:step, got '" + s + "'");
  return spectra::uniformGrid(parseDouble(parts[0], what), parseDouble(parts[1], what),
                              parseDouble(parts[2], what));
}

std::vector<double> parseList(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& p : split(s, ',')) out.push_back(parseDouble(p, what));
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, what + " is empty");
  return out;
}

lambda::PolarizationConfig parsePolarization(const std::string& s) {
  if (s == "sigma+") return lambda::PolarizationConfig::sigmaPlus();
  if (s == "sigma-") return lambda::PolarizationConfig::sigmaMinus();
  if (s == "lin") return lambda::PolarizationConfig::linear(0.0);
  if (s.rfind("lin:", 0) == 0) {
    const double deg = parseDouble(s.substr(4), "--pol");
    return lambda::PolarizationConfig::linear(deg * std::numbers::pi / 180.0);
  }
  throw Error(ErrorCode::InvalidArgument,
              "--pol must be sigma+, sigma- or lin:<theta_deg>, got '" + s + "'");
}

density::ModelKind parseKind(const std::string& s) {
  if (s == "linlin") return density::ModelKind::ThreeLevel;
  if (s == "sigma") return density::ModelKind::FourLevelTrap;
  throw Error(ErrorCode::InvalidArgument, "--kind must be sigma or linlin, got '" + s + "'");
}

std::string kindName(density::ModelKind k) {
  return k == density::ModelKind::ThreeLevel ? "linlin" : "sigma";
}

std::pair<int, int> parseTransition(const std::string& s) {
  const auto parts = split(s, ',');
  if (parts.size() != 2)
    throw Error(ErrorCode::InvalidArgument, "--transition must be m_g,m_e, got '" + s + "'");
  auto toInt = [&](const std::string& p) {
    const double v = parseDouble(p, "--transition");
    if (v != std::floor(v)) throw Error(ErrorCode::InvalidArgument, "--transition needs integers");
    return static_cast<int>(v);
  };
  return {toInt(parts[0]), toInt(parts[1])};
}

std::vector<double> fieldGrid(const std::optional<double>& b, const std::string& range) {
  if (b && !range.empty())
    throw Error(ErrorCode::InvalidArgument, "give either --b or --b-range, not both");
  if (b) return {*b};
  if (!range.empty()) return parseRange(range, "--b-range");
  throw Error(ErrorCode::InvalidArgument, "a field is required (--b or --b-range)");
}

std::string readText(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

class Context {
 public:
  Context(const Globals& g, std::string generated_by) : g_(g), generated_by_(std::move(generated_by)) {}

  AtomSpec atom() const {
    std::optional<std::filesystem::path> path;
    if (!g_.constants.empty()) path = g_.constants;
    return resolveAtomSpec(g_.atom, path);
  }
  atomic::Validity validity() const {
    return g_.allow_extrapolation ? atomic::Validity::AllowExtrapolation : atomic::Validity::Enforce;
  }
  Header header(std::vector<std::string> notes = {}) const { return {generated_by_, std::move(notes)}; }
  const Globals& globals() const { return g_; }

 private:
  const Globals& g_;
  std::string generated_by_;
};

// levels ---------------------------------------------------------------------

struct LevelsArgs {
  std::optional<double> b;
  std::string b_range;
  std::string manifold = "both";
};

void cmdLevels(const Context& ctx, const LevelsArgs& a, std::ostream& out) {
  const Format fmt = parseFormat(ctx.globals().format, Format::Csv, false);
  const AtomSpec spec = ctx.atom();
  std::vector<atomic::Manifold> manifolds;
  if (a.manifold == "lower" || a.manifold == "both") manifolds.push_back(atomic::Manifold::LowerGround);
  if (a.manifold == "upper" || a.manifold == "both") manifolds.push_back(atomic::Manifold::UpperGround);
  if (manifolds.empty())
    throw Error(ErrorCode::InvalidArgument, "--manifold must be lower, upper or both");

  Table t{{"b_uT", "manifold", "F", "m", "shift_hz", "shift_khz"}, {}};
  for (double b : fieldGrid(a.b, a.b_range)) {
    for (auto mf : manifolds) {
      const int F = atomic::totalF(spec, mf);
      for (int m = -F; m <= F; ++m) {
        const double shift = atomic::sublevelShift(spec, {mf, m}, MagneticField::microtesla(b),
                                                   ctx.validity());
        t.rows.push_back({b, std::string(mf == atomic::Manifold::LowerGround ? "lower" : "upper"),
                          static_cast<long long>(F), static_cast<long long>(m), shift, shift / 1e3});
      }
    }
  }
  writeTable(out, t, fmt, ctx.header({"atom: " + spec.name}));
}

// magic ----------------------------------------------------------------------

void cmdMagic(const Context& ctx, const std::string& transition, std::ostream& out) {
  const Format fmt = parseFormat(ctx.globals().format, Format::Json, false);
  const AtomSpec spec = ctx.atom();
  const auto [mg, me] = parseTransition(transition);
  const auto model = atomic::quadraticModel(spec, mg, me);
  Table t{{"m_g", "m_e", "has_magic_field", "vertex_uT", "vertex_offset_hz", "vertex_offset_khz",
           "curvature_khz_per_uT2", "linear_hz_per_uT"},
          {}};
  Cell vertex, offset_hz, offset_khz;
  if (model.magic_field) {
    vertex = model.magic_field->inMicrotesla();
    offset_hz = *model.vertex_offset;
    offset_khz = *model.vertex_offset / 1e3;
  }
  t.rows.push_back({static_cast<long long>(mg), static_cast<long long>(me),
                    model.magic_field.has_value(), vertex, offset_hz, offset_khz,
                    model.curvatureHzPerMicrotesla2() / 1e3, model.linearHzPerMicrotesla()});
  writeRecord(out, t, fmt, ctx.header({"atom: " + spec.name}));
}

// schemes --------------------------------------------------------------------

void cmdSchemes(const Context& ctx, const std::string& pol_text, int f_prime, std::ostream& out) {
  const Format fmt = parseFormat(ctx.globals().format, Format::Text, true);
  const AtomSpec spec = ctx.atom();
  const auto pol = parsePolarization(pol_text);
  if (fmt == Format::Text) {
    out << lambda::renderSchemeTable(spec, pol, f_prime);
    return;
  }
  const auto schemes = lambda::enumerateSchemes(spec, pol, f_prime);
  std::map<std::pair<int, int>, std::vector<lambda::LambdaScheme>> groups;
  for (const auto& s : schemes) groups[{s.m_g, s.m_e}].push_back(s);

  Table t{{"m_g", "m_e", "m_fprime", "q_g", "q_e", "coupling1", "coupling2", "omega1_re",
           "omega1_im", "omega2_re", "omega2_im", "dark_ratio", "common_dark_state"},
          {}};
  for (const auto& s : schemes) {
    const bool common = lambda::commonDarkState(groups[{s.m_g, s.m_e}]).has_value();
    t.rows.push_back({static_cast<long long>(s.m_g), static_cast<long long>(s.m_e),
                      static_cast<long long>(s.m_Fprime), static_cast<long long>(s.q_g),
                      static_cast<long long>(s.q_e), s.coupling1.str(), s.coupling2.str(),
                      s.omega1_rabi.real(), s.omega1_rabi.imag(), s.omega2_rabi.real(),
                      s.omega2_rabi.imag(), lambda::exactDarkRatio(s, pol).str(), common});
  }
  writeTable(out, t, fmt,
             ctx.header({"atom: " + spec.name, "polarization: " + pol.label(),
                         "fprime: " + std::to_string(f_prime)}));
}

// spectrum -------------------------------------------------------------------

struct SpectrumArgs {
  std::string pol = "lin:0";
  int f_prime = 3;
  std::optional<double> b;
  double hwhm = 240.0;
  std::string window = "-1500000:1500000:500";
  double noise = 0.0;
};

void writeSpectrum(std::ostream& out, const spectra::Spectrum& s, Format fmt, const Header& h) {
  Table t{{"detuning_hz", "signal"}, {}};
  for (std::size_t i = 0; i < s.size(); ++i) t.rows.push_back({s.detuning()[i], s.signal()[i]});
  writeTable(out, t, fmt, h);
}

void cmdSpectrum(const Context& ctx, const SpectrumArgs& a, std::ostream& out) {
  const Format fmt = parseFormat(ctx.globals().format, Format::Csv, false);
  const AtomSpec spec = ctx.atom();
  if (!a.b) throw Error(ErrorCode::InvalidArgument, "spectrum needs --b");
  const auto pol = parsePolarization(a.pol);
  const auto grid = parseRange(a.window, "--window");
  const auto peaks =
      spectra::predictedPeaks(spec, pol, a.f_prime, MagneticField::microtesla(*a.b), a.hwhm);
  const auto s = spectra::synthesizeSpectrum(peaks, grid, 0.0, a.noise, ctx.globals().seed);
  writeSpectrum(out, s, fmt,
                ctx.header({"atom: " + spec.name, "provenance: " + s.meta().str(),
                            "noise: " + std::string(spectra::kNoiseAlgorithm) +
                                " sigma=" + formatNumber(a.noise)}));
}

// lineshape ------------------------------------------------------------------

struct ModelArgs {
  std::string kind = "linlin";
  std::optional<double> kappa;
  std::optional<double> Gamma_mhz;
  std::optional<double> gamma_c_hz;
  std::optional<double> gamma_p_hz;
};

density::LevelModelParams modelParams(const ModelArgs& a) {
  const auto kind = parseKind(a.kind);
  density::LevelModelParams p = density::defaultParams(kind);
  if (a.Gamma_mhz || a.gamma_c_hz || a.gamma_p_hz) {
    p = density::LevelModelParams::make(
        kind, a.Gamma_mhz ? angularFrequency(*a.Gamma_mhz * 1e6) : p.Gamma,
        a.gamma_c_hz ? angularFrequency(*a.gamma_c_hz) : p.gamma_c,
        a.gamma_p_hz ? angularFrequency(*a.gamma_p_hz) : p.gamma_p);
  }
  return p;
}

density::IntensityCalibration modelCalibration(const ModelArgs& a) {
  auto cal = density::defaultCalibration(parseKind(a.kind));
  if (a.kappa) cal.kappa = *a.kappa;
  cal.validate();
  return cal;
}

std::vector<std::string> modelNotes(const density::LevelModelParams& p,
                                    const density::IntensityCalibration& cal) {
  return {"kind: " + kindName(p.kind),
          "Gamma_hz: " + formatNumber(hertz(p.Gamma)),
          "gamma_c_hz: " + formatNumber(hertz(p.gamma_c)),
          "gamma_p_hz: " + formatNumber(hertz(p.gamma_p)),
          "kappa: " + formatNumber(cal.kappa)};
}

void cmdLineshape(const Context& ctx, const ModelArgs& m, double intensity,
                  const std::string& window, const std::string& signal, std::ostream& out) {
  const Format fmt = parseFormat(ctx.globals().format, Format::Csv, false);
  auto p = modelParams(m);
  const auto cal = modelCalibration(m);
  if (!(intensity > 0.0)) throw Error(ErrorCode::InvalidArgument, "--intensity must be > 0");
  p.omega1 = p.omega2 = cal.rabi(intensity);
  density::SignalKind kind;
  if (signal == "absorption")
    kind = density::SignalKind::Absorption;
  else if (signal == "transmission")
    kind = density::SignalKind::Transmission;
  else
    throw Error(ErrorCode::InvalidArgument, "--signal must be absorption or transmission");
  std::vector<double> grid = parseRange(window, "--window");
  for (double& d : grid) d = angularFrequency(d);
  const auto s = density::cptLineshape(p, grid, kind);
  auto notes = modelNotes(p, cal);
  notes.push_back("intensity_uW_mm2: " + formatNumber(intensity));
  notes.push_back("provenance: " + s.meta().str());
  writeSpectrum(out, s, fmt, ctx.header(notes));
}

// scan -----------------------------------------------------------------------

void cmdScan(const Context& ctx, const ModelArgs& m, const std::string& list,
             const std::string& range, std::ostream& out) {
  const Format fmt = parseFormat(ctx.globals().format, Format::Csv, false);
  if (!list.empty() && !range.empty())
    throw Error(ErrorCode::InvalidArgument, "give either --intensities or --i-range, not both");
  std::vector<double> intensities = density::standardIntensityGrid();
  if (!list.empty()) intensities = parseList(list, "--intensities");
  if (!range.empty()) intensities = parseRange(range, "--i-range");
  for (double i : intensities)
    if (!(i > 0.0))
      throw Error(ErrorCode::InvalidArgument,
                  "intensity " + formatNumber(i) + " rejected: intensities must be > 0");

  const auto p = modelParams(m);
  const auto cal = modelCalibration(m);
  const auto rows = density::intensityScan(p.kind, intensities, cal, p);
  const auto normalized = density::normalizeAmplitudes(rows);

  Table t{{"intensity_uW_mm2", "hwhm_hz", "hwhm_khz", "amplitude", "amplitude_norm", "absorption"},
          {}};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    t.rows.push_back({rows[i].intensity, rows[i].hwhm_hz, rows[i].hwhm_hz / 1e3, rows[i].amplitude,
                      normalized[i].amplitude, rows[i].absorption});
  }
  writeTable(out, t, fmt, ctx.header(modelNotes(p, cal)));
}

// fit ------------------------------------------------------------------------

void cmdFit(const Context& ctx, const std::string& input, const std::string& mode,
            std::ostream& out) {
  const Format fmt = parseFormat(ctx.globals().format, Format::Json, false);
  const std::string text = readText(input);
  const std::string origin = input == "-" ? "<stdin>" : input;
  if (mode == "doublet") {
    const auto s = spectra::parseSpectrumCsv(text, origin);
    const auto f = spectra::fitDoublet(s);
    const auto e = f.standardErrors();
    Table t{{"center1", "center2", "hwhm", "amplitude", "baseline", "rms_residual", "converged",
             "iterations", "center1_stderr", "center2_stderr", "hwhm_stderr", "amplitude_stderr",
             "baseline_stderr", "separation_hz"},
            {}};
    t.rows.push_back({f.center1, f.center2, f.hwhm, f.amplitude, f.baseline, f.rms_residual,
                      f.converged, static_cast<long long>(f.iterations), e[0], e[1], e[2], e[3],
                      e[4], f.center2 - f.center1});
    writeRecord(out, t, fmt, ctx.header({"mode: doublet", "provenance: " + s.meta().str()}));
    return;
  }
  if (mode == "quadratic") {
    const auto pts = spectra::parseFieldSeriesCsv(text, origin);
    const auto q = spectra::fitQuadraticVsB(pts);
    std::string rejected;
    for (auto i : q.rejected) rejected += (rejected.empty() ? "" : ";") + std::to_string(i);
    Table t{{"offset_khz", "curvature_khz_per_uT2", "vertex_uT", "offset_stderr_khz",
             "curvature_stderr", "vertex_stderr_uT", "rms_residual_hz", "rejected"},
            {}};
    t.rows.push_back({q.offset_khz, q.curvature_khz_per_uT2, q.vertex_uT, q.offset_stderr_khz,
                      q.curvature_stderr, q.vertex_stderr_uT, q.rms_residual_hz, rejected});
    writeRecord(out, t, fmt, ctx.header({"mode: quadratic", "input: " + origin}));
    return;
  }
  throw Error(ErrorCode::InvalidArgument, "--mode must be doublet or quadratic");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"CPT resonance simulator for alkali D1 Lambda systems", "cpt"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(CPT_VERSION));

  Globals g;
  app.add_option("--atom", g.atom, "species key")->capture_default_str();
  app.add_option("--constants", g.constants, "atom constants JSON (else $CPT_CONSTANTS_PATH)");
  app.add_option("--format", g.format, "csv, json (text for schemes)");
  app.add_option("--seed", g.seed, "noise seed")->capture_default_str();
  app.add_flag("--allow-extrapolation", g.allow_extrapolation,
               "accept fields beyond the second-order validity bound");

  LevelsArgs levels;
  auto* c_levels = app.add_subcommand("levels", "Zeeman shifts of every ground sublevel");
  c_levels->add_option("--b", levels.b, "field in uT");
  c_levels->add_option("--b-range", levels.b_range, "lo:hi:step in uT");
  c_levels->add_option("--manifold", levels.manifold, "lower, upper or both")->capture_default_str();

  std::string transition = "-1,1";
  auto* c_magic = app.add_subcommand("magic", "quadratic model and magic field of a transition");
  c_magic->add_option("--transition", transition, "m_g,m_e")->capture_default_str();

  std::string pol = "lin:0";
  int f_prime = 3;
  auto* c_schemes = app.add_subcommand("schemes", "Lambda schemes and dark-state conditions");
  c_schemes->add_option("--pol", pol, "sigma+, sigma- or lin:<theta_deg>")->capture_default_str();
  c_schemes->add_option("--fprime", f_prime, "excited hyperfine level")->capture_default_str();

  SpectrumArgs sp;
  auto* c_spectrum = app.add_subcommand("spectrum", "predicted multi-peak CPT spectrum");
  c_spectrum->add_option("--pol", sp.pol, "sigma+, sigma- or lin:<theta_deg>")->capture_default_str();
  c_spectrum->add_option("--fprime", sp.f_prime, "excited hyperfine level")->capture_default_str();
  c_spectrum->add_option("--b", sp.b, "field in uT");
  c_spectrum->add_option("--hwhm", sp.hwhm, "peak HWHM in Hz")->capture_default_str();
  c_spectrum->add_option("--window", sp.window, "lo:hi:step detuning in Hz")->capture_default_str();
  c_spectrum->add_option("--noise", sp.noise, "Gaussian noise sigma")->capture_default_str();

  auto addModelOptions = [](CLI::App* c, ModelArgs& m) {
    c->add_option("--kind", m.kind, "linlin (three-level) or sigma (four-level trap)")
        ->capture_default_str();
    c->add_option("--kappa", m.kappa, "Rabi calibration, rad/s per sqrt(uW/mm^2)");
    c->add_option("--Gamma-mhz", m.Gamma_mhz, "excited-state decay in MHz");
    c->add_option("--gamma-c-hz", m.gamma_c_hz, "ground coherence dephasing in Hz");
    c->add_option("--gamma-p-hz", m.gamma_p_hz, "ground population exchange in Hz");
  };

  ModelArgs ls_model;
  double ls_intensity = 1.0;
  std::string ls_window = "-2000:2000:20";
  std::string ls_signal = "absorption";
  auto* c_lineshape = app.add_subcommand("lineshape", "steady-state CPT lineshape");
  addModelOptions(c_lineshape, ls_model);
  c_lineshape->add_option("--intensity", ls_intensity, "uW/mm^2")->capture_default_str();
  c_lineshape->add_option("--window", ls_window, "lo:hi:step Raman detuning in Hz")
      ->capture_default_str();
  c_lineshape->add_option("--signal", ls_signal, "absorption or transmission")
      ->capture_default_str();

  ModelArgs sc_model;
  std::string sc_list, sc_range;
  auto* c_scan = app.add_subcommand("scan", "CPT width, amplitude and absorption versus intensity");
  addModelOptions(c_scan, sc_model);
  c_scan->add_option("--intensities", sc_list, "comma-separated uW/mm^2");
  c_scan->add_option("--i-range", sc_range, "lo:hi:step in uW/mm^2");

  std::string fit_input, fit_mode = "doublet";
  auto* c_fit = app.add_subcommand("fit", "fit a doublet spectrum or a center-versus-B series");
  c_fit->add_option("--input", fit_input, "CSV file or - for stdin")->required();
  c_fit->add_option("--mode", fit_mode, "doublet or quadratic")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error [usage]: " << e.what() << "\n";
    return kExitUsage;
  }

  const Context ctx(g, std::string("cpt ") + CPT_VERSION + ": " + joinArgs(args));
  try {
    if (c_levels->parsed()) cmdLevels(ctx, levels, out);
    else if (c_magic->parsed()) cmdMagic(ctx, transition, out);
    else if (c_schemes->parsed()) cmdSchemes(ctx, pol, f_prime, out);
    else if (c_spectrum->parsed()) cmdSpectrum(ctx, sp, out);
    else if (c_lineshape->parsed())
      cmdLineshape(ctx, ls_model, ls_intensity, ls_window, ls_signal, out);
    else if (c_scan->parsed()) cmdScan(ctx, sc_model, sc_list, sc_range, out);
    else if (c_fit->parsed()) cmdFit(ctx, fit_input, fit_mode, out);
  } catch (const Error& e) {
    err << "error [" << errorCodeName(e.code()) << "]: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    err << "error [internal]: " << e.what() << "\n";
    return kExitError;
  }
  return kExitOk;
}

}  // namespace cpt::cli
