#include "cpt/lambda_schemes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <utility>

#include "cpt/atomic_structure.hpp"
#include "cpt/error.hpp"

namespace cpt::lambda {

namespace {

using angular::SignedSqrt;

double wrapTheta(double theta) {
  double t = std::fmod(theta, std::numbers::pi);
  if (t < 0.0) t += std::numbers::pi;
  return t;
}

void checkFieldIndex(int field_index) {
  if (field_index != 1 && field_index != 2)
    throw Error(ErrorCode::InvalidArgument, "field index must be 1 or 2");
}

void checkFPrime(const AtomSpec& spec, int f_prime) {
  if (f_prime != spec.F_low && f_prime != spec.F_high) {
    throw Error(ErrorCode::InvalidQuantumNumbers,
                "F' must be " + std::to_string(spec.F_low) + " or " + std::to_string(spec.F_high));
  }
}

const CircularComponent* findComponent(const std::vector<CircularComponent>& comps, int q) {
  for (const auto& c : comps)
    if (c.q == q) return &c;
  return nullptr;
}

}  // namespace

PolarizationConfig::PolarizationConfig(PolarizationScheme s, double theta, double e1, double e2)
    : scheme_(s), theta_(wrapTheta(theta)), eps1_(e1), eps2_(e2) {
  if (!(e1 >= 0.0) || !(e2 >= 0.0))
    throw Error(ErrorCode::InvalidArgument, "field amplitudes must be non-negative");
}

PolarizationConfig PolarizationConfig::sigmaPlus(double eps1, double eps2) {
  return {PolarizationScheme::SigmaPlusPair, 0.0, eps1, eps2};
}
PolarizationConfig PolarizationConfig::sigmaMinus(double eps1, double eps2) {
  return {PolarizationScheme::SigmaMinusPair, 0.0, eps1, eps2};
}
PolarizationConfig PolarizationConfig::linear(double theta, double eps1, double eps2) {
  return {PolarizationScheme::LinearPair, theta, eps1, eps2};
}

std::string PolarizationConfig::label() const {
  switch (scheme_) {
    case PolarizationScheme::SigmaPlusPair: return "sigma+";
    case PolarizationScheme::SigmaMinusPair: return "sigma-";
    case PolarizationScheme::LinearPair: {
      std::ostringstream os;
      os << "lin:" << theta_ * 180.0 / std::numbers::pi;
      return os.str();
    }
  }
  return "?";
}

std::vector<CircularComponent> circularDecompose(int field_index, const PolarizationConfig& pol) {
  checkFieldIndex(field_index);
  const double eps = field_index == 1 ? pol.eps1() : pol.eps2();
  switch (pol.scheme()) {
    case PolarizationScheme::SigmaPlusPair: return {{+1, Complex(eps / 2.0)}};
    case PolarizationScheme::SigmaMinusPair: return {{-1, Complex(eps / 2.0)}};
    case PolarizationScheme::LinearPair: break;
  }
  // x-polarized field 1:           (-e+ + e-) eps / (2 sqrt 2)
  // field 2 at theta to x:  (-e^{i theta} e+ + e^{-i theta} e-) eps / (2 sqrt 2)
  const double scale = eps / (2.0 * std::numbers::sqrt2);
  const double phase = field_index == 1 ? 0.0 : pol.theta();
  return {{+1, -std::polar(scale, phase)}, {-1, std::polar(scale, -phase)}};
}

DipoleFactors hyperfineDipoleFactors(const AtomSpec& spec, int f_prime) {
  checkFPrime(spec, f_prime);
  return {angular::reducedDipoleFactor(spec.I2, spec.F_low, f_prime),
          angular::reducedDipoleFactor(spec.I2, spec.F_high, f_prime)};
}

namespace {

// Polarization-free part of every Lambda path through F', for either field component.
std::vector<LambdaScheme> couplingSkeleton(const AtomSpec& spec, int f_prime,
                                           const DipoleFactors& d) {
  std::vector<LambdaScheme> out;
  for (int m_g = -spec.F_low; m_g <= spec.F_low; ++m_g) {
    for (int q_g : {-1, +1}) {
      const int m_prime = m_g + q_g;
      if (std::abs(m_prime) > f_prime) continue;
      for (int q_e : {-1, +1}) {
        const int m_e = m_prime - q_e;
        if (std::abs(m_e) > spec.F_high) continue;
        const SignedSqrt k1 =
            d.lower * angular::clebschGordanExact(f_prime, m_prime, spec.F_low, m_g, q_g);
        const SignedSqrt k2 =
            d.upper * angular::clebschGordanExact(f_prime, m_prime, spec.F_high, m_e, q_e);
        if (k1.isZero() || k2.isZero()) continue;
        LambdaScheme s;
        s.m_g = m_g;
        s.m_e = m_e;
        s.F_prime = f_prime;
        s.m_Fprime = m_prime;
        s.q_g = q_g;
        s.q_e = q_e;
        s.coupling1 = k1;
        s.coupling2 = k2;
        out.push_back(s);
      }
    }
  }
  return out;
}

std::vector<LambdaScheme> defaultSkeleton(const AtomSpec& spec, int f_prime) {
  static std::mutex mutex;
  static std::map<std::array<int, 4>, std::vector<LambdaScheme>> cache;
  const std::array<int, 4> key{spec.I2, spec.F_low, spec.F_high, f_prime};
  std::lock_guard lock(mutex);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, couplingSkeleton(spec, f_prime, hyperfineDipoleFactors(spec, f_prime)))
             .first;
  return it->second;
}

}  // namespace

std::vector<LambdaScheme> enumerateSchemes(const AtomSpec& spec, const PolarizationConfig& pol,
                                           int f_prime,
                                           const std::optional<DipoleFactors>& dipoles) {
  checkFPrime(spec, f_prime);
  const auto field1 = circularDecompose(1, pol);
  const auto field2 = circularDecompose(2, pol);

  std::vector<LambdaScheme> out;
  for (auto& s : dipoles ? couplingSkeleton(spec, f_prime, *dipoles) : defaultSkeleton(spec, f_prime)) {
    const auto* c1 = findComponent(field1, s.q_g);
    const auto* c2 = findComponent(field2, s.q_e);
    if (!c1 || c1->amplitude == Complex(0.0) || !c2 || c2->amplitude == Complex(0.0)) continue;
    // The dipole couples to the conjugate spherical component of the field.
    s.omega1_rabi = std::conj(c1->amplitude) * s.coupling1.value();
    s.omega2_rabi = std::conj(c2->amplitude) * s.coupling2.value();
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(), [](const LambdaScheme& a, const LambdaScheme& b) {
    return std::tie(a.m_g, a.m_e, a.q_g, a.q_e) < std::tie(b.m_g, b.m_e, b.q_g, b.q_e);
  });
  return out;
}

DarkState darkState(Complex omega1, Complex omega2) {
  const double norm = std::hypot(std::abs(omega1), std::abs(omega2));
  if (norm == 0.0)
    throw Error(ErrorCode::InvalidArgument, "dark state undefined when both couplings vanish");
  DarkState s;
  s.a = omega2 / norm;
  s.b = -omega1 / norm;
  if (s.a != Complex(0.0)) s.ratio = s.b / s.a;
  return s;
}

std::optional<DarkState> commonDarkState(const std::vector<LambdaScheme>& schemes, double tol) {
  if (schemes.empty()) throw Error(ErrorCode::InvalidArgument, "empty scheme list");
  const int m_g = schemes.front().m_g;
  const int m_e = schemes.front().m_e;
  const DarkState first = darkState(schemes.front().omega1_rabi, schemes.front().omega2_rabi);
  for (const auto& s : schemes) {
    if (s.m_g != m_g || s.m_e != m_e)
      throw Error(ErrorCode::InvalidArgument, "schemes do not share (m_g, m_e)");
    const DarkState ds = darkState(s.omega1_rabi, s.omega2_rabi);
    if (first.ratio.has_value() != ds.ratio.has_value()) return std::nullopt;
    if (first.ratio && std::abs(*first.ratio - *ds.ratio) > tol) return std::nullopt;
  }
  return first;
}

std::vector<Resonance> observableResonances(const AtomSpec& spec, const PolarizationConfig& pol,
                                            int f_prime, MagneticField b) {
  std::map<std::pair<int, int>, std::vector<LambdaScheme>> groups;
  for (auto& s : enumerateSchemes(spec, pol, f_prime)) groups[{s.m_g, s.m_e}].push_back(s);

  std::vector<Resonance> out;
  for (const auto& [key, members] : groups) {
    if (!commonDarkState(members)) continue;
    Resonance r;
    r.m_g = key.first;
    r.m_e = key.second;
    r.frequency = atomic::transitionFrequency(spec, r.m_g, r.m_e, b);
    r.scheme_count = static_cast<int>(members.size());
    for (const auto& s : members) r.weight += std::norm(s.omega1_rabi) + std::norm(s.omega2_rabi);
    r.off_resonant_collapse = f_prime == spec.F_low && std::abs(r.m_e - r.m_g) == 2;
    out.push_back(r);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Resonance& a, const Resonance& b) { return a.frequency < b.frequency; });
  return out;
}

std::vector<double> distinctPositions(const std::vector<Resonance>& resonances,
                                      double resolution_hz) {
  std::vector<double> f;
  f.reserve(resonances.size());
  for (const auto& r : resonances) f.push_back(r.frequency);
  std::sort(f.begin(), f.end());
  std::vector<double> out;
  std::size_t i = 0;
  while (i < f.size()) {
    std::size_t j = i + 1;
    double sum = f[i];
    while (j < f.size() && f[j] - f[j - 1] <= resolution_hz) sum += f[j++];
    out.push_back(sum / static_cast<double>(j - i));
    i = j;
  }
  return out;
}

ExactRatio exactDarkRatio(const LambdaScheme& scheme, const PolarizationConfig& pol) {
  // b/a = -Omega1/Omega2 at eps1 = eps2. For linear light the components carry
  // (-q) and, on field 2, exp(-i q theta) after conjugation.
  ExactRatio r;
  if (pol.scheme() == PolarizationScheme::LinearPair) {
    const int sign = -scheme.q_g * scheme.q_e;
    r.factor = (sign < 0 ? -scheme.coupling1 : scheme.coupling1) / scheme.coupling2;
    r.phase_sign = scheme.q_e;
  } else {
    r.factor = -scheme.coupling1 / scheme.coupling2;
    r.phase_sign = 0;
  }
  return r;
}

std::string ExactRatio::str() const {
  if (factor.isZero()) return "0";
  std::string s = factor.sign < 0 ? "-" : "";
  if (phase_sign > 0) s += "e^{i theta}";
  if (phase_sign < 0) s += "e^{-i theta}";
  if (factor.square != 1) {
    if (phase_sign != 0) s += " ";
    s += "sqrt(" + factor.square.str() + ")";
  } else if (phase_sign == 0) {
    s += "1";
  }
  return s;
}

namespace {

std::string familyName(int dm) {
  if (dm == 0) return "(m, m)";
  if (dm == 2) return "(m-1, m+1)";
  return "(m+1, m-1)";
}

std::string polName(int q) { return q > 0 ? "sigma+" : "sigma-"; }

}  // namespace

std::string renderSchemeTable(const AtomSpec& spec, const PolarizationConfig& pol, int f_prime) {
  const auto schemes = enumerateSchemes(spec, pol, f_prime);
  std::ostringstream os;
  os << "polarization " << pol.label() << ", F' = " << f_prime << "\n";
  os << "CPT (m_g, m_e)  pol (w1, w2)      m_F'   m range      b/a at m=0, eps1=eps2\n";

  struct Row {
    int dm, q_g, q_e;
    std::vector<int> ms;
    std::string ratio = "-";
  };
  std::vector<Row> rows;
  for (const auto& s : schemes) {
    const int dm = s.m_e - s.m_g;
    const int m = (s.m_g + s.m_e) / 2;  // family index
    auto it = std::find_if(rows.begin(), rows.end(), [&](const Row& r) {
      return r.dm == dm && r.q_g == s.q_g && r.q_e == s.q_e;
    });
    if (it == rows.end()) {
      rows.push_back({dm, s.q_g, s.q_e, {}});
      it = std::prev(rows.end());
    }
    it->ms.push_back(m);
    if (m == 0) it->ratio = exactDarkRatio(s, pol).str();
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    auto rank = [](int dm) { return dm == 0 ? 0 : (dm == 2 ? 1 : 2); };
    return std::make_tuple(rank(a.dm), -a.q_g) < std::make_tuple(rank(b.dm), -b.q_g);
  });
  for (const auto& r : rows) {
    std::ostringstream mrange;
    mrange << r.ms.front() << ".." << r.ms.back();
    std::string mprime = r.dm == 0 ? (r.q_g > 0 ? "m+1" : "m-1") : "m";
    os << std::left;
    os.width(16);
    os << familyName(r.dm);
    os.width(18);
    os << ("(" + polName(r.q_g) + ", " + polName(r.q_e) + ")");
    os.width(7);
    os << mprime;
    os.width(13);
    os << mrange.str();
    os << r.ratio << "\n";
  }

  std::map<std::pair<int, int>, std::vector<LambdaScheme>> groups;
  for (const auto& s : schemes) groups[{s.m_g, s.m_e}].push_back(s);
  os << "groups:\n";
  for (const auto& [key, members] : groups) {
    os << "  (" << key.first << ", " << key.second << ") " << members.size() << " scheme"
       << (members.size() == 1 ? "" : "s") << ": "
       << (commonDarkState(members) ? "common dark state" : "no common dark state") << "\n";
  }
  return os.str();
}

}  // namespace cpt::lambda
