#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "cpt/angular_momentum.hpp"
#include "cpt/atom_spec.hpp"
#include "cpt/units.hpp"

namespace cpt::lambda {

using Complex = std::complex<double>;

enum class PolarizationScheme { SigmaPlusPair, SigmaMinusPair, LinearPair };

/// Bichromatic field: field 1 drives the lower ground manifold, field 2 the upper one.
/// For LinearPair field 1 is along x and field 2 at angle theta to it.
class PolarizationConfig {
 public:
  static PolarizationConfig sigmaPlus(double eps1 = 1.0, double eps2 = 1.0);
  static PolarizationConfig sigmaMinus(double eps1 = 1.0, double eps2 = 1.0);
  /// theta is wrapped into [0, pi).
  static PolarizationConfig linear(double theta, double eps1 = 1.0, double eps2 = 1.0);

  PolarizationScheme scheme() const { return scheme_; }
  double theta() const { return theta_; }
  double eps1() const { return eps1_; }
  double eps2() const { return eps2_; }
  std::string label() const;

 private:
  PolarizationConfig(PolarizationScheme s, double theta, double e1, double e2);
  PolarizationScheme scheme_;
  double theta_;
  double eps1_;
  double eps2_;
};

struct CircularComponent {
  int q;  // +1 sigma+, -1 sigma-
  Complex amplitude;
};

/// Spherical components of field `field_index` (1 or 2).
std::vector<CircularComponent> circularDecompose(int field_index, const PolarizationConfig& pol);

// Reduced dipole factors d_{F_low,F'} and d_{F_high,F'} (relative units).
struct DipoleFactors {
  angular::SignedSqrt lower;
  angular::SignedSqrt upper;
};

/// Hyperfine factors from the Wigner-Eckart reduction for the given excited F'.
DipoleFactors hyperfineDipoleFactors(const AtomSpec& spec, int f_prime);

struct LambdaScheme {
  int m_g = 0;
  int m_e = 0;
  int F_prime = 0;
  int m_Fprime = 0;
  int q_g = 0;
  int q_e = 0;
  // Polarization-free part of each coupling, d * <F' m'|F 1; m q>.
  angular::SignedSqrt coupling1;
  angular::SignedSqrt coupling2;
  Complex omega1_rabi;
  Complex omega2_rabi;
};

/// All Lambda schemes through F' with nonvanishing couplings, ordered by
/// (m_g, m_e, q_g, q_e). Uses hyperfineDipoleFactors unless `dipoles` is given.
std::vector<LambdaScheme> enumerateSchemes(const AtomSpec& spec, const PolarizationConfig& pol,
                                           int f_prime,
                                           const std::optional<DipoleFactors>& dipoles = {});

struct DarkState {
  Complex a;  // on |g, m_g>
  Complex b;  // on |e, m_e>
  std::optional<Complex> ratio;  // b / a, absent when a == 0
};

/// Normalized state annihilated by the coupling (omega1, omega2).
DarkState darkState(Complex omega1, Complex omega2);

/// Common dark state of schemes sharing (m_g, m_e), or nullopt when the b/a ratios disagree.
std::optional<DarkState> commonDarkState(const std::vector<LambdaScheme>& schemes,
                                         double tol = 1e-9);

struct Resonance {
  int m_g = 0;
  int m_e = 0;
  double frequency = 0.0;  // Hz, absolute
  int scheme_count = 0;
  double weight = 0.0;     // heuristic: sum of |Omega1|^2 + |Omega2|^2
  // F' = F_low with |m_e - m_g| = 2: dark state exposed to the other excited level.
  bool off_resonant_collapse = false;
};

std::vector<Resonance> observableResonances(const AtomSpec& spec, const PolarizationConfig& pol,
                                            int f_prime, MagneticField b);

/// Clusters resonance frequencies closer than `resolution_hz` into single positions (sorted).
std::vector<double> distinctPositions(const std::vector<Resonance>& resonances,
                                      double resolution_hz);

/// Exact form of b/a at eps1 = eps2: real factor times exp(i * phase_sign * theta).
struct ExactRatio {
  angular::SignedSqrt factor;
  int phase_sign = 0;
  std::string str() const;  // "-e^{-i theta} sqrt(3/5)"
};
ExactRatio exactDarkRatio(const LambdaScheme& scheme, const PolarizationConfig& pol);

/// Text listing of the schemes and their dark-state conditions, grouped by (m_g, m_e) family.
std::string renderSchemeTable(const AtomSpec& spec, const PolarizationConfig& pol, int f_prime);

}  // namespace cpt::lambda
