#pragma once

#include <optional>

#include "cpt/atom_spec.hpp"
#include "cpt/units.hpp"

// Zeeman structure of the two ground hyperfine manifolds in the weak-field
// regime. Production values come from the second-order Breit-Rabi expansion;
// the exact closed form is kept for validation only.
namespace cpt::atomic {

enum class Manifold { LowerGround, UpperGround };

struct SublevelRef {
  Manifold manifold;
  int m;
};

/// Largest |B| for which the second-order expansion is accepted without an override.
inline constexpr MagneticField kValidityBound = MagneticField::microtesla(500.0);

enum class Validity { Enforce, AllowExtrapolation };

int totalF(const AtomSpec& spec, Manifold manifold);

/// f_m(B) - f_m(0) in Hz.
double sublevelShift(const AtomSpec& spec, SublevelRef s, MagneticField b,
                     Validity validity = Validity::Enforce);

/// Delta f_{m_g,m_e}(B) = f_hfs + shift(upper, m_e) - shift(lower, m_g), in Hz.
double transitionFrequency(const AtomSpec& spec, int m_g, int m_e, MagneticField b,
                           Validity validity = Validity::Enforce);

/// Closed-form (0,0) clock frequency, f_hfs + (g_J - g_I)^2 mu_B^2 B^2 / (2 f_hfs).
double clockShift00(const AtomSpec& spec, MagneticField b, Validity validity = Validity::Enforce);

// Delta f(B) - f_hfs = linear * B + quadratic * B^2 (B in tesla).
struct TransitionModel {
  int m_g = 0;
  int m_e = 0;
  double linear_coeff = 0.0;     // Hz/T
  double quadratic_coeff = 0.0;  // Hz/T^2
  double offset_at_zero = 0.0;   // Hz, relative to f_hfs
  std::optional<MagneticField> magic_field;
  std::optional<double> vertex_offset;  // Hz relative to f_hfs at the magic field

  double evaluate(MagneticField b) const;
  double curvatureHzPerMicrotesla2() const { return quadratic_coeff * 1e-12; }
  double linearHzPerMicrotesla() const { return linear_coeff * 1e-6; }
};

TransitionModel quadraticModel(const AtomSpec& spec, int m_g, int m_e);

/// d(Delta f)/dB in Hz per microtesla.
double sensitivity(const AtomSpec& spec, int m_g, int m_e, MagneticField b,
                   Validity validity = Validity::Enforce);

/// Exact Breit-Rabi shift for J = 1/2; valid up to 1 mT. Not used by the production path.
double exactBreitRabiShift(const AtomSpec& spec, SublevelRef s, MagneticField b);

}  // namespace cpt::atomic
