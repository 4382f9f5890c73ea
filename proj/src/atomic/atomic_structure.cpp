#include "cpt/atomic_structure.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "cpt/error.hpp"

namespace cpt::atomic {

namespace {

void checkField(MagneticField b, Validity validity) {
  if (validity == Validity::Enforce && std::abs(b.inTesla()) > kValidityBound.inTesla()) {
    throw Error(ErrorCode::FieldOutOfRange,
                "|B| = " + std::to_string(std::abs(b.inMicrotesla())) +
                    " uT is outside the 500 uT validity range of the second-order expansion");
  }
}

void checkSublevel(const AtomSpec& spec, SublevelRef s) {
  const int f = totalF(spec, s.manifold);
  if (std::abs(s.m) > f) {
    throw Error(ErrorCode::InvalidSublevel,
                "m = " + std::to_string(s.m) + " outside F = " + std::to_string(f));
  }
}

// Linear Zeeman coefficient (per mu_B) of a sublevel with unit m.
//   upper (F = I + 1/2):  (g_J + 2I g_I) / (2I + 1)
//   lower (F = I - 1/2): -(g_J - (2I + 2) g_I) / (2I + 1)
// For I = 7/2 these are (g_J + 7 g_I)/8 and -(g_J - 9 g_I)/8.
double linearFactor(const AtomSpec& spec, Manifold manifold) {
  const double n = spec.I2 + 1;
  if (manifold == Manifold::UpperGround) return (spec.g_J + spec.I2 * spec.g_I) / n;
  return -(spec.g_J - (spec.I2 + 2) * spec.g_I) / n;
}

// (g_J - g_I)^2 mu_B^2 / (4 f_hfs), Hz/T^2.
double quadraticScale(const AtomSpec& spec) {
  const double dg = spec.g_J - spec.g_I;
  return dg * dg * spec.mu_B * spec.mu_B / (4.0 * spec.f_hfs);
}

// 1 - 4 m^2 / (2I + 1)^2, which is 1 - m^2/16 for I = 7/2.
double quadraticFactor(const AtomSpec& spec, int m) {
  const double n = spec.I2 + 1;
  return 1.0 - 4.0 * m * m / (n * n);
}

double sign(Manifold manifold) { return manifold == Manifold::UpperGround ? 1.0 : -1.0; }

}  // namespace

int totalF(const AtomSpec& spec, Manifold manifold) {
  return manifold == Manifold::UpperGround ? spec.F_high : spec.F_low;
}

double sublevelShift(const AtomSpec& spec, SublevelRef s, MagneticField b, Validity validity) {
  checkField(b, validity);
  checkSublevel(spec, s);
  const double t = b.inTesla();
  return linearFactor(spec, s.manifold) * spec.mu_B * s.m * t +
         sign(s.manifold) * quadraticScale(spec) * quadraticFactor(spec, s.m) * t * t;
}

double transitionFrequency(const AtomSpec& spec, int m_g, int m_e, MagneticField b,
                           Validity validity) {
  return spec.f_hfs + sublevelShift(spec, {Manifold::UpperGround, m_e}, b, validity) -
         sublevelShift(spec, {Manifold::LowerGround, m_g}, b, validity);
}

double clockShift00(const AtomSpec& spec, MagneticField b, Validity validity) {
  checkField(b, validity);
  const double t = b.inTesla();
  const double dg = spec.g_J - spec.g_I;
  return spec.f_hfs + dg * dg * spec.mu_B * spec.mu_B * t * t / (2.0 * spec.f_hfs);
}

double TransitionModel::evaluate(MagneticField b) const {
  const double t = b.inTesla();
  return offset_at_zero + linear_coeff * t + quadratic_coeff * t * t;
}

TransitionModel quadraticModel(const AtomSpec& spec, int m_g, int m_e) {
  checkSublevel(spec, {Manifold::LowerGround, m_g});
  checkSublevel(spec, {Manifold::UpperGround, m_e});
  TransitionModel model;
  model.m_g = m_g;
  model.m_e = m_e;
  model.linear_coeff = spec.mu_B * (linearFactor(spec, Manifold::UpperGround) * m_e -
                                    linearFactor(spec, Manifold::LowerGround) * m_g);
  model.quadratic_coeff =
      quadraticScale(spec) * (quadraticFactor(spec, m_e) + quadraticFactor(spec, m_g));
  // A minimum on B >= 0 exists only when the linear term does not push the vertex negative.
  if (model.linear_coeff <= 0.0) {
    const double vertex = -model.linear_coeff / (2.0 * model.quadratic_coeff);
    model.magic_field = MagneticField::tesla(vertex);
    model.vertex_offset =
        -model.linear_coeff * model.linear_coeff / (4.0 * model.quadratic_coeff);
  }
  return model;
}

double sensitivity(const AtomSpec& spec, int m_g, int m_e, MagneticField b, Validity validity) {
  checkField(b, validity);
  const auto model = quadraticModel(spec, m_g, m_e);
  return (model.linear_coeff + 2.0 * model.quadratic_coeff * b.inTesla()) * 1e-6;
}

double exactBreitRabiShift(const AtomSpec& spec, SublevelRef s, MagneticField b) {
  checkSublevel(spec, s);
  if (std::abs(b.inTesla()) > 1e-3) {
    throw Error(ErrorCode::FieldOutOfRange, "exact Breit-Rabi oracle accepts |B| <= 1 mT");
  }
  const double n = spec.I2 + 1;
  const double x = (spec.g_J - spec.g_I) * spec.mu_B * b.inTesla() / spec.f_hfs;
  const double y = 4.0 * s.m * x / n + x * x;
  // sqrt(1 + y) - 1 without cancellation
  const double root_minus_one = y / (std::sqrt(1.0 + y) + 1.0);
  return spec.g_I * spec.mu_B * s.m * b.inTesla() +
         sign(s.manifold) * 0.5 * spec.f_hfs * root_minus_one;
}

}  // namespace cpt::atomic
