#pragma once

#include <cmath>
#include <numbers>

namespace cpt {

/// Magnetic field strength. Stored in tesla; the public API speaks microtesla.
class MagneticField {
 public:
  constexpr MagneticField() = default;
  static constexpr MagneticField tesla(double t) { return MagneticField(t); }
  static constexpr MagneticField microtesla(double ut) { return MagneticField(ut * 1e-6); }

  constexpr double inTesla() const { return tesla_; }
  constexpr double inMicrotesla() const { return tesla_ * 1e6; }

  friend constexpr bool operator==(MagneticField, MagneticField) = default;

 private:
  constexpr explicit MagneticField(double t) : tesla_(t) {}
  double tesla_ = 0.0;
};

namespace literals {
constexpr MagneticField operator""_uT(long double v) {
  return MagneticField::microtesla(static_cast<double>(v));
}
constexpr MagneticField operator""_uT(unsigned long long v) {
  return MagneticField::microtesla(static_cast<double>(v));
}
}  // namespace literals

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Frequency in Hz to angular frequency in rad/s.
constexpr double angularFrequency(double hz) { return kTwoPi * hz; }
constexpr double hertz(double rad_per_s) { return rad_per_s / kTwoPi; }

}  // namespace cpt
