#pragma once

#include <array>
#include <cmath>
#include <string>

#include "biota/errors.hpp"
#include "biota/units.hpp"

namespace biota::psychro {

inline constexpr double kStandardPressure = 101325.0;
inline constexpr double kMinTemperatureF = 32.0;
inline constexpr double kMaxTemperatureF = 140.0;
inline constexpr double kMolarMassRatio = 0.621945;
inline constexpr double kDryAirGasConstant = 287.042;
inline constexpr double kVapourVolumeFactor = 1.607858;
/// Humidity ratio is undefined as Pw approaches P; refuse anything this close.
inline constexpr double kMaxVapourFraction = 0.99;

/// Constants of ln(pws) = c0/T + c1 + c2 T + c3 T^2 + c4 T^3 + c5 ln T, T in kelvin, pws in Pa.
template <typename Scalar = double>
struct PsychroCoefficients {
  std::array<Scalar, 6> cf;

  /// Full-precision values for saturation over liquid water.
  static constexpr PsychroCoefficients ashrae() {
    return {{Scalar(-5800.2206), Scalar(1.3914993), Scalar(-0.048640239), Scalar(4.1764768e-5),
             Scalar(-1.4452093e-8), Scalar(6.5459673)}};
  }

  /// The six values rounded to the precision printed in the source publication.
  /// Kept for reconciliation work; they undershoot pws by roughly 13% near 12 C.
  static constexpr PsychroCoefficients rounded() {
    return {{Scalar(-5800.22), Scalar(1.39), Scalar(-0.049), Scalar(4.17e-5), Scalar(-1.44e-8),
             Scalar(6.54)}};
  }
};

template <typename Scalar = double>
struct AirState {
  Scalar temperature_f;
  Scalar relative_humidity;
  Scalar pressure = Scalar(kStandardPressure);

  void validate() const;
};

template <typename Scalar>
inline void check_temperature(Scalar t_f) {
  if (!(t_f >= Scalar(kMinTemperatureF) && t_f <= Scalar(kMaxTemperatureF)))
    throw RangeError("temperature " + std::to_string(static_cast<double>(t_f)) +
                     " F outside supported range [32, 140]");
}

template <typename Scalar>
void AirState<Scalar>::validate() const {
  check_temperature(temperature_f);
  if (!(relative_humidity >= Scalar(0) && relative_humidity <= Scalar(1)))
    throw RangeError("relative humidity " + std::to_string(static_cast<double>(relative_humidity)) +
                     " outside [0, 1]");
  if (!(pressure > Scalar(0))) throw RangeError("pressure must be positive");
}

template <typename Scalar>
Scalar saturation_pressure(Scalar t_f,
                           const PsychroCoefficients<Scalar>& c = PsychroCoefficients<Scalar>::ashrae()) {
  check_temperature(t_f);
  const Scalar t = units::kelvin_from_fahrenheit(t_f);
  using std::exp;
  using std::log;
  const Scalar ln_p =
      c.cf[0] / t + c.cf[1] + t * (c.cf[2] + t * (c.cf[3] + t * c.cf[4])) + c.cf[5] * log(t);
  return exp(ln_p);
}

template <typename Scalar>
Scalar partial_pressure_water(const AirState<Scalar>& s,
                              const PsychroCoefficients<Scalar>& c = PsychroCoefficients<Scalar>::ashrae()) {
  s.validate();
  return saturation_pressure(s.temperature_f, c) * s.relative_humidity;
}

template <typename Scalar>
Scalar humidity_ratio(Scalar pw, Scalar p = Scalar(kStandardPressure)) {
  if (!(p > Scalar(0))) throw DomainError("pressure must be positive");
  if (!(pw >= Scalar(0))) throw DomainError("negative vapour pressure");
  if (pw >= Scalar(kMaxVapourFraction) * p)
    throw DomainError("vapour pressure too close to total pressure");
  return Scalar(kMolarMassRatio) * pw / (p - pw);
}

template <typename Scalar>
Scalar humidity_ratio(const AirState<Scalar>& s,
                      const PsychroCoefficients<Scalar>& c = PsychroCoefficients<Scalar>::ashrae()) {
  return humidity_ratio(partial_pressure_water(s, c), s.pressure);
}

template <typename Scalar>
Scalar saturation_humidity_ratio(Scalar t_f, Scalar p = Scalar(kStandardPressure),
                                 const PsychroCoefficients<Scalar>& c = PsychroCoefficients<Scalar>::ashrae()) {
  return humidity_ratio(saturation_pressure(t_f, c), p);
}

/// Inverse of humidity_ratio followed by division by pws; may exceed 1 for supersaturated input.
template <typename Scalar>
Scalar relative_humidity(Scalar t_f, Scalar w, Scalar p = Scalar(kStandardPressure),
                         const PsychroCoefficients<Scalar>& c = PsychroCoefficients<Scalar>::ashrae()) {
  if (!(w >= Scalar(0))) throw DomainError("negative humidity ratio");
  const Scalar pw = w * p / (Scalar(kMolarMassRatio) + w);
  return pw / saturation_pressure(t_f, c);
}

/// kJ per kg dry air.
template <typename Scalar>
Scalar moist_air_enthalpy(Scalar t_f, Scalar w) {
  check_temperature(t_f);
  if (!(w >= Scalar(0))) throw DomainError("negative humidity ratio");
  const Scalar t_c = units::celsius_from_fahrenheit(t_f);
  return Scalar(1.006) * t_c + w * (Scalar(2501) + Scalar(1.86) * t_c);
}

/// m^3 per kg dry air.
template <typename Scalar>
Scalar specific_volume(Scalar t_f, Scalar w, Scalar p = Scalar(kStandardPressure)) {
  check_temperature(t_f);
  if (!(w >= Scalar(0))) throw DomainError("negative humidity ratio");
  if (!(p > Scalar(0))) throw DomainError("pressure must be positive");
  return Scalar(kDryAirGasConstant) * units::kelvin_from_fahrenheit(t_f) *
         (Scalar(1) + Scalar(kVapourVolumeFactor) * w) / p;
}

/// kJ/(kg K) of moist air per kg dry air.
template <typename Scalar>
constexpr Scalar moist_heat_capacity(Scalar w) {
  return Scalar(1.006) + Scalar(1.86) * w;
}

}  // namespace biota::psychro
