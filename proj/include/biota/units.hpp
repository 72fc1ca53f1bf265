#pragma once

namespace biota::units {

inline constexpr double kCfmToCubicMetresPerSecond = 4.719474e-4;
inline constexpr double kCubicFeetToCubicMetres = 0.028316846592;
inline constexpr double kFahrenheitPerKelvin = 1.8;
inline constexpr double kFreezingF = 32.0;
inline constexpr double kZeroCelsiusK = 273.15;
inline constexpr double kPpm = 1e-6;

template <typename Scalar>
constexpr Scalar celsius_from_fahrenheit(Scalar t_f) {
  return (t_f - Scalar(kFreezingF)) / Scalar(kFahrenheitPerKelvin);
}

template <typename Scalar>
constexpr Scalar kelvin_from_fahrenheit(Scalar t_f) {
  return celsius_from_fahrenheit(t_f) + Scalar(kZeroCelsiusK);
}

template <typename Scalar>
constexpr Scalar fahrenheit_from_celsius(Scalar t_c) {
  return t_c * Scalar(kFahrenheitPerKelvin) + Scalar(kFreezingF);
}

}  // namespace biota::units
