// units.hpp: spectroscopic unit conversions (energies in cm^-1, hbar = 1)

#pragma once

namespace heom::units {

// hbar / (h c * 1 cm^-1) = 1 / (2 pi c * 1 cm^-1), in femtoseconds
inline constexpr double kFemtosecondsPerInverseWavenumber = 5308.837458;

// Boltzmann constant in cm^-1 / K
inline constexpr double kBoltzmannWavenumberPerKelvin = 0.6950348;

constexpr double femtoseconds_to_time(double fs) noexcept { return fs / kFemtosecondsPerInverseWavenumber; }
constexpr double time_to_femtoseconds(double t) noexcept { return t * kFemtosecondsPerInverseWavenumber; }

constexpr double beta_from_kelvin(double kelvin) noexcept {
    return 1.0 / (kBoltzmannWavenumberPerKelvin * kelvin);
}

}  // namespace heom::units
