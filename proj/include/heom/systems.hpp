// systems.hpp: spin-boson and driven Frenkel exciton dimer models

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "heom/hierarchy.hpp"
#include "heom/propagator.hpp"

namespace heom {

struct SystemModel {
    std::string kind;
    Matrix hamiltonian;
    std::vector<Matrix> couplings;  // one dissipative operator per bath
    double omega_s{0.0};            // characteristic frequency

    // Only present for optically driven models.
    std::optional<Matrix> dipole;            // mu = mu_plus + mu_plus^dag
    std::optional<Matrix> dipole_raising;    // mu_plus, raises the exciton number by one
    std::optional<Matrix> excitation_number; // diagonal exciton-number operator
};

struct SpinBosonModel {
    double epsilon{0.0};  // bias
    double v{1.0};        // tunnelling
};

// H = eps sigma_z + V sigma_x, Q = sigma_z, Omega_s = 2 sqrt(eps^2 + V^2).
SystemModel build_spin_boson(const SpinBosonModel& params);

// Basis order of the dimer model.
enum DimerState : int { kGround = 0, kSite1 = 1, kSite2 = 2, kDouble = 3 };

struct DimerModel {
    double eps1{0.0};
    double eps2{0.0};
    double v{0.0};         // exciton transfer coupling
    double u{0.0};         // exciton-exciton interaction in |f>
    double mu_ratio{1.0};  // mu_2z / mu_1z, mu_1z normalised to 1
};

// H = diag(0, e1, e2, e1+e2+U) + V(|1><2| + |2><1|), Q_j = |j><j| + |f><f|,
// Omega_s = sqrt((e1-e2)^2 + 4V^2).
SystemModel build_dimer(const DimerModel& params);

double characteristic_frequency(const SystemModel& model);

enum class FwhmConvention { Amplitude, Intensity };

std::string_view to_string(FwhmConvention c) noexcept;
FwhmConvention parse_fwhm_convention(std::string_view text);

struct GaussianPulse {
    double center_freq{0.0};  // omega_c
    double fwhm{1.0};         // duration, internal time units
    double peak_rabi{0.0};    // mu_1z E_max
    double t0{0.0};           // pulse centre
    FwhmConvention convention{FwhmConvention::Amplitude};

    // mu_1z E(t); the FWHM applies to E(t) or to |E(t)|^2 per convention.
    double envelope(double t) const;
};

enum class DriveFrame { Lab, Rotating };

// Rotating-wave drive H(t) = H - (1/2) E(t) (mu_+ e^{-i w t} + mu_- e^{i w t}).
// In the rotating frame (at w) this becomes H - w N - (1/2) E(t) (mu_+ + mu_-);
// populations agree between the two frames.
HamiltonianProvider drive_rwa(const SystemModel& model, const GaussianPulse& pulse,
                              DriveFrame frame = DriveFrame::Rotating);

}  // namespace heom
