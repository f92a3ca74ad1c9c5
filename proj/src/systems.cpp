// systems.cpp: benchmark system models and the RWA pulse drive

#include "heom/systems.hpp"

#include <cmath>
#include <numbers>

#include "heom/errors.hpp"

namespace heom {

SystemModel build_spin_boson(const SpinBosonModel& params) {
    if (!std::isfinite(params.epsilon) || !std::isfinite(params.v))
        throw ArgumentError("spin-boson parameters must be finite");
    if (params.epsilon == 0.0 && params.v == 0.0)
        throw ArgumentError("spin-boson Hamiltonian vanishes (epsilon = V = 0)");

    SystemModel m;
    m.kind = "spin_boson";
    m.hamiltonian = Matrix::Zero(2, 2);
    m.hamiltonian(0, 0) = params.epsilon;
    m.hamiltonian(1, 1) = -params.epsilon;
    m.hamiltonian(0, 1) = params.v;
    m.hamiltonian(1, 0) = params.v;

    Matrix sz = Matrix::Zero(2, 2);
    sz(0, 0) = 1.0;
    sz(1, 1) = -1.0;
    m.couplings.push_back(sz);
    m.omega_s = 2.0 * std::hypot(params.epsilon, params.v);
    return m;
}

SystemModel build_dimer(const DimerModel& p) {
    if (!std::isfinite(p.eps1) || !std::isfinite(p.eps2) || !std::isfinite(p.v) || !std::isfinite(p.u) ||
        !std::isfinite(p.mu_ratio))
        throw ArgumentError("dimer parameters must be finite");

    SystemModel m;
    m.kind = "dimer";
    m.hamiltonian = Matrix::Zero(4, 4);
    m.hamiltonian(kSite1, kSite1) = p.eps1;
    m.hamiltonian(kSite2, kSite2) = p.eps2;
    m.hamiltonian(kDouble, kDouble) = p.eps1 + p.eps2 + p.u;
    m.hamiltonian(kSite1, kSite2) = p.v;
    m.hamiltonian(kSite2, kSite1) = p.v;

    for (int site : {kSite1, kSite2}) {
        Matrix q = Matrix::Zero(4, 4);
        q(site, site) = 1.0;
        q(kDouble, kDouble) = 1.0;
        m.couplings.push_back(q);
    }

    Matrix raise = Matrix::Zero(4, 4);
    raise(kSite1, kGround) = 1.0;
    raise(kDouble, kSite2) = 1.0;
    raise(kSite2, kGround) = p.mu_ratio;
    raise(kDouble, kSite1) = p.mu_ratio;
    m.dipole_raising = raise;
    m.dipole = Matrix(raise + raise.adjoint());

    Matrix n = Matrix::Zero(4, 4);
    n(kSite1, kSite1) = 1.0;
    n(kSite2, kSite2) = 1.0;
    n(kDouble, kDouble) = 2.0;
    m.excitation_number = n;

    m.omega_s = std::sqrt((p.eps1 - p.eps2) * (p.eps1 - p.eps2) + 4.0 * p.v * p.v);
    return m;
}

double characteristic_frequency(const SystemModel& model) { return model.omega_s; }

std::string_view to_string(FwhmConvention c) noexcept {
    return c == FwhmConvention::Amplitude ? "amplitude" : "intensity";
}

FwhmConvention parse_fwhm_convention(std::string_view text) {
    if (text == "amplitude") return FwhmConvention::Amplitude;
    if (text == "intensity") return FwhmConvention::Intensity;
    throw ArgumentError("fwhm_convention must be 'amplitude' or 'intensity', got '" + std::string(text) + "'");
}

double GaussianPulse::envelope(double t) const {
    if (!(fwhm > 0)) throw ArgumentError("pulse FWHM must be > 0");
    // amplitude: E ~ exp(-4 ln2 s^2 / fwhm^2); intensity: |E|^2 has that FWHM, so E ~ exp(-2 ln2 s^2 / fwhm^2)
    const double a = (convention == FwhmConvention::Amplitude ? 4.0 : 2.0) * std::numbers::ln2 / (fwhm * fwhm);
    const double s = t - t0;
    return peak_rabi * std::exp(-a * s * s);
}

HamiltonianProvider drive_rwa(const SystemModel& model, const GaussianPulse& pulse, DriveFrame frame) {
    if (!model.dipole_raising || !model.excitation_number)
        throw ArgumentError("drive_rwa: model '" + model.kind + "' has no transition dipole");
    if (!(pulse.fwhm > 0)) throw ArgumentError("pulse FWHM must be > 0");

    const Matrix h0 = model.hamiltonian;
    const Matrix raise = *model.dipole_raising;
    const Matrix lower = raise.adjoint();
    if (frame == DriveFrame::Rotating) {
        const Matrix h_rot = h0 - pulse.center_freq * (*model.excitation_number);
        const Matrix mu = raise + lower;
        return [h_rot, mu, pulse](double t) -> Matrix { return h_rot - (0.5 * pulse.envelope(t)) * mu; };
    }
    return [h0, raise, lower, pulse](double t) -> Matrix {
        const Complex phase = std::polar(1.0, -pulse.center_freq * t);
        return h0 - (0.5 * pulse.envelope(t)) * (phase * raise + std::conj(phase) * lower);
    };
}

}  // namespace heom
