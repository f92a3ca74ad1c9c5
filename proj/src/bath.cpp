// bath.cpp: Drude bath expansion and residue spectrum

#include "heom/bath.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "heom/errors.hpp"

namespace heom {

namespace {
constexpr double kPoleCollisionTol = 1e-10;
}

DrudeBath::DrudeBath(double lambda, double gamma, double beta) : lambda_(lambda), gamma_(gamma), beta_(beta) {
    if (!(lambda > 0) || !(gamma > 0) || !(beta > 0) || !std::isfinite(lambda) || !std::isfinite(gamma) ||
        !std::isfinite(beta))
        throw ArgumentError("Drude bath requires lambda, gamma, beta > 0 (got " + std::to_string(lambda) + ", " +
                            std::to_string(gamma) + ", " + std::to_string(beta) + ")");
}

double DrudeBath::spectral_density(double omega) const noexcept {
    return 2.0 * lambda_ * gamma_ * omega / (omega * omega + gamma_ * gamma_);
}

std::complex<double> DrudeBath::spectral_density(std::complex<double> z) const noexcept {
    return 2.0 * lambda_ * gamma_ * z / (z * z + gamma_ * gamma_);
}

double DrudeBath::thermal_spectrum(double omega) const noexcept {
    const double x = beta_ * omega;
    if (std::abs(x) < 1e-3) {
        // J = (2 lambda w / gamma)(1 - w^2/gamma^2 + ...), n = 1/x + 1/2 + x/12
        const double w2g2 = omega * omega / (gamma_ * gamma_);
        const double j_over_w = 2.0 * lambda_ / gamma_ * (1.0 - w2g2 + w2g2 * w2g2);
        return j_over_w * (1.0 / beta_ + 0.5 * omega + x * omega / 12.0);
    }
    return spectral_density(omega) / (-std::expm1(-x));
}

std::vector<ExponentialMode> BathExpansion::all_modes() const {
    std::vector<ExponentialMode> out;
    out.reserve(modes.size() + 1);
    out.push_back({c_drude, gamma_drude});
    out.insert(out.end(), modes.begin(), modes.end());
    return out;
}

std::complex<double> BathExpansion::correlation(double t) const {
    std::complex<double> c = c_drude * std::exp(-gamma_drude * t);
    for (const auto& m : modes) c += m.coefficient * std::exp(-m.rate * t);
    return c;
}

BathExpansion expand(const DrudeBath& bath, const PadeDecomposition& psd) {
    const double lambda = bath.lambda();
    const double gamma = bath.gamma();
    const double beta = bath.beta();
    const std::complex<double> i1(0.0, 1.0);

    BathExpansion out;
    out.n_pade = psd.order;
    out.gamma_drude = gamma;
    out.wnr_strength = 2.0 * lambda * beta * gamma * psd.remainder;

    for (std::size_t k = 0; k < psd.poles.size(); ++k) {
        const double rate = psd.poles[k] / beta;
        if (std::abs(rate - gamma) <= kPoleCollisionTol * gamma)
            throw DegeneracyError("Pade pole xi_" + std::to_string(k + 1) + "/beta coincides with the Drude rate " +
                                  "gamma; perturb gamma or change the PSD order");
        // (2 eta_k / (i beta)) J(-i gamma_k), real
        const double c = 4.0 * psd.residues[k] * lambda * gamma * rate / (beta * (rate * rate - gamma * gamma));
        out.modes.push_back({std::complex<double>(c, 0.0), rate});
    }

    out.c_drude = -2.0 * i1 * lambda * gamma * eval_bose_approx(psd, std::complex<double>(0.0, -beta * gamma));
    return out;
}

CorrelationValue correlation_exact(const DrudeBath& bath, double t, int n_matsubara) {
    if (t < 0) throw ArgumentError("correlation_exact: t must be >= 0");
    if (n_matsubara < 0) throw ArgumentError("correlation_exact: n_matsubara must be >= 0");
    const double lambda = bath.lambda();
    const double gamma = bath.gamma();
    const double beta = bath.beta();
    const double nu1 = 2.0 * std::numbers::pi / beta;

    const double m_near = std::round(beta * gamma / (2.0 * std::numbers::pi));
    if (m_near >= 1 && std::abs(m_near * nu1 - gamma) <= kPoleCollisionTol * gamma)
        throw DegeneracyError("correlation_exact: beta gamma coincides with a Matsubara frequency");

    const double half = 0.5 * beta * gamma;
    std::complex<double> c = lambda * gamma * std::complex<double>(1.0 / std::tan(half), -1.0) * std::exp(-gamma * t);
    for (int m = 1; m <= n_matsubara; ++m) {
        const double nu = nu1 * m;
        c += 4.0 * lambda * gamma / beta * nu / (nu * nu - gamma * gamma) * std::exp(-nu * t);
    }

    double tail = std::numeric_limits<double>::infinity();
    const double nu_next = nu1 * (n_matsubara + 1);
    if (t > 0 && nu_next > gamma) {
        const double lead = 4.0 * lambda * gamma / beta * nu_next / (nu_next * nu_next - gamma * gamma);
        tail = lead * std::exp(-nu_next * t) / (-std::expm1(-nu1 * t));
    }
    return {c, tail};
}

int matsubara_terms_for(const DrudeBath& bath, double t, double tol) {
    if (!(t > 0)) throw ArgumentError("matsubara_terms_for: t must be > 0 for a convergent tail");
    const double nu1 = 2.0 * std::numbers::pi / bath.beta();
    int m = std::max(0, static_cast<int>(std::ceil(bath.gamma() / nu1)));
    for (;; m = m + 1 + m / 4) {
        if (m > 100'000'000) throw CapabilityError("matsubara_terms_for: tail does not converge");
        const double nu_next = nu1 * (m + 1);
        if (nu_next <= bath.gamma()) continue;
        const double lead =
            4.0 * bath.lambda() * bath.gamma() / bath.beta() * nu_next / (nu_next * nu_next - bath.gamma() * bath.gamma());
        if (lead * std::exp(-nu_next * t) / (-std::expm1(-nu1 * t)) < tol) return m;
    }
}

double residue_spectrum(const DrudeBath& bath, const BathExpansion& expansion, double omega) {
    double out = bath.thermal_spectrum(omega);
    const std::complex<double> iw(0.0, omega);
    out -= (expansion.c_drude / (expansion.gamma_drude - iw)).real();
    for (const auto& m : expansion.modes) out -= (m.coefficient / (m.rate - iw)).real();
    return out;
}

double residue_hwhm(const DrudeBath& bath, const BathExpansion& expansion) {
    const double half = 0.5 * expansion.wnr_strength;
    const auto f = [&](double w) { return residue_spectrum(bath, expansion, w) - half; };

    const double limit = 1e6 / bath.beta();
    double lo = 0.0;
    double hi = 1.0 / bath.beta();
    while (f(hi) > 0) {
        lo = hi;
        hi *= 2.0;
        if (hi > limit) throw InternalError("residue_hwhm: no half-maximum crossing below 1e6/beta");
    }
    auto [a, b] = boost::math::tools::bisect(f, lo, hi, [](double x, double y) {
        return std::abs(y - x) <= 1e-10 * std::abs(y);
    });
    return 0.5 * (a + b);
}

}  // namespace heom
