// bath.hpp: Drude bath, its exponential expansion and the off-basis residue spectrum

#pragma once

#include <complex>
#include <vector>

#include "heom/psd.hpp"

namespace heom {

// Drude (Lorentzian) bath, J(w) = 2 lambda gamma w / (w^2 + gamma^2). hbar = 1.
class DrudeBath {
public:
    DrudeBath(double lambda, double gamma, double beta);

    double lambda() const noexcept { return lambda_; }
    double gamma() const noexcept { return gamma_; }
    double beta() const noexcept { return beta_; }

    double spectral_density(double omega) const noexcept;
    std::complex<double> spectral_density(std::complex<double> z) const noexcept;

    // J(w) / (1 - e^{-beta w}); finite limit 2 lambda / (beta gamma) at w = 0.
    double thermal_spectrum(double omega) const noexcept;

private:
    double lambda_;
    double gamma_;
    double beta_;
};

struct ExponentialMode {
    std::complex<double> coefficient;  // c_k
    double rate;                       // gamma_k
};

// C(t) ~ c_D e^{-gamma t} + sum_k c_k e^{-gamma_k t} + 2 Delta_N delta(t)
struct BathExpansion {
    int n_pade{0};
    std::complex<double> c_drude;
    double gamma_drude{0.0};
    std::vector<ExponentialMode> modes;  // Pade modes, real coefficients
    double wnr_strength{0.0};            // Delta_N

    // Drude mode first, then the Pade modes in pole order.
    std::vector<ExponentialMode> all_modes() const;

    // Truncated exponential series (without the delta term), t >= 0.
    std::complex<double> correlation(double t) const;
};

// Throws DegeneracyError if a Pade rate xi_k / beta coincides with gamma.
BathExpansion expand(const DrudeBath& bath, const PadeDecomposition& psd);

struct CorrelationValue {
    std::complex<double> value;
    double tail_bound;  // bound on |omitted Matsubara terms|; +inf at t = 0
};

// Matsubara reference for C(t) with n_matsubara terms beyond the Drude pole.
// Throws DegeneracyError when beta gamma = 2 pi m.
CorrelationValue correlation_exact(const DrudeBath& bath, double t, int n_matsubara);

// Smallest Matsubara count whose tail bound at t is below tol; t must be > 0.
int matsubara_terms_for(const DrudeBath& bath, double t, double tol);

// dC_N(w) = J(w)/(1-e^{-beta w}) - sum_k Re[c_k / (gamma_k - i w)], even in w.
double residue_spectrum(const DrudeBath& bath, const BathExpansion& expansion, double omega);

// Exact half width: dC_N(w) = Delta_N / 2 solved by bisection to 1e-9 relative.
double residue_hwhm(const DrudeBath& bath, const BathExpansion& expansion);

}  // namespace heom
