// psd.hpp: [N/N] Pade spectrum decomposition of the Bose function
//
//   1/(1 - e^{-x})  ~  1/x + 1/2 + sum_k 2 eta_k x / (x^2 + xi_k^2) + R_N x
//
// Poles and residues are obtained in extended precision and returned as doubles.

#pragma once

#include <complex>
#include <vector>

namespace heom {

inline constexpr int kMaxPsdOrder = 16;

struct PadeDecomposition {
    int order{0};
    std::vector<double> poles;     // xi_k > 0, ascending
    std::vector<double> residues;  // eta_k > 0, matching poles
    double remainder{1.0 / 12.0};  // R_N
};

// R_N = 1 / (4 (N+1) (2N+3)).
double remainder_coefficient(int order);

// Throws ArgumentError for order < 0 and CapabilityError above kMaxPsdOrder.
PadeDecomposition compute_psd(int order);

// Evaluates the approximant. Accepts complex arguments since the Drude
// coefficient needs it at x = -i beta gamma. Throws DomainError at a pole.
std::complex<double> eval_bose_approx(const PadeDecomposition& psd, std::complex<double> x);
double eval_bose_approx(const PadeDecomposition& psd, double x);

// 1/(1 - e^{-x}) with a Laurent-series branch for |x| < 1e-3.
double bose_exact(double x);

// Relative residuals of the moment conditions j = 1..2N,
//   sum_k 2 eta_k (-1)^{j-1} xi_k^{-2j} + delta_{j1} R_N = B_{2j} / (2j)!,
// evaluated in extended precision from the stored double values.
std::vector<double> moment_residuals(const PadeDecomposition& psd);

}  // namespace heom
