// criteria.hpp: a-priori accuracy control for the [N/N] PSD hierarchy

#pragma once

#include <string_view>
#include <vector>

#include "heom/bath.hpp"

namespace heom {

enum class AccuracyTier { Accurate, SemiQuantitative, Unreliable };

std::string_view to_string(AccuracyTier tier) noexcept;

inline constexpr double kAccurateThreshold = 5.0;
inline constexpr double kSemiQuantitativeThreshold = 2.0;

struct AccuracyReport {
    int order{0};
    double gamma_n{0.0};  // Gamma_N, energy units
    double kappa_n{0.0};  // kappa_N, dimensionless
    double omega_s{0.0};
    double ratio{0.0};    // Gamma_N / Omega_s
    AccuracyTier tier{AccuracyTier::Unreliable};

    double figure_of_merit() const noexcept;  // min(ratio, kappa_N)
};

// r_N = 1 / (2 R_N) = 2 (N+1) (2N+3)
double r_coefficient(int order);

// Gamma_N = (1/beta) [ r_N + sqrt((beta gamma)^2 + 0.34 r_N^2) ]
double gamma_approx(int order, const DrudeBath& bath);

// kappa_N = sqrt(Gamma_N / Delta_N)
double kappa(int order, const DrudeBath& bath);

AccuracyTier classify(double figure_of_merit) noexcept;

AccuracyReport accuracy_report(int order, const DrudeBath& bath, double omega_s);

// Smallest N in [0, kMaxPsdOrder] meeting target. target must not be Unreliable.
// Throws CapabilityError carrying the N = kMaxPsdOrder report otherwise.
int minimum_order(const DrudeBath& bath, double omega_s, AccuracyTier target);

struct CriteriaCurvePoint {
    double beta_gamma;
    double beta_gamma_n;  // beta Gamma_N
    double kappa_bar;     // (beta lambda)^{1/2} kappa_N, lambda independent
};

std::vector<CriteriaCurvePoint> criteria_curves(int order, const std::vector<double>& beta_gamma_grid);

}  // namespace heom
