// criteria.cpp: Gamma_N / kappa_N criteria and minimum-order selection

#include "heom/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "heom/errors.hpp"

namespace heom {

std::string_view to_string(AccuracyTier tier) noexcept {
    switch (tier) {
        case AccuracyTier::Accurate: return "accurate";
        case AccuracyTier::SemiQuantitative: return "semi-quantitative";
        case AccuracyTier::Unreliable: return "unreliable";
    }
    return "unknown";
}

double AccuracyReport::figure_of_merit() const noexcept { return std::min(ratio, kappa_n); }

double r_coefficient(int order) {
    if (order < 0) throw ArgumentError("PSD order must be non-negative, got " + std::to_string(order));
    return 2.0 * (order + 1) * (2.0 * order + 3);
}

double gamma_approx(int order, const DrudeBath& bath) {
    const double r = r_coefficient(order);
    const double bg = bath.beta() * bath.gamma();
    return (r + std::sqrt(bg * bg + 0.34 * r * r)) / bath.beta();
}

double kappa(int order, const DrudeBath& bath) {
    const double r = r_coefficient(order);
    return std::sqrt(r * gamma_approx(order, bath) / (bath.beta() * bath.lambda() * bath.gamma()));
}

AccuracyTier classify(double figure_of_merit) noexcept {
    if (figure_of_merit >= kAccurateThreshold) return AccuracyTier::Accurate;
    if (figure_of_merit >= kSemiQuantitativeThreshold) return AccuracyTier::SemiQuantitative;
    return AccuracyTier::Unreliable;
}

AccuracyReport accuracy_report(int order, const DrudeBath& bath, double omega_s) {
    if (!(omega_s > 0)) throw ArgumentError("characteristic frequency Omega_s must be > 0");
    AccuracyReport rep;
    rep.order = order;
    rep.gamma_n = gamma_approx(order, bath);
    rep.kappa_n = kappa(order, bath);
    rep.omega_s = omega_s;
    rep.ratio = rep.gamma_n / omega_s;
    rep.tier = classify(rep.figure_of_merit());
    return rep;
}

int minimum_order(const DrudeBath& bath, double omega_s, AccuracyTier target) {
    if (target == AccuracyTier::Unreliable) throw ArgumentError("minimum_order: target must be accurate or semi");
    const double threshold = target == AccuracyTier::Accurate ? kAccurateThreshold : kSemiQuantitativeThreshold;
    for (int n = 0; n <= kMaxPsdOrder; ++n) {
        if (accuracy_report(n, bath, omega_s).figure_of_merit() >= threshold) return n;
    }
    const auto last = accuracy_report(kMaxPsdOrder, bath, omega_s);
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "no PSD order up to %d reaches the %s tier; at N=%d: Gamma_N/Omega_s=%.4g kappa_N=%.4g (need %.1f)",
                  kMaxPsdOrder, std::string(to_string(target)).c_str(), kMaxPsdOrder, last.ratio, last.kappa_n,
                  threshold);
    throw CapabilityError(buf);
}

std::vector<CriteriaCurvePoint> criteria_curves(int order, const std::vector<double>& beta_gamma_grid) {
    std::vector<CriteriaCurvePoint> out;
    out.reserve(beta_gamma_grid.size());
    const double r = r_coefficient(order);
    for (double bg : beta_gamma_grid) {
        if (!(bg > 0)) throw ArgumentError("criteria_curves: beta*gamma grid values must be > 0");
        const double bgn = r + std::sqrt(bg * bg + 0.34 * r * r);
        // (beta lambda)^{1/2} kappa_N = sqrt(r_N beta Gamma_N / (beta gamma))
        out.push_back({bg, bgn, std::sqrt(r * bgn / bg)});
    }
    return out;
}

}  // namespace heom
