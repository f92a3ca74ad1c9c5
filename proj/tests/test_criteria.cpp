// test_criteria.cpp: Gamma_N, kappa_N and the accuracy tiers

#include <gtest/gtest.h>

#include <cmath>

#include "heom/criteria.hpp"
#include "heom/errors.hpp"
#include "heom/units.hpp"

namespace heom {
namespace {

double round1(double x) { return std::round(x * 10.0) / 10.0; }

// eps/V = 1, lambda/V = 0.25, gamma/V = 5, beta V = 50
const DrudeBath kSpinBosonBath(0.25, 5.0, 50.0);
const double kSpinBosonOmega = 2.0 * std::sqrt(2.0);

TEST(Criteria, RCoefficient) {
    EXPECT_DOUBLE_EQ(r_coefficient(0), 6.0);
    EXPECT_DOUBLE_EQ(r_coefficient(10), 2.0 * 11 * 23);
    EXPECT_DOUBLE_EQ(r_coefficient(4), 1.0 / (2.0 * remainder_coefficient(4)));
}

TEST(Criteria, GammaApproxArithmetic) {
    // beta Gamma_10 = 506 + sqrt(250^2 + 0.34 * 506^2)
    EXPECT_NEAR(kSpinBosonBath.beta() * gamma_approx(10, kSpinBosonBath), 506 + std::sqrt(62500 + 0.34 * 506 * 506),
                1e-9);
    EXPECT_NEAR(kSpinBosonBath.beta() * gamma_approx(10, kSpinBosonBath), 892.7, 0.05);
}

TEST(Criteria, SpinBosonCaptionNumbers) {
    struct Row {
        int order;
        double ratio;
        double kappa;
    };
    for (const Row& r : {Row{4, 2.6, 3.6}, Row{8, 4.7, 8.5}, Row{10, 6.3, 12.0}, Row{12, 8.4, 16.3}}) {
        const auto rep = accuracy_report(r.order, kSpinBosonBath, kSpinBosonOmega);
        EXPECT_DOUBLE_EQ(round1(rep.ratio), r.ratio) << "N=" << r.order;
        EXPECT_DOUBLE_EQ(round1(rep.kappa_n), r.kappa) << "N=" << r.order;
    }
    EXPECT_EQ(accuracy_report(10, kSpinBosonBath, kSpinBosonOmega).tier, AccuracyTier::Accurate);
    EXPECT_EQ(accuracy_report(8, kSpinBosonBath, kSpinBosonOmega).tier, AccuracyTier::SemiQuantitative);
}

TEST(Criteria, DimerCaptionNumbers) {
    for (auto [kelvin, ratio, kap] : {std::tuple{298.0, 8.3, 8.7}, std::tuple{77.0, 2.4, 2.4}}) {
        const DrudeBath b(600.0, 600.0, units::beta_from_kelvin(kelvin));
        const auto rep = accuracy_report(1, b, 800.0);
        EXPECT_DOUBLE_EQ(round1(rep.ratio), ratio) << kelvin << " K";
        EXPECT_DOUBLE_EQ(round1(rep.kappa_n), kap) << kelvin << " K";
    }
}

TEST(Criteria, KappaDefinition) {
    // kappa_N = sqrt(Gamma_N / Delta_N) with Delta_N = 2 lambda beta gamma R_N
    const DrudeBath b(0.3, 2.0, 1.5);
    for (int n : {0, 3, 11}) {
        const double delta = 2 * b.lambda() * b.beta() * b.gamma() * remainder_coefficient(n);
        EXPECT_NEAR(kappa(n, b), std::sqrt(gamma_approx(n, b) / delta), 1e-12);
    }
}

TEST(Criteria, MonotoneInOrder) {
    for (int n = 0; n < kMaxPsdOrder; ++n) {
        EXPECT_LT(gamma_approx(n, kSpinBosonBath), gamma_approx(n + 1, kSpinBosonBath));
        EXPECT_LT(kappa(n, kSpinBosonBath), kappa(n + 1, kSpinBosonBath));
    }
}

TEST(Criteria, KappaScalesAsInverseRootLambda) {
    for (int n : {1, 5, 16}) {
        const DrudeBath a(0.2, 3.0, 0.8);
        const DrudeBath b(0.8, 3.0, 0.8);
        EXPECT_NEAR(kappa(n, a) / kappa(n, b), 2.0, 1e-14);
    }
}

TEST(Criteria, SharpThresholds) {
    EXPECT_EQ(classify(5.0), AccuracyTier::Accurate);
    EXPECT_EQ(classify(std::nextafter(5.0, 0.0)), AccuracyTier::SemiQuantitative);
    EXPECT_EQ(classify(2.0), AccuracyTier::SemiQuantitative);
    EXPECT_EQ(classify(std::nextafter(2.0, 0.0)), AccuracyTier::Unreliable);
    EXPECT_EQ(classify(std::nan("")), AccuracyTier::Unreliable);
    EXPECT_EQ(to_string(AccuracyTier::SemiQuantitative), "semi-quantitative");
}

TEST(Criteria, ReportUsesTheWeakerCriterion) {
    const auto rep = accuracy_report(4, kSpinBosonBath, kSpinBosonOmega);
    EXPECT_DOUBLE_EQ(rep.figure_of_merit(), std::min(rep.ratio, rep.kappa_n));
    EXPECT_DOUBLE_EQ(rep.ratio, gamma_approx(4, kSpinBosonBath) / kSpinBosonOmega);
    EXPECT_THROW(accuracy_report(4, kSpinBosonBath, 0.0), ArgumentError);
}

TEST(Criteria, MinimumOrder) {
    const int accurate = minimum_order(kSpinBosonBath, kSpinBosonOmega, AccuracyTier::Accurate);
    EXPECT_EQ(accurate, 9);
    EXPECT_LT(accuracy_report(8, kSpinBosonBath, kSpinBosonOmega).figure_of_merit(), kAccurateThreshold);
    const int semi = minimum_order(kSpinBosonBath, kSpinBosonOmega, AccuracyTier::SemiQuantitative);
    EXPECT_LE(semi, accurate);
    EXPECT_THROW(minimum_order(kSpinBosonBath, kSpinBosonOmega, AccuracyTier::Unreliable), ArgumentError);
    // strong coupling at low temperature: nothing up to N = 16 qualifies
    EXPECT_THROW(minimum_order(DrudeBath(1000.0, 1.0, 100.0), 1.0, AccuracyTier::Accurate), CapabilityError);
}

TEST(Criteria, CurvesReproduceKappa) {
    const std::vector<double> grid = {0.1, 1.0, 10.0, 100.0, 1000.0};
    for (int n : {1, 4, 12}) {
        const auto curve = criteria_curves(n, grid);
        ASSERT_EQ(curve.size(), grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            for (double lambda : {0.01, 3.0}) {
                const double beta = 0.7;
                const DrudeBath b(lambda, grid[i] / beta, beta);
                EXPECT_NEAR(curve[i].kappa_bar / std::sqrt(beta * lambda), kappa(n, b), 1e-12 * kappa(n, b));
                EXPECT_NEAR(curve[i].beta_gamma_n, beta * gamma_approx(n, b), 1e-12 * curve[i].beta_gamma_n);
            }
        }
    }
}

}  // namespace
}  // namespace heom
