// psd.cpp: Pade spectrum decomposition of the Bose function

#include "heom/psd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include <boost/math/tools/roots.hpp>
#include <boost/multiprecision/eigen.hpp>
#include <Eigen/Dense>

#include "heom/detail/multiprecision.hpp"
#include "heom/errors.hpp"

namespace heom {

namespace detail {

namespace {

std::vector<Rational> bernoulli_recurrence(int n) {
    // sum_{k=0}^{m} C(m+1, k) B_k = 0 for m >= 1, B_0 = 1
    std::vector<Rational> b(static_cast<std::size_t>(n) + 1);
    b[0] = 1;
    for (int m = 1; m <= n; ++m) {
        Rational acc = 0;
        boost::multiprecision::cpp_int binom = 1;  // C(m+1, 0)
        for (int k = 0; k < m; ++k) {
            acc += Rational(binom) * b[static_cast<std::size_t>(k)];
            binom = binom * (m + 1 - k) / (k + 1);
        }
        b[static_cast<std::size_t>(m)] = -acc / (m + 1);
    }
    return b;
}

// Enough for the highest moment used at kMaxPsdOrder.
constexpr int kCachedBernoulli = 4 * kMaxPsdOrder + 2;

}  // namespace

std::vector<Rational> bernoulli_numbers(int n) {
    static const std::vector<Rational> cached = bernoulli_recurrence(kCachedBernoulli);
    if (n <= kCachedBernoulli) return {cached.begin(), cached.begin() + n + 1};
    return bernoulli_recurrence(n);
}

Rational bose_series_coefficient(int j) {
    const auto b = bernoulli_numbers(2 * j);
    boost::multiprecision::cpp_int fact = 1;
    for (int i = 2; i <= 2 * j; ++i) fact *= i;
    return b[static_cast<std::size_t>(2 * j)] / Rational(fact);
}

}  // namespace detail

namespace {

using detail::Rational;
using detail::Real;
using RealMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using RealVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

Real to_real(const Rational& r) {
    return Real(numerator(r)) / Real(denominator(r));
}

Real eval_poly(const std::vector<Real>& coeffs, const Real& y) {
    Real acc = 0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * y + *it;
    return acc;
}

// Taylor coefficients g_m of y^m in  g(y) = [bose(x) - 1/x - 1/2 - R_N x] / x,  y = x^2.
std::vector<Real> odd_part_coefficients(int order, int count) {
    const auto bern = detail::bernoulli_numbers(2 * count);
    std::vector<Real> g(static_cast<std::size_t>(count));
    boost::multiprecision::cpp_int fact = 1;
    int f = 1;
    for (int m = 0; m < count; ++m) {
        const int j = m + 1;
        while (f < 2 * j) fact *= ++f;
        g[static_cast<std::size_t>(m)] =
            to_real(bern[static_cast<std::size_t>(2 * j)] / Rational(fact));
    }
    g[0] -= to_real(Rational(1, 4 * (order + 1) * (2 * order + 3)));
    return g;
}

// Roots s of q(-s) on [1, bound], found by sign-change bracketing on a log grid.
// All roots are squared poles and the smallest pole exceeds pi.
std::vector<Real> negated_real_roots(const std::vector<Real>& q, int expected) {
    const auto p = [&](const Real& s) { return eval_poly(q, Real(-s)); };

    Real bound = 0;
    const Real lead = abs(q.back());
    for (std::size_t i = 0; i + 1 < q.size(); ++i) bound = std::max(bound, Real(abs(q[i]) / lead));
    bound += 1;

    const double log_hi = std::log10(static_cast<double>(bound)) + 0.1;
    boost::math::tools::eps_tolerance<Real> tol(std::numeric_limits<Real>::digits - 16);
    for (int per_decade = 400; per_decade <= 12800; per_decade *= 2) {
        const int steps = static_cast<int>(std::ceil(log_hi * per_decade));
        const Real ratio = pow(Real(10), Real(log_hi) / steps);
        std::vector<Real> roots;
        Real s_prev = Real(1);
        Real p_prev = p(s_prev);
        for (int i = 1; i <= steps; ++i) {
            Real s = s_prev * ratio;
            Real p_cur = p(s);
            if (p_cur == 0) {
                roots.push_back(s);
            } else if (sign(p_cur) != sign(p_prev) && p_prev != 0) {
                std::uintmax_t iters = 400;
                auto [a, b] = boost::math::tools::toms748_solve(p, s_prev, s, p_prev, p_cur, tol, iters);
                roots.push_back((a + b) / 2);
            }
            s_prev = s;
            p_prev = p_cur;
        }
        if (static_cast<int>(roots.size()) == expected) return roots;
    }
    throw InternalError("compute_psd: failed to bracket all " + std::to_string(expected) +
                        " denominator roots");
}

}  // namespace

double remainder_coefficient(int order) {
    if (order < 0) throw ArgumentError("PSD order must be non-negative, got " + std::to_string(order));
    return 1.0 / (4.0 * (order + 1) * (2.0 * order + 3));
}

PadeDecomposition compute_psd(int order) {
    if (order < 0) throw ArgumentError("PSD order must be non-negative, got " + std::to_string(order));
    if (order > kMaxPsdOrder)
        throw CapabilityError("PSD order " + std::to_string(order) + " exceeds the supported maximum " +
                              std::to_string(kMaxPsdOrder));

    PadeDecomposition out;
    out.order = order;
    out.remainder = remainder_coefficient(order);
    if (order == 0) return out;

    const int n = order;
    const auto g = odd_part_coefficients(n, 2 * n);

    // [N-1/N] Pade of g(y): P(y) - Q(y) g(y) = O(y^{2N}), Q(0) = 1.
    RealMatrix a(n, n);
    RealVector rhs(n);
    for (int r = 0; r < n; ++r) {
        const int m = n + r;
        for (int i = 1; i <= n; ++i) a(r, i - 1) = g[static_cast<std::size_t>(m - i)];
        rhs(r) = -g[static_cast<std::size_t>(m)];
    }
    const RealVector sol = a.fullPivLu().solve(rhs);

    std::vector<Real> q(static_cast<std::size_t>(n) + 1);
    q[0] = 1;
    for (int i = 1; i <= n; ++i) q[static_cast<std::size_t>(i)] = sol(i - 1);

    std::vector<Real> p(static_cast<std::size_t>(n));
    for (int m = 0; m < n; ++m) {
        Real acc = 0;
        for (int i = 0; i <= m; ++i) acc += q[static_cast<std::size_t>(i)] * g[static_cast<std::size_t>(m - i)];
        p[static_cast<std::size_t>(m)] = acc;
    }

    std::vector<Real> dq(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) dq[static_cast<std::size_t>(i - 1)] = q[static_cast<std::size_t>(i)] * i;

    const auto s_roots = negated_real_roots(q, n);
    out.poles.reserve(s_roots.size());
    out.residues.reserve(s_roots.size());
    for (const Real& s : s_roots) {
        // 2 eta_k = P(-s_k) / Q'(-s_k)
        const Real y = -s;
        const Real eta = eval_poly(p, y) / eval_poly(dq, y) / 2;
        if (!(s > 0) || !(eta > 0))
            throw InternalError("compute_psd: non-positive pole or residue at order " + std::to_string(n));
        out.poles.push_back(static_cast<double>(sqrt(s)));
        out.residues.push_back(static_cast<double>(eta));
    }
    return out;
}

std::complex<double> eval_bose_approx(const PadeDecomposition& psd, std::complex<double> x) {
    constexpr double kPoleTol = 1e-12;
    if (std::abs(x) < kPoleTol) throw DomainError("eval_bose_approx: x = 0 is a pole");
    const std::complex<double> i1(0.0, 1.0);
    for (double xi : psd.poles) {
        if (std::abs(x - i1 * xi) < kPoleTol * std::max(1.0, xi) ||
            std::abs(x + i1 * xi) < kPoleTol * std::max(1.0, xi))
            throw DomainError("eval_bose_approx: argument within tolerance of pole +-i" + std::to_string(xi));
    }
    std::complex<double> f = 1.0 / x + 0.5 + psd.remainder * x;
    const std::complex<double> x2 = x * x;
    for (std::size_t k = 0; k < psd.poles.size(); ++k)
        f += 2.0 * psd.residues[k] * x / (x2 + psd.poles[k] * psd.poles[k]);
    return f;
}

double eval_bose_approx(const PadeDecomposition& psd, double x) {
    return eval_bose_approx(psd, std::complex<double>(x, 0.0)).real();
}

double bose_exact(double x) {
    if (x == 0.0) throw DomainError("bose_exact: x = 0 is a pole");
    if (std::abs(x) < 1e-3) {
        const double x2 = x * x;
        return 1.0 / x + 0.5 + x / 12.0 - x * x2 / 720.0;
    }
    return -1.0 / std::expm1(-x);
}

std::vector<double> moment_residuals(const PadeDecomposition& psd) {
    std::vector<double> out;
    const int n = psd.order;
    for (int j = 1; j <= 2 * n; ++j) {
        const Real target = to_real(detail::bose_series_coefficient(j));
        Real acc = (j == 1) ? Real(psd.remainder) : Real(0);
        const Real sgn = (j % 2 == 1) ? Real(1) : Real(-1);
        for (std::size_t k = 0; k < psd.poles.size(); ++k) {
            const Real xi2 = Real(psd.poles[k]) * Real(psd.poles[k]);
            acc += sgn * 2 * Real(psd.residues[k]) / pow(xi2, j);
        }
        out.push_back(static_cast<double>(abs((acc - target) / target)));
    }
    return out;
}

}  // namespace heom
