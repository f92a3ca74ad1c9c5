// support.hpp: shared fixtures for the unit tests

#pragma once

#include <random>

#include "heom/bath.hpp"
#include "heom/hierarchy.hpp"
#include "heom/psd.hpp"

namespace heom::test {

inline Matrix random_hermitian(int d, std::mt19937& rng, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    Matrix m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = Complex(g(rng), g(rng));
    return Matrix(0.5 * (m + m.adjoint()));
}

inline Matrix random_matrix(int d, std::mt19937& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = Complex(g(rng), g(rng));
    return m;
}

// Positive semidefinite, unit trace.
inline Matrix random_density(int d, std::mt19937& rng) {
    const Matrix a = random_matrix(d, rng);
    Matrix rho = a * a.adjoint();
    rho /= rho.trace();
    return rho;
}

inline Matrix pauli_x() {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 1) = m(1, 0) = 1.0;
    return m;
}

inline Matrix pauli_z() {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = -1.0;
    return m;
}

inline HierarchySpec single_bath(const BathExpansion& ex, const Matrix& q, int max_tier, double tol = 0.0) {
    HierarchySpec spec;
    spec.baths.push_back(BathCoupling{ex, q});
    spec.max_tier = max_tier;
    spec.filter_tol = tol;
    return spec;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace heom::test
