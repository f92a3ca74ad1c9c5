// multiprecision.hpp: extended-precision helpers used inside compute_psd

#pragma once

#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

namespace heom::detail {

using Rational = boost::multiprecision::cpp_rational;
using Real = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<160>,
                                           boost::multiprecision::et_off>;

// Exact Bernoulli numbers B_0..B_n (B_1 = -1/2 convention).
std::vector<Rational> bernoulli_numbers(int n);

// Taylor coefficient B_{2j} / (2j)! of the odd part of 1/(1-e^{-x}), exact.
Rational bose_series_coefficient(int j);

}  // namespace heom::detail
