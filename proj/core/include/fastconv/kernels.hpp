#pragma once

#include <cmath>
#include <numbers>
#include <span>

namespace fastconv {

// Free-space heat kernel in d dimensions,
//   K_d(t, y) = (4 pi t)^(-d/2) exp(-|y|^2 / (4t)),
// with the d = 0 convention K_0 == 1 (marginal over zero coordinates).
inline double heat_kernel(int d, double t, std::span<const double> y) {
    if (d == 0) return 1.0;
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) r2 += y[a] * y[a];
    const double four_pi_t = 4.0 * std::numbers::pi * t;
    return std::pow(four_pi_t, -0.5 * d) * std::exp(-r2 / (4.0 * t));
}

inline double heat_kernel_1d(double t, double y) {
    return heat_kernel(1, t, std::span<const double>(&y, 1));
}

}  // namespace fastconv
