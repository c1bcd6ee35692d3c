#pragma once

#include <cstddef>
#include <span>

namespace fastconv {

// Fixed-order pairwise summation. Every reduction in the library funnels
// through these so that a given input vector always produces the same
// floating-point result, independent of build flags or worker count.

namespace detail {

inline double pairwise_sum_rec(const double* p, std::size_t n) {
    if (n <= 32) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += p[i];
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_sum_rec(p, h) + pairwise_sum_rec(p + h, n - h);
}

inline double pairwise_dot_rec(const double* a, const double* b, std::size_t n) {
    if (n <= 32) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_dot_rec(a, b, h) + pairwise_dot_rec(a + h, b + h, n - h);
}

}  // namespace detail

inline double pairwise_sum(std::span<const double> v) {
    return detail::pairwise_sum_rec(v.data(), v.size());
}

inline double pairwise_dot(std::span<const double> a, std::span<const double> b) {
    return detail::pairwise_dot_rec(a.data(), b.data(), a.size());
}

}  // namespace fastconv
