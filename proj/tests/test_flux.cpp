#include <doctest.h>

#include <fastconv/flux.hpp>
#include <fastconv/grid.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

using namespace fastconv;

namespace {

// Godunov flux by dense sampling of min/max over the interval.
double sampled_godunov(const FluxParams& p, double a, double b) {
    const int n = 4000;
    double lo = std::min(a, b), hi = std::max(a, b);
    double best = a <= b ? std::numeric_limits<double>::infinity()
                         : -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n; ++i) {
        double s = lo + (hi - lo) * static_cast<double>(i) / n;
        double f = flux_eta(p, s);
        best = a <= b ? std::min(best, f) : std::max(best, f);
    }
    return best;
}

}  // namespace

TEST_CASE("exact flux is the odd power law") {
    FluxParams p{.q = 0.75, .eta = 0.0};
    CHECK(flux_exact(p, 16.0) == doctest::Approx(8.0).epsilon(1e-14));
    CHECK(flux_exact(p, -16.0) == doctest::Approx(-8.0).epsilon(1e-14));
    CHECK(flux_exact(p, 0.0) == 0.0);
    FluxParams half{.q = 0.5, .eta = 0.0};
    CHECK(flux_exact(half, 4.0) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("regularized flux matches the closed form and vanishes at zero") {
    FluxParams p{.q = 0.5, .eta = 1.0};
    // (1 + 1)^{1/4} - 1
    CHECK(flux_eta(p, 1.0) == doctest::Approx(0.18920711500272103).epsilon(1e-14));
    CHECK(flux_eta(p, 0.0) == 0.0);
    CHECK(flux_eta(p, -1.0) == doctest::Approx(-0.18920711500272103).epsilon(1e-14));

    FluxParams even = p;
    even.odd_extension = false;
    CHECK(flux_eta(even, -1.0) == doctest::Approx(0.18920711500272103).epsilon(1e-14));
}

TEST_CASE("regularization error stays within eta^{q/2}") {
    FluxParams p{.q = 0.75, .eta = 0.01};
    const double cap = std::pow(p.eta, p.q / 2.0);
    for (int i = 0; i <= 2000; ++i) {
        double s = -10.0 + 20.0 * i / 2000.0;
        double gap = flux_eta(p, s) - flux_exact(p, s);
        CHECK(std::abs(gap) <= cap + 1e-15);
    }
}

TEST_CASE("lipschitz bound dominates finite-difference slopes") {
    FluxParams p{.q = 0.75, .eta = 0.02};
    const double umax = 5.0;
    const double bound = lipschitz_bound(p, umax);
    CHECK(bound > 0.0);
    const double ds = 1e-4;
    double steepest = 0.0;
    for (int i = 0; i <= 4000; ++i) {
        double s = -umax + 2.0 * umax * i / 4000.0;
        double slope = (flux_eta(p, s + ds) - flux_eta(p, s)) / ds;
        steepest = std::max(steepest, std::abs(slope));
    }
    CHECK(steepest <= bound * (1.0 + 1e-6));

    FluxParams floor{.q = 0.75, .eta = 0.0, .u_floor = 0.5};
    CHECK(lipschitz_bound(floor, umax) ==
          doctest::Approx(0.75 * std::pow(0.5, -0.25)).epsilon(1e-12));
}

TEST_CASE("flux validation enforces the dimension-dependent lower bound on q") {
    FluxParams bad{.q = 0.4, .eta = 0.01};
    CHECK_NOTHROW(validate(bad, 1));  // 1 - 1/1 = 0 < 0.4
    try {
        validate(bad, 2);
        FAIL("expected throw");
    } catch (const std::invalid_argument& e) {
        std::string msg = e.what();
        CHECK(msg.find("1 - 1/N") != std::string::npos);
        CHECK(msg.find("0.4") != std::string::npos);
    }
    FluxParams ok{.q = 0.6, .eta = 0.01};
    CHECK_NOTHROW(validate(ok, 2));

    FluxParams neg{.q = 0.75, .eta = -1.0};
    CHECK_THROWS_AS(validate(neg, 1), std::invalid_argument);
    FluxParams zero_q{.q = 0.0, .eta = 0.01};
    CHECK_THROWS_AS(validate(zero_q, 1), std::invalid_argument);
}

TEST_CASE("numerical flux agrees with interval extremes of the regularized flux") {
    FluxParams p{.q = 0.75, .eta = 0.05};
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> val(-4.0, 4.0);
    for (int trial = 0; trial < 200; ++trial) {
        double a = val(rng), b = val(rng);
        double want = sampled_godunov(p, a, b);
        CHECK(numerical_flux(p, a, b) == doctest::Approx(want).epsilon(1e-6));
    }
    // consistency
    for (double s : {-3.0, -1.0, 0.0, 0.5, 2.0})
        CHECK(numerical_flux(p, s, s) == doctest::Approx(flux_eta(p, s)).epsilon(1e-14));
}

TEST_CASE("numerical flux is monotone in each argument") {
    FluxParams p{.q = 0.75, .eta = 0.05};
    const int n = 60;
    auto grid_val = [&](int i) { return -3.0 + 6.0 * i / (n - 1.0); };
    for (int i = 0; i + 1 < n; ++i)
        for (int j = 0; j < n; ++j) {
            double lo = grid_val(i), hi = grid_val(i + 1), other = grid_val(j);
            CHECK(numerical_flux(p, lo, other) <= numerical_flux(p, hi, other) + 1e-14);
            CHECK(numerical_flux(p, other, lo) >= numerical_flux(p, other, hi) - 1e-14);
        }
}

TEST_CASE("discrete convection divergence conserves mass") {
    const double lo[] = {-2.0}, hi[] = {4.0}, h[] = {0.1};
    Grid g = Grid::centered(1, lo, hi, h);
    FluxParams p{.q = 0.75, .eta = 0.01};

    Field u(g);
    for (std::int64_t i = 0; i < u.size(); ++i) {
        double x = g.center(0, i);
        u[i] = std::exp(-x * x) + 0.3 * std::sin(3.0 * x);
    }
    Field div = convection_divergence(p, u);
    CHECK(std::abs(integrate(div)) <= 1e-13 * lp_norm(u, 1.0));

    // zero-flux box: a constant state only sees the two boundary faces
    Field c(g, 0.7);
    Field divc = convection_divergence(p, c);
    for (std::int64_t i = 1; i + 1 < divc.size(); ++i) CHECK(divc[i] == 0.0);
    const double edge = flux_eta(p, 0.7) / g.spacing(0);
    CHECK(divc[0] == doctest::Approx(edge).epsilon(1e-14));
    CHECK(divc[divc.size() - 1] == doctest::Approx(-edge).epsilon(1e-14));
    CHECK(integrate(divc) == 0.0);
}

TEST_CASE("convection divergence in two dimensions acts along the last axis") {
    const double lo[] = {-1.0, -2.0}, hi[] = {1.0, 2.0}, h[] = {0.5, 0.25};
    Grid g = Grid::centered(2, lo, hi, h);
    FluxParams p{.q = 0.75, .eta = 0.01};
    // field constant in x_N: per line only the two boundary faces contribute
    Field u(g);
    for (std::int64_t i0 = 0; i0 < g.cells(0); ++i0)
        for (std::int64_t i1 = 0; i1 < g.cells(1); ++i1)
            u[u.index(i0, i1)] = static_cast<double>(i0);
    Field div = convection_divergence(p, u);
    const std::int64_t last = g.cells(1) - 1;
    for (std::int64_t i0 = 0; i0 < g.cells(0); ++i0) {
        const double edge = flux_eta(p, static_cast<double>(i0)) / g.spacing(1);
        CHECK(div[div.index(i0, 0)] == doctest::Approx(edge).epsilon(1e-14));
        CHECK(div[div.index(i0, last)] == doctest::Approx(-edge).epsilon(1e-14));
        for (std::int64_t i1 = 1; i1 < last; ++i1) CHECK(div[div.index(i0, i1)] == 0.0);
    }

    // generic field still conserves mass
    for (std::int64_t i = 0; i < u.size(); ++i) u[i] += 0.01 * static_cast<double>(i % 7);
    Field div2 = convection_divergence(p, u);
    CHECK(std::abs(integrate(div2)) <= 1e-12);
}
