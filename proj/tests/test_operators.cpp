#include <doctest.h>

#include <fastconv/grid.hpp>
#include <fastconv/operators.hpp>
#include <fastconv/reduce.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

using namespace fastconv;

namespace {

Grid line_grid(double lo, double hi, double h) {
    const double l[] = {lo}, u[] = {hi}, s[] = {h};
    return Grid::centered(1, l, u, s);
}

Field random_field(const Grid& g, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    Field f(g);
    for (std::int64_t i = 0; i < f.size(); ++i) f[i] = val(rng);
    return f;
}

double dot_vol(const Field& a, const Field& b) {
    return pairwise_dot(a.values(), b.values()) * a.grid().cell_volume();
}

// Neumann eigenvector of the 1-d stencil: cos(pi k (i + 1/2) / n),
// eigenvalue (2 - 2 cos(pi k / n)) / h^2.
Field neumann_mode(const Grid& g, int k, double amp, double offset) {
    Field f(g);
    const double n = static_cast<double>(g.cells(0));
    for (std::int64_t i = 0; i < f.size(); ++i)
        f[i] = offset + amp * std::cos(std::numbers::pi * k * (i + 0.5) / n);
    return f;
}

}  // namespace

TEST_CASE("operator kinds expose per-axis coefficients") {
    OperatorChoice full{OperatorKind::full_laplacian, 0.0};
    CHECK(full.coeff(0, 2) == 1.0);
    CHECK(full.coeff(1, 2) == 1.0);
    CHECK(!full.is_zero(1));

    OperatorChoice red{OperatorKind::reduced_laplacian, 0.0};
    CHECK(red.coeff(0, 2) == 1.0);
    CHECK(red.coeff(1, 2) == 0.0);
    CHECK(red.is_zero(1));
    CHECK(!red.is_zero(2));

    OperatorChoice axial{OperatorKind::reduced_plus_axial, 0.01};
    CHECK(axial.coeff(1, 2) == 0.01);
    CHECK(axial.coeff(0, 1) == 0.01);
    CHECK(!axial.is_zero(1));

    OperatorChoice bad{OperatorKind::reduced_plus_axial, -1.0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("discrete diffusion annihilates constants exactly") {
    Grid g = line_grid(-2.0, 2.0, 0.25);
    OperatorChoice op{OperatorKind::full_laplacian, 0.0};
    Field c(g, 3.7), y(g);
    apply_operator(op, c, y);
    for (std::int64_t i = 0; i < y.size(); ++i) CHECK(y[i] == 0.0);
}

TEST_CASE("discrete diffusion is symmetric and positive semidefinite") {
    const double lo[] = {-1.0, -1.0}, hi[] = {1.0, 1.0}, h[] = {0.25, 0.5};
    Grid g = Grid::centered(2, lo, hi, h);
    OperatorChoice op{OperatorKind::full_laplacian, 0.0};
    Field x = random_field(g, 7), y = random_field(g, 8);
    Field ax(g), ay(g);
    apply_operator(op, x, ax);
    apply_operator(op, y, ay);
    CHECK(dot_vol(ax, y) == doctest::Approx(dot_vol(x, ay)).epsilon(1e-12));
    CHECK(dot_vol(ax, x) >= -1e-13);
}

TEST_CASE("gradient energy matches the quadratic form") {
    const double lo[] = {-1.0, -1.0}, hi[] = {1.0, 1.0}, h[] = {0.25, 0.5};
    Grid g = Grid::centered(2, lo, hi, h);
    for (OperatorKind kind :
         {OperatorKind::full_laplacian, OperatorKind::reduced_laplacian,
          OperatorKind::reduced_plus_axial}) {
        OperatorChoice op{kind, 0.02};
        Field x = random_field(g, 11);
        Field ax(g);
        apply_operator(op, x, ax);
        CHECK(gradient_energy(op, x) == doctest::Approx(dot_vol(ax, x)).epsilon(1e-11));
    }
}

TEST_CASE("backward solve damps Neumann eigenvectors by the exact factor") {
    Grid g = line_grid(-2.0, 2.0, 0.25);
    const std::int64_t n = g.cells(0);
    const double h = g.spacing(0);
    OperatorChoice op{OperatorKind::full_laplacian, 0.0};

    for (int k : {1, 3, 5}) {
        const double lambda =
            (2.0 - 2.0 * std::cos(std::numbers::pi * k / static_cast<double>(n))) / (h * h);
        Field f = neumann_mode(g, k, 2.0, 5.0);
        const double dt = 0.1;

        Field be = diffuse_backward(op, f, dt, 1.0, 1e-13, 500);
        for (std::int64_t i = 0; i < n; ++i) {
            double want = 5.0 + (f[i] - 5.0) / (1.0 + dt * lambda);
            CHECK(be[i] == doctest::Approx(want).epsilon(1e-9));
        }

        Field cn = diffuse_backward(op, f, dt, 0.5, 1e-13, 500);
        const double factor = (1.0 - 0.5 * dt * lambda) / (1.0 + 0.5 * dt * lambda);
        for (std::int64_t i = 0; i < n; ++i) {
            double want = 5.0 + (f[i] - 5.0) * factor;
            CHECK(cn[i] == doctest::Approx(want).epsilon(1e-9));
        }
    }
}

TEST_CASE("backward solve conserves mass to rounding") {
    const double lo[] = {-1.0, -1.0}, hi[] = {1.0, 1.0}, h[] = {0.2, 0.2};
    Grid g = Grid::centered(2, lo, hi, h);
    OperatorChoice op{OperatorKind::full_laplacian, 0.0};
    Field f = random_field(g, 21);
    const double m0 = integrate(f);
    // loose tolerance on purpose: mass must not depend on solver accuracy
    Field v = diffuse_backward(op, f, 0.5, 1.0, 1e-4, 2000);
    CHECK(integrate(v) == doctest::Approx(m0).epsilon(1e-13));
}

TEST_CASE("zero operator makes the solve a no-op") {
    Grid g = line_grid(-2.0, 2.0, 0.25);
    OperatorChoice op{OperatorKind::reduced_laplacian, 0.0};
    REQUIRE(op.is_zero(1));
    Field f = random_field(g, 3);
    Field v = diffuse_backward(op, f, 0.7, 1.0, 1e-12, 10);
    for (std::int64_t i = 0; i < f.size(); ++i) CHECK(v[i] == f[i]);
}

TEST_CASE("reduced operator ignores variation along the convection axis") {
    const double lo[] = {-1.0, -1.0}, hi[] = {1.0, 1.0}, h[] = {0.25, 0.25};
    Grid g = Grid::centered(2, lo, hi, h);
    OperatorChoice op{OperatorKind::reduced_laplacian, 0.0};
    Field f(g);
    for (std::int64_t i0 = 0; i0 < g.cells(0); ++i0)
        for (std::int64_t i1 = 0; i1 < g.cells(1); ++i1)
            f[f.index(i0, i1)] = std::sin(0.9 * g.center(1, i1));
    Field y(g);
    apply_operator(op, f, y);
    for (std::int64_t i = 0; i < y.size(); ++i) CHECK(y[i] == 0.0);
    CHECK(gradient_energy(op, f) == 0.0);
}

TEST_CASE("solver reports convergence failure") {
    Grid g = line_grid(-2.0, 2.0, 0.02);
    OperatorChoice op{OperatorKind::full_laplacian, 0.0};
    Field f = random_field(g, 77);
    CHECK_THROWS_AS(diffuse_backward(op, f, 10.0, 1.0, 1e-14, 2), std::runtime_error);
    SolveStats stats;
    Field ok = diffuse_backward(op, f, 0.01, 1.0, 1e-10, 2000, &stats);
    CHECK(stats.iterations >= 1);
    CHECK(stats.residual <= 1e-10 * std::sqrt(pairwise_dot(f.values(), f.values())) * 1.000001);
}
