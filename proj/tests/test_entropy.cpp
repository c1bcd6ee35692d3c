#include <doctest.h>

#include <fastconv/entropy.hpp>
#include <fastconv/stepper.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace fastconv;

namespace {

// Box data under pure convection steepens into a shock well before t = 1.
RunConfig shock_config() {
    RunConfig cfg;
    const double lo[] = {-3.0}, hi[] = {8.0}, s[] = {0.02};
    cfg.grid = Grid::centered(1, lo, hi, s);
    cfg.op = {OperatorKind::reduced_laplacian, 0.0};
    cfg.flux = {.q = 0.75, .eta = -1.0};
    cfg.init = {InitialRecipe::Kind::box, 0.5};
    cfg.mass = 1.0;
    cfg.t_end = 1.0;
    cfg.dt_max = 0.02;
    cfg.audit_window = std::make_pair(0.4, 0.8);
    return cfg;
}

}  // namespace

TEST_CASE("test bumps are smooth, compact, and admissible") {
    const double lo[] = {-3.0}, hi[] = {8.0}, s[] = {0.05};
    Grid g = Grid::centered(1, lo, hi, s);
    auto bumps = default_test_bumps(g, 0.2, 0.8, 12);
    CHECK(bumps.size() == 12);
    for (const auto& b : bumps) {
        CHECK(b.supported_inside(g));
        CHECK(b.amplitude > 0.0);
        CHECK(b.t_radius > 0.0);
        // the time window intersects the audited interval
        CHECK(b.t_center - b.t_radius < 0.8);
        CHECK(b.t_center + b.t_radius > 0.2);
        // vanishes outside its support
        Field s0 = b.sample(g, b.t_center + b.t_radius * 1.0001);
        CHECK(max_abs(s0) == 0.0);
        Field s1 = b.sample(g, b.t_center);
        CHECK(max_abs(s1) > 0.0);
        CHECK(min_value(s1) >= 0.0);
    }
}

TEST_CASE("kruzhkov levels span the window with zero first") {
    Trajectory tr = run(shock_config());
    REQUIRE(tr.window.state.size() >= 3);
    auto levels = kruzhkov_levels(tr.window, 8);
    REQUIRE(levels.size() == 9);
    CHECK(levels[0] == 0.0);
    double lo = levels[1], hi = levels.back();
    CHECK(std::is_sorted(levels.begin() + 1, levels.end()));
    // midpoint levels live strictly inside the state range
    double umax = 0.0;
    for (const Field& f : tr.window.state) umax = std::max(umax, max_abs(f));
    CHECK(lo > 0.0);
    CHECK(hi < umax);
}

TEST_CASE("entropy production vanishes on constant states") {
    RunConfig cfg = shock_config();
    Field c(cfg.grid, 0.7);
    Field e = entropy_production(cfg, c, c, 0.01, 0.3);
    // interior cells exact zero; the boundary layer is excluded by contract
    for (std::int64_t i = 1; i + 1 < e.size(); ++i) CHECK(e[i] == 0.0);
}

TEST_CASE("a shock-bearing run passes the entropy audit") {
    Trajectory tr = run(shock_config());
    const double t0 = tr.window.t.front(), t1 = tr.window.t.back();
    auto bumps = default_test_bumps(tr.config.grid, t0, t1, 12);
    auto audit = audit_entropy(tr, bumps, 16);

    const double mass = tr.series.mass.front();
    CHECK(audit.pairs >= 10);
    CHECK(audit.min_cell_check >= -1e-8 * mass);
    CHECK(audit.min_residual >= -1e-6 * mass);
    CHECK(audit.dual_route_gap <= 1e-8 * mass);
    CHECK(audit.theta_spread_ok);
    CHECK(audit.levels.size() == 17);
}

TEST_CASE("the audit also holds with diffusion switched on") {
    RunConfig cfg = shock_config();
    const double lo[] = {-8.0}, hi[] = {9.0}, s[] = {0.02};
    cfg.grid = Grid::centered(1, lo, hi, s);
    cfg.op = {OperatorKind::full_laplacian, 0.0};
    cfg.theta = 1.0;
    Trajectory tr = run(cfg);
    auto bumps = default_test_bumps(cfg.grid, tr.window.t.front(), tr.window.t.back(), 8);
    auto audit = audit_entropy(tr, bumps, 12);
    CHECK(audit.min_cell_check >= -1e-8);
    CHECK(audit.min_residual >= -1e-6);
    CHECK(audit.theta_spread_ok);
}

TEST_CASE("time reversal flips the sign of entropy production") {
    Trajectory tr = run(shock_config());
    Trajectory rev = tr;
    rev.window = reverse_window(tr.window);

    // reversed clock is increasing and reuses the original step sizes
    REQUIRE(rev.window.t.size() == tr.window.t.size());
    CHECK(std::is_sorted(rev.window.t.begin(), rev.window.t.end()));
    const std::size_t n = tr.window.t.size();
    for (std::size_t j = 1; j < n; ++j)
        CHECK(rev.window.t[j] - rev.window.t[j - 1] ==
              doctest::Approx(tr.window.t[n - j] - tr.window.t[n - j - 1]).epsilon(1e-12));

    auto bumps = default_test_bumps(tr.config.grid, rev.window.t.front(), rev.window.t.back(), 12);
    auto audit = audit_entropy(rev, bumps, 16);
    CHECK(audit.min_residual < -1e-6 * tr.series.mass.front());
}

TEST_CASE("audit rejects inadmissible test bumps") {
    Trajectory tr = run(shock_config());
    TestBump outside;
    outside.center = {100.0, 0.0};
    outside.radius = {1.0, 1.0};
    outside.t_center = 0.5 * (tr.window.t.front() + tr.window.t.back());
    outside.t_radius = 0.1;
    CHECK_THROWS_AS(audit_entropy(tr, {outside}, 4), std::invalid_argument);

    TestBump thin;
    thin.center = {1.0, 0.0};
    thin.radius = {1e-5, 1.0};
    thin.t_center = outside.t_center;
    thin.t_radius = 0.1;
    CHECK_THROWS_AS(audit_entropy(tr, {thin}, 4), std::invalid_argument);
}
