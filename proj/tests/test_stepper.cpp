#include <doctest.h>

#include <fastconv/kernels.hpp>
#include <fastconv/stepper.hpp>

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

using namespace fastconv;

namespace {

RunConfig heat_config(double lo, double hi, double h) {
    RunConfig cfg;
    const double l[] = {lo}, u[] = {hi}, s[] = {h};
    cfg.grid = Grid::centered(1, l, u, s);
    cfg.op = {OperatorKind::full_laplacian, 0.0};
    cfg.convection = false;
    cfg.init = {InitialRecipe::Kind::heat_kernel, 0.25};
    cfg.mass = 1.0;
    cfg.t_end = 0.25;
    cfg.dt_max = 1e-3;
    return cfg;
}

double l1_error_vs_kernel(const Field& u, double t, double mass) {
    const Grid& g = u.grid();
    double err = 0.0;
    for (std::int64_t i = 0; i < u.size(); ++i) {
        double x = g.center(0, i);
        err += std::abs(u[i] - mass * heat_kernel_1d(t, x)) * g.cell_volume();
    }
    return err;
}

}  // namespace

TEST_CASE("initial recipes hit the requested mass exactly") {
    const double lo[] = {-6.0}, hi[] = {6.0}, h[] = {0.05};
    Grid g = Grid::centered(1, lo, hi, h);
    for (auto kind : {InitialRecipe::Kind::gaussian, InitialRecipe::Kind::box,
                      InitialRecipe::Kind::bump, InitialRecipe::Kind::heat_kernel}) {
        InitialRecipe r{kind, kind == InitialRecipe::Kind::heat_kernel ? 0.2 : 0.8};
        Field u = make_initial(r, 2.5, g);
        CHECK(integrate(u) == doctest::Approx(2.5).epsilon(1e-12));
        CHECK(min_value(u) >= 0.0);
    }
}

TEST_CASE("warm start samples the heat kernel") {
    const double lo[] = {-8.0}, hi[] = {8.0}, h[] = {0.02};
    Grid g = Grid::centered(1, lo, hi, h);
    Field u = make_initial({InitialRecipe::Kind::heat_kernel, 1.0}, 1.0, g);
    for (std::int64_t i = 0; i < u.size(); i += 37) {
        double x = g.center(0, i);
        CHECK(u[i] == doctest::Approx(heat_kernel_1d(1.0, x)).epsilon(1e-6));
    }
    // || K(1, .) ||_2 = (8 pi)^{-1/4}
    CHECK(lp_norm(u, 2.0) == doctest::Approx(0.4466215900914038).epsilon(1e-5));
}

TEST_CASE("initial recipes reject unresolvable widths and small domains") {
    const double lo[] = {-2.0}, hi[] = {2.0}, h[] = {0.5};
    Grid g = Grid::centered(1, lo, hi, h);
    CHECK_THROWS_AS(make_initial({InitialRecipe::Kind::gaussian, 0.3}, 1.0, g),
                    std::invalid_argument);
    try {
        make_initial({InitialRecipe::Kind::gaussian, 3.0}, 1.0, g);
        FAIL("expected throw");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("domain too small") != std::string::npos);
    }
}

TEST_CASE("pure diffusion run tracks the heat kernel") {
    RunConfig cfg = heat_config(-20.0, 20.0, 0.05);
    cfg.snapshot_times = {0.25};
    Trajectory tr = run(cfg);
    CHECK(tr.steps_taken == 250);
    const Field& u = tr.snapshot_at(0.25);
    double err = l1_error_vs_kernel(u, 0.5, 1.0);
    CHECK(err <= 2.5e-3);
    CHECK(err >= 1e-6);  // the comparison must not be vacuous
}

TEST_CASE("convection run conserves mass and respects the maximum principle") {
    RunConfig cfg;
    const double lo[] = {-10.0}, hi[] = {30.0}, s[] = {0.05};
    cfg.grid = Grid::centered(1, lo, hi, s);
    cfg.op = {OperatorKind::full_laplacian, 0.0};
    cfg.flux = {.q = 0.75, .eta = -1.0};
    cfg.init = {InitialRecipe::Kind::gaussian, 0.4};
    cfg.mass = 1.0;
    cfg.t_end = 1.0;
    cfg.snapshot_times = {1.0};
    Trajectory tr = run(cfg);

    const double m0 = tr.series.mass.front();
    for (double m : tr.series.mass) CHECK(std::abs(m - m0) <= 1e-13 * std::abs(m0));

    const double max0 = tr.series.max_v.front();
    for (std::size_t i = 0; i < tr.series.t.size(); ++i) {
        CHECK(tr.series.min_v[i] >= -1e-8 * max0);
        CHECK(tr.series.max_v[i] <= max0 * (1.0 + 1e-10));
    }
    CHECK(tr.steps_taken >= 10);
}

TEST_CASE("snapshot times are hit exactly") {
    RunConfig cfg = heat_config(-20.0, 20.0, 0.1);
    cfg.dt_max = 0.009;  // does not divide the snapshot times
    cfg.snapshot_times = {0.1, 0.23, 0.25};
    Trajectory tr = run(cfg);
    REQUIRE(tr.snapshots.size() == 4);  // initial state + 3 requested
    CHECK(tr.snapshots[0].first == 0.0);
    CHECK(tr.snapshots[1].first == 0.1);
    CHECK(tr.snapshots[2].first == 0.23);
    CHECK(tr.snapshots[3].first == 0.25);
    CHECK_NOTHROW(tr.snapshot_at(0.23));
    CHECK_THROWS_AS(tr.snapshot_at(0.17), std::out_of_range);
    // the series contains rows at exactly those times
    for (double want : {0.1, 0.23, 0.25}) {
        bool hit = false;
        for (double t : tr.series.t)
            if (t == want) hit = true;
        CHECK(hit);
    }
}

TEST_CASE("restarting from a snapshot reproduces the run bit for bit") {
    RunConfig cfg;
    const double lo[] = {-8.0}, hi[] = {16.0}, s[] = {0.1};
    cfg.grid = Grid::centered(1, lo, hi, s);
    cfg.op = {OperatorKind::full_laplacian, 0.0};
    cfg.flux = {.q = 0.75, .eta = -1.0};
    cfg.init = {InitialRecipe::Kind::gaussian, 0.5};
    cfg.t_end = 0.4;
    cfg.snapshot_times = {0.2, 0.4};
    Trajectory full = run(cfg);

    Trajectory tail = run_from(cfg, full.snapshot_at(0.2), 0.2);
    const Field& a = full.snapshot_at(0.4);
    const Field& b = tail.snapshot_at(0.4);
    REQUIRE(a.size() == b.size());
    CHECK(std::memcmp(a.values().data(), b.values().data(),
                      sizeof(double) * static_cast<std::size_t>(a.size())) == 0);
    // run_from must not re-emit snapshots before its start time
    CHECK(tail.snapshots.front().first == 0.2);
}

TEST_CASE("step size respects every configured cap") {
    RunConfig cfg;
    const double lo[] = {-5.0}, hi[] = {5.0}, s[] = {0.1};
    cfg.grid = Grid::centered(1, lo, hi, s);
    cfg.flux = {.q = 0.75, .eta = 0.01};
    cfg.dt_max = 0.05;
    cfg.dt_rel = 0.1;
    cfg.dt_rel_offset = 0.02;
    Field u = make_initial({InitialRecipe::Kind::gaussian, 0.5}, 1.0, cfg.grid);

    const double cfl = cfl_dt(cfg, u, 0.0, 100.0);
    CHECK(cfl <= 0.05);
    CHECK(cfl <= 0.1 * 0.02 * (1.0 + 1e-12));
    CHECK(cfl <= cfg.cfl * 0.1 / lipschitz_bound(cfg.flux, max_abs(u)) * (1.0 + 1e-12));
    // the gap to the next event wins when it is smaller
    CHECK(cfl_dt(cfg, u, 0.0, 1e-4) == doctest::Approx(1e-4));

    // diffusion-only configs need an explicit cap
    RunConfig pure = cfg;
    pure.convection = false;
    pure.dt_max = 0.0;
    pure.dt_rel = 0.0;
    CHECK_THROWS_AS(cfl_dt(pure, u, 0.0, 100.0), std::invalid_argument);
}

TEST_CASE("a domain that cannot hold the solution aborts the run") {
    RunConfig cfg;
    const double lo[] = {-1.5}, hi[] = {1.5}, s[] = {0.05};
    cfg.grid = Grid::centered(1, lo, hi, s);
    cfg.op = {OperatorKind::full_laplacian, 0.0};
    cfg.convection = false;
    cfg.init = {InitialRecipe::Kind::gaussian, 0.4};
    cfg.t_end = 5.0;
    cfg.dt_max = 0.01;
    try {
        run(cfg);
        FAIL("expected abort");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("domain too small") != std::string::npos);
    }
}

TEST_CASE("default regularization follows the grid spacing") {
    RunConfig cfg;
    const double lo[] = {-2.0}, hi[] = {2.0}, s[] = {0.05};
    cfg.grid = Grid::centered(1, lo, hi, s);
    cfg.flux.eta = -1.0;
    CHECK(cfg.effective_eta() == doctest::Approx(0.0025).epsilon(1e-14));
    cfg.flux.eta = 0.125;
    CHECK(cfg.effective_eta() == 0.125);
}

TEST_CASE("config validation rejects out-of-range parameters") {
    RunConfig cfg = heat_config(-4.0, 4.0, 0.1);
    CHECK_NOTHROW(cfg.validate());

    RunConfig bad = cfg;
    bad.theta = 0.3;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.cfl = 1.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.t_end = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.snapshot_times = {0.2, 0.1};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.snapshot_times = {9.0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.convection = true;
    bad.flux.q = 0.3;
    const double lo2[] = {-2.0, -2.0}, hi2[] = {2.0, 2.0}, s2[] = {0.1, 0.1};
    bad.grid = Grid::centered(2, lo2, hi2, s2);
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("series rows are emitted at the configured stride") {
    RunConfig cfg = heat_config(-8.0, 8.0, 0.1);
    cfg.t_end = 0.1;
    cfg.dt_max = 1e-3;
    cfg.series_stride = 10;
    Trajectory tr = run(cfg);
    CHECK(tr.steps_taken == 100);
    // initial row, every 10th step, and the final row
    CHECK(tr.series.t.size() == 11);
    CHECK(tr.series.t.front() == 0.0);
    CHECK(tr.series.t.back() == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("tail series track the configured radii") {
    RunConfig cfg;
    const double lo[] = {-10.0}, hi[] = {20.0}, s[] = {0.05};
    cfg.grid = Grid::centered(1, lo, hi, s);
    cfg.op = {OperatorKind::full_laplacian, 0.0};
    cfg.flux = {.q = 0.75, .eta = -1.0};
    cfg.init = {InitialRecipe::Kind::gaussian, 0.4};
    cfg.t_end = 0.5;
    cfg.tail_radii = {2.0, 4.0};
    Trajectory tr = run(cfg);
    REQUIRE(tr.series.tail.size() == 2);
    REQUIRE(tr.series.tail[0].size() == tr.series.t.size());
    const Field& u0 = make_initial(cfg.init, cfg.mass, cfg.grid);
    CHECK(tr.series.tail[0].front() == doctest::Approx(tail_mass(u0, 2.0)).epsilon(1e-12));
    // mass beyond radius 2 grows from essentially nothing, stays below radius-0 mass
    CHECK(tr.series.tail[0].back() > tr.series.tail[0].front());
    CHECK(tr.series.tail[1].back() < tr.series.tail[0].back());
}
