#include <doctest.h>

#include <fastconv/diagnostics.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

using namespace fastconv;

namespace {

RunConfig pair_config() {
    RunConfig cfg;
    const double lo[] = {-12.0}, hi[] = {16.0}, s[] = {0.05};
    cfg.grid = Grid::centered(1, lo, hi, s);
    cfg.op = {OperatorKind::full_laplacian, 0.0};
    cfg.flux = {.q = 0.75, .eta = -1.0};
    cfg.t_end = 0.5;
    return cfg;
}

}  // namespace

TEST_CASE("coupled runs contract in L1 and preserve ordering") {
    RunConfig cfg = pair_config();
    Field u0 = make_initial({InitialRecipe::Kind::gaussian, 0.5}, 1.0, cfg.grid);
    Field v0 = u0;
    Field bump = make_initial({InitialRecipe::Kind::bump, 0.8}, 0.4, cfg.grid);
    for (std::int64_t i = 0; i < v0.size(); ++i) v0[i] += bump[i];

    RunPair pair = run_coupled(cfg, u0, v0);
    REQUIRE(pair.t.size() >= 2);
    REQUIRE(pair.l1_dist.size() == pair.t.size());

    const long steps = pair.u.steps_taken;
    const double scale = integrate(u0) + integrate(v0);
    CHECK(max_contraction_increase(pair) <= 2.0 * steps * cfg.lin_tol * scale);
    // v started above u and must stay above (up to solver tolerance)
    CHECK(comparison_violation(pair) <= steps * cfg.lin_tol * scale);
    CHECK(mass_difference_drift(pair) <= 1e-12 * scale);

    // an ordered pair's distance IS the conserved mass gap: no strict decay
    CHECK(pair.l1_dist.front() == doctest::Approx(0.4).epsilon(1e-10));
    CHECK(pair.l1_dist.back() == doctest::Approx(0.4).epsilon(1e-8));
}

TEST_CASE("contraction holds for sign-changing pairs") {
    RunConfig cfg = pair_config();
    Field u0 = make_initial({InitialRecipe::Kind::gaussian, 0.5}, 1.0, cfg.grid);
    Field v0 = u0;
    Field dip = dipole_perturbation(cfg.grid, 0.5 * max_abs(u0), 0.4);
    for (std::int64_t i = 0; i < v0.size(); ++i) v0[i] += dip[i];

    RunPair pair = run_coupled(cfg, u0, v0);
    const double scale = integrate(u0) + integrate(v0);
    CHECK(max_contraction_increase(pair) <= 2.0 * pair.u.steps_taken * cfg.lin_tol * scale);
    // a sign-changing difference mixes and contracts strictly
    CHECK(pair.l1_dist.back() < 0.9 * pair.l1_dist.front());
}

TEST_CASE("dipole perturbations carry exactly zero mass") {
    const double lo[] = {-4.0}, hi[] = {4.0}, s[] = {0.05};
    Grid g = Grid::centered(1, lo, hi, s);
    Field d = dipole_perturbation(g, 0.7, 0.6);
    CHECK(integrate(d) == 0.0);
    CHECK(max_abs(d) <= 0.7 * (1.0 + 1e-12));
    CHECK(max_abs(d) >= 0.5 * 0.7);
    CHECK(negative_part_mass(d) > 0.0);
    // support confined to |x| <= 0.6
    CHECK(tail_mass(d, 0.6) == 0.0);

    const double lo2[] = {-2.0, -4.0}, hi2[] = {2.0, 4.0}, s2[] = {0.05, 0.05};
    Grid g2 = Grid::centered(2, lo2, hi2, s2);
    Field d2 = dipole_perturbation(g2, 0.7, 0.6);
    CHECK(std::abs(integrate(d2)) <= 1e-15 * negative_part_mass(d2));
    CHECK(tail_mass(d2, 1.0) == 0.0);
}

TEST_CASE("negative mass of dipole data shrinks with support width") {
    RunConfig base = pair_config();
    base.t_end = 0.5;
    base.init = {InitialRecipe::Kind::gaussian, 0.3};
    // dipoles wider than the hump: their tails dominate where the hump decays,
    // so the data genuinely go negative
    const double widths[] = {2.4, 1.6, 1.2};
    Field u0 = make_initial(base.init, base.mass, base.grid);
    auto probes = sign_experiment(base, 0.5 * max_abs(u0), widths);
    REQUIRE(probes.size() == 3);
    for (std::size_t i = 0; i < probes.size(); ++i) {
        CHECK(probes[i].width == widths[i]);
        CHECK(probes[i].initial_neg_mass > 0.0);
        CHECK(probes[i].neg_mass.size() == probes[i].t.size());
        // the negative part decays along each run
        CHECK(probes[i].neg_mass.back() < 0.7 * probes[i].initial_neg_mass);
    }
    // and the final negative mass decreases as the support shrinks
    CHECK(probes[1].neg_mass.back() < probes[0].neg_mass.back());
    CHECK(probes[2].neg_mass.back() < probes[1].neg_mass.back());
}

TEST_CASE("uniqueness experiment: different mollifiers converge together") {
    RunConfig base = pair_config();
    base.t_end = 0.5;
    const double widths[] = {0.8, 0.4, 0.2};
    auto rows = uniqueness_experiment(base, InitialRecipe::Kind::gaussian,
                                      InitialRecipe::Kind::box, widths);
    REQUIRE(rows.size() == 3);
    for (const auto& r : rows) {
        CHECK(r.initial_distance > 0.0);
        CHECK(r.final_distance < r.initial_distance);  // contraction at minimum
    }
    CHECK(rows[2].final_distance < rows[0].final_distance);
}

TEST_CASE("aitken extrapolation is exact on geometric tails") {
    std::vector<double> v;
    for (int k = 0; k < 6; ++k) v.push_back(3.0 + 5.0 * std::pow(0.4, k));
    CHECK(aitken_limit(v) == doctest::Approx(3.0).epsilon(1e-12));
    std::vector<double> flat{2.0, 2.0, 2.0};
    CHECK(aitken_limit(flat) == doctest::Approx(2.0).epsilon(1e-12));
    std::vector<double> short_v{1.0, 2.0};
    CHECK_THROWS_AS(aitken_limit(short_v), std::invalid_argument);
}

TEST_CASE("slab rearrangement preserves line integrals") {
    const double lo[] = {-2.0, -3.0}, hi[] = {2.0, 3.0}, s[] = {0.25, 0.25};
    Grid g = Grid::centered(2, lo, hi, s);
    Field f(g);
    for (std::int64_t i0 = 0; i0 < g.cells(0); ++i0)
        for (std::int64_t i1 = 0; i1 < g.cells(1); ++i1)
            f[f.index(i0, i1)] =
                std::exp(-g.center(0, i0)) * std::max(0.0, 1.0 - std::abs(g.center(1, i1)));

    Field slab = slab_data(f, 1.5);
    Field mf = marginal_xprime(f), ms = marginal_xprime(slab);
    for (std::int64_t i = 0; i < mf.size(); ++i)
        CHECK(ms[i] == doctest::Approx(mf[i]).epsilon(1e-12));
    // constant per line inside the slab, zero outside
    for (std::int64_t i0 = 0; i0 < g.cells(0); ++i0)
        for (std::int64_t i1 = 0; i1 < g.cells(1); ++i1) {
            double xn = g.center(1, i1);
            if (std::abs(xn) > 1.5)
                CHECK(slab[slab.index(i0, i1)] == 0.0);
        }
}

TEST_CASE("slab data and its source stay sandwiched under evolution") {
    RunConfig cfg;
    const double lo[] = {-8.0}, hi[] = {12.0}, s[] = {0.05};
    cfg.grid = Grid::centered(1, lo, hi, s);
    cfg.op = {OperatorKind::full_laplacian, 0.0};
    cfg.flux = {.q = 0.75, .eta = -1.0};
    cfg.t_end = 0.5;
    cfg.snapshot_times = {0.25, 0.5};

    const double r = 0.5;  // 2r = 1.0 = 20 cells
    Field u0 = make_initial({InitialRecipe::Kind::box, 0.8}, 1.0, cfg.grid);
    Field v0 = slab_data(u0, r);
    RunPair pair = run_coupled(cfg, u0, v0);
    CHECK(primitive_sandwich(pair, r) <= 1e-10);

    // misaligned slab radius is rejected
    CHECK_THROWS_AS(primitive_sandwich(pair, 0.513), std::invalid_argument);
}

TEST_CASE("tail report certifies the propagation bound") {
    RunConfig cfg;
    const double lo[] = {-10.0}, hi[] = {14.0}, s[] = {0.05};
    cfg.grid = Grid::centered(1, lo, hi, s);
    cfg.op = {OperatorKind::full_laplacian, 0.0};
    cfg.flux = {.q = 0.75, .eta = -1.0};
    cfg.init = {InitialRecipe::Kind::gaussian, 0.4};
    cfg.t_end = 1.0;
    cfg.tail_radii = {4.0, 6.0};
    Trajectory tr = run(cfg);

    const double radii[] = {2.0, 3.0};
    auto rows = tail_report(tr, radii);
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) {
        CHECK(r.fitted_c > 0.0);
        CHECK(r.fitted_c < 1.0);  // the bound holds with room to spare
        CHECK(r.worst_time <= 1.0 + 1e-12);
    }
    // radii without a recorded 2R series are rejected
    const double missing[] = {2.5};
    CHECK_THROWS_AS(tail_report(tr, missing), std::invalid_argument);
}

TEST_CASE("dissipation integral stays within the energy budget") {
    RunConfig cfg;
    const double lo[] = {-10.0}, hi[] = {14.0}, s[] = {0.05};
    cfg.grid = Grid::centered(1, lo, hi, s);
    cfg.op = {OperatorKind::full_laplacian, 0.0};
    cfg.flux = {.q = 0.75, .eta = -1.0};
    cfg.init = {InitialRecipe::Kind::gaussian, 0.4};
    cfg.t_end = 1.0;
    cfg.snapshot_times = {0.1, 1.0};
    Trajectory tr = run(cfg);

    EnergyCheck ec = energy_check(tr, 0.1);
    CHECK(ec.budget == doctest::Approx(0.5 * std::pow(lp_norm(tr.snapshot_at(0.1), 2.0), 2.0))
                           .epsilon(1e-12));
    CHECK(ec.integral > 0.0);
    CHECK(ec.integral <= ec.budget);
    CHECK(energy_integral(tr, 0.1, 0.5) < energy_integral(tr, 0.1, 1.0));
    // tau without a snapshot is rejected
    CHECK_THROWS_AS(energy_check(tr, 0.3), std::out_of_range);
}
