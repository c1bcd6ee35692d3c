#include "fastconv/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "fastconv/kernels.hpp"
#include "fastconv/reduce.hpp"

namespace fastconv {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

constexpr double time_eps = 1e-12;

}  // namespace

std::string InitialRecipe::name() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::gaussian: os << "gaussian(" << param << ")"; break;
        case Kind::box: os << "box(" << param << ")"; break;
        case Kind::bump: os << "bump(" << param << ")"; break;
        case Kind::heat_kernel: os << "heat_kernel(" << param << ")"; break;
    }
    return os.str();
}

void RunConfig::validate() const {
    grid.validate_for_run();
    op.validate();
    FluxParams eff = flux;
    eff.eta = effective_eta();
    if (convection) fastconv::validate(eff, grid.dim());
    if (!(mass != 0.0) || !std::isfinite(mass)) fail("run: mass must be nonzero and finite");
    if (!(t_start >= 0.0)) fail("run: t_start must be >= 0");
    if (!(t_end >= t_start)) fail("run: t_end must be >= t_start");
    if (!(cfl > 0.0 && cfl <= 1.0)) fail("run: cfl must be in (0, 1]");
    if (!(theta >= 0.5 && theta <= 1.0)) fail("run: theta must be in [1/2, 1]");
    if (!(lin_tol > 0.0)) fail("run: lin_tol must be positive");
    if (lin_max_iter < 1) fail("run: lin_max_iter must be >= 1");
    if (series_stride < 1) fail("run: series_stride must be >= 1");
    if (!(boundary_leak_tol > 0.0)) fail("run: boundary_leak_tol must be positive");
    for (std::size_t i = 0; i + 1 < snapshot_times.size(); ++i)
        if (!(snapshot_times[i] < snapshot_times[i + 1]))
            fail("run: snapshot times must be strictly increasing");
    for (double s : snapshot_times)
        if (s < t_start - time_eps || s > t_end + time_eps)
            fail("run: snapshot time outside [t_start, t_end]");
    if (audit_window) {
        if (!(audit_window->first < audit_window->second))
            fail("run: audit window must have positive length");
    }
}

double RunConfig::effective_eta() const {
    if (flux.eta >= 0.0) return flux.eta;
    const double h = grid.spacing(grid.axis_xn());
    return h * h;
}

const Field& Trajectory::snapshot_at(double t) const {
    for (const auto& [ts, f] : snapshots)
        if (std::abs(ts - t) <= time_eps * std::max(1.0, std::abs(t))) return f;
    std::ostringstream os;
    os << "trajectory " << run_id << ": no snapshot at t = " << t;
    throw std::out_of_range(os.str());
}

// ---- initial data ----------------------------------------------------------

Field make_initial(const InitialRecipe& recipe, double mass, const Grid& g) {
    const int dim = g.dim();
    const double h = recipe.param;
    if (!(h > 0.0)) fail("make_initial: width parameter must be positive");

    // Resolvability: the support scale must span at least two cells per axis.
    const double width = recipe.kind == InitialRecipe::Kind::heat_kernel ? 2.0 * std::sqrt(h) : h;
    for (int a = 0; a < dim; ++a)
        if (width < 2.0 * g.spacing(a)) {
            std::ostringstream os;
            os << "make_initial: " << recipe.name() << " width " << width
               << " is below 2 dx = " << 2.0 * g.spacing(a) << " on axis " << a
               << " (unresolvable)";
            fail(os.str());
        }

    Field f(g);
    auto sample = [&](std::span<const double> x) -> double {
        switch (recipe.kind) {
            case InitialRecipe::Kind::gaussian: {
                double v = 1.0;
                for (int a = 0; a < dim; ++a)
                    v *= std::exp(-(x[a] * x[a]) / (h * h)) / (h * std::sqrt(std::numbers::pi));
                return v;
            }
            case InitialRecipe::Kind::box: {
                for (int a = 0; a < dim; ++a)
                    if (std::abs(x[a]) >= 0.5 * h) return 0.0;
                return 1.0;
            }
            case InitialRecipe::Kind::bump: {
                double r2 = 0.0;
                for (int a = 0; a < dim; ++a) r2 += x[a] * x[a];
                const double s2 = r2 / (h * h);
                if (s2 >= 1.0) return 0.0;
                return std::exp(-1.0 / (1.0 - s2));
            }
            case InitialRecipe::Kind::heat_kernel:
                return heat_kernel(dim, h, x);
        }
        return 0.0;
    };

    if (dim == 1) {
        for (std::int64_t i = 0; i < g.cells(0); ++i) {
            const double x = g.center(0, i);
            f[i] = sample(std::span<const double>(&x, 1));
        }
    } else {
        for (std::int64_t i0 = 0; i0 < g.cells(0); ++i0) {
            for (std::int64_t i1 = 0; i1 < g.cells(1); ++i1) {
                const double x[2] = {g.center(0, i0), g.center(1, i1)};
                f[i0 * g.cells(1) + i1] = sample(std::span<const double>(x, 2));
            }
        }
    }

    const double raw = integrate(f);
    if (!(raw > 0.0) || !std::isfinite(raw))
        fail("make_initial: " + recipe.name() + " has no mass on this grid");
    const double scale = mass / raw;
    for (auto& v : f.values()) v *= scale;

    const double edge = boundary_layer_mass(f);
    if (edge > 1e-6 * std::abs(mass)) {
        std::ostringstream os;
        os << "make_initial: " << recipe.name() << " leaves " << edge / std::abs(mass)
           << " of the mass in the boundary layer (domain too small)";
        fail(os.str());
    }
    return f;
}

// ---- stepping --------------------------------------------------------------

double cfl_dt(const RunConfig& cfg, const Field& u, double t, double next_event) {
    double dt = std::numeric_limits<double>::infinity();
    if (cfg.convection) {
        FluxParams p = cfg.flux;
        p.eta = cfg.effective_eta();
        const double L = lipschitz_bound(p, max_abs(u));
        if (L > 0.0) dt = cfg.cfl * cfg.grid.spacing(cfg.grid.axis_xn()) / L;
    }
    if (cfg.dt_max > 0.0) dt = std::min(dt, cfg.dt_max);
    if (cfg.dt_rel > 0.0) dt = std::min(dt, cfg.dt_rel * (t + cfg.dt_rel_offset));
    if (std::isinf(dt))
        fail("cfl_dt: no step bound applies (convection off or L = 0); set dt_max");
    const double gap = next_event - t;
    if (gap <= 0.0) fail("cfl_dt: called at or past the next event time");
    // Land exactly on the event; absorb a trailing sliver into this step.
    if (dt >= gap * (1.0 - 1e-9)) dt = gap;
    return dt;
}

Field implicit_diffusion(const RunConfig& cfg, const Field& f, double dt, SolveStats* stats) {
    return diffuse_backward(cfg.op, f, dt, cfg.theta, cfg.lin_tol, cfg.lin_max_iter, stats);
}

Field step_imex(const RunConfig& cfg, const Field& f, double dt, SolveStats* stats) {
    if (!(dt > 0.0)) fail("step_imex: dt must be positive");
    Field staged = f;
    if (cfg.convection) {
        FluxParams p = cfg.flux;
        p.eta = cfg.effective_eta();
        const Field div = convection_divergence(p, f);
        for (std::int64_t i = 0; i < f.size(); ++i) staged[i] = f[i] - dt * div[i];
    }
    Field next = diffuse_backward(cfg.op, staged, dt, cfg.theta, cfg.lin_tol, cfg.lin_max_iter,
                                  stats);
    next.ensure_finite("step_imex");
    return next;
}

void append_step_series(const RunConfig& cfg, StepSeries& s, const Field& u, double t, double dt) {
    s.t.push_back(t);
    s.dt.push_back(dt);
    s.mass.push_back(integrate(u));
    s.l1.push_back(lp_norm(u, 1.0));
    s.l2.push_back(lp_norm(u, 2.0));
    s.linf.push_back(lp_norm(u, std::numeric_limits<double>::infinity()));
    s.min_v.push_back(min_value(u));
    s.max_v.push_back(max_value(u));
    s.neg_mass.push_back(negative_part_mass(u));
    s.boundary_mass.push_back(boundary_layer_mass(u));
    if (s.tail.size() != cfg.tail_radii.size()) s.tail.resize(cfg.tail_radii.size());
    for (std::size_t r = 0; r < cfg.tail_radii.size(); ++r)
        s.tail[r].push_back(tail_mass(u, cfg.tail_radii[r]));
}

namespace {

bool in_window(const RunConfig& cfg, double t) {
    return cfg.audit_window && t >= cfg.audit_window->first - time_eps &&
           t <= cfg.audit_window->second + time_eps;
}

}  // namespace

Trajectory run_from(const RunConfig& cfg, const Field& u0, double t0) {
    cfg.validate();
    if (!(u0.grid() == cfg.grid)) fail("run: initial state grid mismatch");
    if (t0 < cfg.t_start - time_eps || t0 > cfg.t_end + time_eps)
        fail("run: start time outside [t_start, t_end]");

    Trajectory traj;
    traj.run_id = cfg.run_id;
    traj.config = cfg;

    Field u = u0;
    u.ensure_finite("initial state");
    double t = t0;
    const double mass_scale = std::abs(cfg.mass);

    traj.snapshots.emplace_back(t, u);
    append_step_series(cfg, traj.series, u, t, 0.0);
    if (in_window(cfg, t)) {
        traj.window.t.push_back(t);
        traj.window.state.push_back(u);
        traj.window.dt_used.push_back(0.0);
    }

    // Pending snapshot times strictly after t0.
    std::vector<double> pending;
    for (double s : cfg.snapshot_times)
        if (s > t0 + time_eps) pending.push_back(s);
    std::size_t next_snap = 0;
    // Event-relative so a run resumed from a snapshot checkpoint emits the
    // same series rows as an uninterrupted one.
    long steps_since_event = 0;

    while (t < cfg.t_end - time_eps) {
        const double next_event = next_snap < pending.size() ? pending[next_snap] : cfg.t_end;
        const double dt = cfl_dt(cfg, u, t, next_event);
        u = step_imex(cfg, u, dt);
        t += dt;
        ++traj.steps_taken;
        ++steps_since_event;

        const bool hit_event = std::abs(t - next_event) <= time_eps * std::max(1.0, t);
        if (hit_event) t = next_event;

        traj.energy.t_after.push_back(t);
        traj.energy.dt.push_back(dt);
        traj.energy.grad_energy.push_back(gradient_energy(cfg.op, u));

        if (steps_since_event % cfg.series_stride == 0 || hit_event)
            append_step_series(cfg, traj.series, u, t, dt);
        if (hit_event) steps_since_event = 0;

        if (in_window(cfg, t)) {
            traj.window.t.push_back(t);
            traj.window.state.push_back(u);
            traj.window.dt_used.push_back(dt);
        }

        const double leak = boundary_layer_mass(u);
        if (leak > cfg.boundary_leak_tol * mass_scale) {
            std::ostringstream os;
            os << "run " << cfg.run_id << ": boundary layer holds " << leak
               << " (> " << cfg.boundary_leak_tol << " * " << mass_scale
               << ") at t = " << t << "; domain too small";
            throw std::runtime_error(os.str());
        }

        if (hit_event && next_snap < pending.size()) {
            traj.snapshots.emplace_back(t, u);
            ++next_snap;
        }
    }

    if (traj.snapshots.empty() || std::abs(traj.snapshots.back().first - cfg.t_end) > time_eps)
        if (t >= cfg.t_end - time_eps && cfg.t_end > t0 + time_eps)
            traj.snapshots.emplace_back(cfg.t_end, u);

    return traj;
}

Trajectory run(const RunConfig& cfg) {
    cfg.validate();
    Field u0 = make_initial(cfg.init, cfg.mass, cfg.grid);
    return run_from(cfg, u0, cfg.t_start);
}

}  // namespace fastconv
