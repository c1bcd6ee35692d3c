#include "fastconv/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "fastconv/reduce.hpp"

namespace fastconv {

namespace {

constexpr double time_eps = 1e-12;

double l1_between(const Field& a, const Field& b) {
    const auto av = a.values();
    const auto bv = b.values();
    std::vector<double> contrib(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) contrib[i] = std::abs(av[i] - bv[i]);
    return pairwise_sum(contrib) * a.grid().cell_volume();
}

double positive_excess(const Field& a, const Field& b) {
    const auto av = a.values();
    const auto bv = b.values();
    std::vector<double> contrib(av.size());
    for (std::size_t i = 0; i < av.size(); ++i)
        contrib[i] = av[i] > bv[i] ? av[i] - bv[i] : 0.0;
    return pairwise_sum(contrib) * a.grid().cell_volume();
}

void record_pair(RunPair& pair, const RunConfig& cfg, const Field& u, const Field& v, double t,
                 double dt) {
    pair.t.push_back(t);
    pair.l1_dist.push_back(l1_between(u, v));
    pair.overtake.push_back(positive_excess(u, v));
    pair.mass_u.push_back(integrate(u));
    pair.mass_v.push_back(integrate(v));
    append_step_series(cfg, pair.u.series, u, t, dt);
    append_step_series(cfg, pair.v.series, v, t, dt);
}

double line_mass_outside(const Field& f, double r) {
    const Grid& g = f.grid();
    const int axn = g.axis_xn();
    std::vector<double> contrib;
    if (g.dim() == 1) {
        for (std::int64_t i = 0; i < g.cells(0); ++i)
            if (std::abs(g.center(0, i)) > r) contrib.push_back(std::abs(f[i]));
    } else {
        for (std::int64_t i0 = 0; i0 < g.cells(0); ++i0)
            for (std::int64_t i1 = 0; i1 < g.cells(1); ++i1)
                if (std::abs(g.center(axn, i1)) > r)
                    contrib.push_back(std::abs(f[f.index(i0, i1)]));
    }
    return pairwise_sum(contrib) * g.cell_volume();
}

}  // namespace

RunPair run_coupled(const RunConfig& cfg, const Field& u0, const Field& v0) {
    cfg.validate();
    if (!(u0.grid() == cfg.grid) || !(v0.grid() == cfg.grid))
        throw std::invalid_argument("run_coupled: initial states must live on the config grid");

    RunPair pair;
    pair.u.run_id = cfg.run_id + ".u";
    pair.v.run_id = cfg.run_id + ".v";
    pair.u.config = cfg;
    pair.v.config = cfg;

    Field u = u0;
    Field v = v0;
    u.ensure_finite("coupled initial state u");
    v.ensure_finite("coupled initial state v");
    double t = cfg.t_start;
    const double mass_scale = std::abs(cfg.mass);

    pair.u.snapshots.emplace_back(t, u);
    pair.v.snapshots.emplace_back(t, v);
    record_pair(pair, cfg, u, v, t, 0.0);

    std::vector<double> pending;
    for (double s : cfg.snapshot_times)
        if (s > t + time_eps) pending.push_back(s);
    std::size_t next_snap = 0;
    long steps = 0;

    while (t < cfg.t_end - time_eps) {
        const double next_event = next_snap < pending.size() ? pending[next_snap] : cfg.t_end;
        const double dt = std::min(cfl_dt(cfg, u, t, next_event), cfl_dt(cfg, v, t, next_event));
        u = step_imex(cfg, u, dt);
        v = step_imex(cfg, v, dt);
        t += dt;
        ++steps;

        const bool hit_event = std::abs(t - next_event) <= time_eps * std::max(1.0, t);
        if (hit_event) t = next_event;

        record_pair(pair, cfg, u, v, t, dt);

        const double leak = std::max(boundary_layer_mass(u), boundary_layer_mass(v));
        if (leak > cfg.boundary_leak_tol * mass_scale) {
            std::ostringstream os;
            os << "run " << cfg.run_id << ": boundary layer holds " << leak << " (> "
               << cfg.boundary_leak_tol << " * " << mass_scale << ") at t = " << t
               << "; domain too small";
            throw std::runtime_error(os.str());
        }

        if (hit_event && next_snap < pending.size()) {
            pair.u.snapshots.emplace_back(t, u);
            pair.v.snapshots.emplace_back(t, v);
            ++next_snap;
        }
    }

    if (pair.u.snapshots.empty() ||
        std::abs(pair.u.snapshots.back().first - cfg.t_end) > time_eps) {
        if (t >= cfg.t_end - time_eps && cfg.t_end > cfg.t_start + time_eps) {
            pair.u.snapshots.emplace_back(cfg.t_end, u);
            pair.v.snapshots.emplace_back(cfg.t_end, v);
        }
    }
    pair.u.steps_taken = steps;
    pair.v.steps_taken = steps;
    return pair;
}

double max_contraction_increase(const RunPair& pair) {
    double worst = -std::numeric_limits<double>::infinity();
    if (pair.l1_dist.size() < 2) return 0.0;
    for (std::size_t i = 0; i + 1 < pair.l1_dist.size(); ++i)
        worst = std::max(worst, pair.l1_dist[i + 1] - pair.l1_dist[i]);
    return worst;
}

double comparison_violation(const RunPair& pair) {
    if (pair.overtake.empty()) throw std::invalid_argument("comparison: empty pair");
    if (pair.overtake.front() > 0.0)
        throw std::invalid_argument(
            "comparison: initial states are not ordered (u0 <= v0 required)");
    return *std::max_element(pair.overtake.begin(), pair.overtake.end());
}

double mass_difference_drift(const RunPair& pair) {
    if (pair.mass_u.empty()) return 0.0;
    const double d0 = pair.mass_u.front() - pair.mass_v.front();
    double worst = 0.0;
    for (std::size_t i = 0; i < pair.mass_u.size(); ++i)
        worst = std::max(worst, std::abs(pair.mass_u[i] - pair.mass_v[i] - d0));
    return worst;
}

Field dipole_perturbation(const Grid& g, double amplitude, double h) {
    const int axn = g.axis_xn();
    if (!(h > 0.0)) throw std::invalid_argument("dipole: width must be positive");
    if (h < 4.0 * g.spacing(axn))
        throw std::invalid_argument("dipole: width below 4 dx is unresolvable");
    if (h > std::min(-g.lo(axn), g.hi(axn)))
        throw std::invalid_argument("dipole: support leaves the domain");
    auto lobe = [&](double x) {
        if (std::abs(x) >= h) return 0.0;
        const double c = std::cos(0.5 * std::numbers::pi * x / h);
        return std::sin(std::numbers::pi * x / h) * c * c;
    };
    Field out(g, 0.0);
    if (g.dim() == 1) {
        for (std::int64_t i = 0; i < g.cells(0); ++i)
            out[i] = amplitude * lobe(g.center(0, i));
    } else {
        if (h > std::min(-g.lo(0), g.hi(0)))
            throw std::invalid_argument("dipole: support leaves the domain");
        for (std::int64_t i0 = 0; i0 < g.cells(0); ++i0) {
            const double x0 = g.center(0, i0);
            double w = 0.0;
            if (std::abs(x0) < h) {
                const double c = std::cos(0.5 * std::numbers::pi * x0 / h);
                w = c * c;
            }
            if (w == 0.0) continue;
            for (std::int64_t i1 = 0; i1 < g.cells(1); ++i1)
                out[out.index(i0, i1)] = amplitude * w * lobe(g.center(1, i1));
        }
    }
    const double mass = std::abs(integrate(out));
    const double scale = lp_norm(out, 1.0);
    if (!(scale > 0.0)) throw std::invalid_argument("dipole: perturbation vanished on this grid");
    if (mass > 1e-12 * scale)
        throw std::invalid_argument("dipole: sampled perturbation mass exceeds 1e-12");
    return out;
}

std::vector<SignProbe> sign_experiment(const RunConfig& base, double amplitude,
                                       std::span<const double> widths) {
    base.validate();
    if (widths.empty()) throw std::invalid_argument("sign experiment: no widths given");
    const Field hump = make_initial(base.init, base.mass, base.grid);

    std::vector<SignProbe> probes;
    probes.reserve(widths.size());
    for (double h : widths) {
        const Field pert = dipole_perturbation(base.grid, amplitude, h);
        Field u0 = hump;
        {
            auto uv = u0.values();
            const auto pv = pert.values();
            for (std::size_t i = 0; i < uv.size(); ++i) uv[i] += pv[i];
        }
        Trajectory traj = run_from(base, u0, base.t_start);
        SignProbe probe;
        probe.width = h;
        probe.initial_neg_mass = negative_part_mass(u0);
        probe.t = traj.series.t;
        probe.neg_mass = traj.series.neg_mass;
        probes.push_back(std::move(probe));
    }
    return probes;
}

std::vector<UniquenessRow> uniqueness_experiment(const RunConfig& base, InitialRecipe::Kind a,
                                                 InitialRecipe::Kind b,
                                                 std::span<const double> widths) {
    base.validate();
    if (widths.empty()) throw std::invalid_argument("uniqueness experiment: no widths given");
    std::vector<UniquenessRow> rows;
    rows.reserve(widths.size());
    for (double h : widths) {
        const Field u0 = make_initial({a, h}, base.mass, base.grid);
        const Field v0 = make_initial({b, h}, base.mass, base.grid);
        const RunPair pair = run_coupled(base, u0, v0);
        rows.push_back({h, pair.l1_dist.front(), pair.l1_dist.back()});
    }
    return rows;
}

double aitken_limit(std::span<const double> v) {
    if (v.size() < 3) throw std::invalid_argument("aitken: need at least three entries");
    const double a = v[v.size() - 3];
    const double b = v[v.size() - 2];
    const double c = v[v.size() - 1];
    const double den = (c - b) - (b - a);
    if (std::abs(den) < 1e-300) return c;
    return c - (c - b) * (c - b) / den;
}

std::vector<TailRow> tail_report(const Trajectory& traj, std::span<const double> radii) {
    const RunConfig& cfg = traj.config;
    const StepSeries& s = traj.series;
    if (s.t.empty()) throw std::invalid_argument("tail report: empty series");
    double a_sup = 0.0;
    for (double m : s.l1) a_sup = std::max(a_sup, m);
    const double q = cfg.flux.q;
    const double exp2 = 1.0 - cfg.grid.dim() * (q - 1.0);
    const double t0 = s.t.front();

    std::vector<TailRow> rows;
    for (double r : radii) {
        if (!(r > 0.0)) throw std::invalid_argument("tail report: radius must be positive");
        std::size_t idx = s.tail.size();
        for (std::size_t j = 0; j < cfg.tail_radii.size(); ++j)
            if (std::abs(cfg.tail_radii[j] - 2.0 * r) <= 1e-9 * std::max(1.0, 2.0 * r)) idx = j;
        if (idx == s.tail.size())
            throw std::invalid_argument(
                "tail report: trajectory did not record the tail at radius 2R");
        const double tail0 = s.tail[idx].front();
        TailRow row{r, 0.0, t0};
        for (std::size_t i = 1; i < s.t.size(); ++i) {
            const double elapsed = s.t[i] - t0;
            if (!(elapsed > 0.0)) continue;
            const double bound =
                a_sup * (elapsed / (r * r) + elapsed / std::pow(r, exp2)) + tail0;
            const double ratio = s.tail[idx][i] / bound;
            if (ratio > row.fitted_c) {
                row.fitted_c = ratio;
                row.worst_time = s.t[i];
            }
        }
        rows.push_back(row);
    }
    return rows;
}

Field slab_data(const Field& f, double r) {
    const Grid& g = f.grid();
    const int axn = g.axis_xn();
    const double h = g.spacing(axn);
    if (!(r > 0.0)) throw std::invalid_argument("slab: r must be positive");

    std::vector<std::int64_t> inside;
    for (std::int64_t i = 0; i < g.cells(axn); ++i)
        if (std::abs(g.center(axn, i)) <= r - 0.5 * h + 1e-12 * h) inside.push_back(i);
    if (inside.empty())
        throw std::invalid_argument("slab: no cell lies fully inside |x_N| <= r");

    Field out(g, 0.0);
    const auto occupied = static_cast<double>(inside.size()) * h;
    if (g.dim() == 1) {
        std::vector<double> line(f.values().begin(), f.values().end());
        const double mass = pairwise_sum(line) * h;
        for (std::int64_t i : inside) out[i] = mass / occupied;
    } else {
        const std::int64_t n1 = g.cells(1);
        std::vector<double> line(static_cast<std::size_t>(n1));
        for (std::int64_t i0 = 0; i0 < g.cells(0); ++i0) {
            for (std::int64_t i1 = 0; i1 < n1; ++i1)
                line[static_cast<std::size_t>(i1)] = f[f.index(i0, i1)];
            const double mass = pairwise_sum(line) * h;
            for (std::int64_t i : inside) out[out.index(i0, i)] = mass / occupied;
        }
    }
    return out;
}

double primitive_sandwich(const RunPair& pair, double r) {
    const Grid& g = pair.u.config.grid;
    const int axn = g.axis_xn();
    const double h = g.spacing(axn);
    const auto shift = static_cast<std::int64_t>(std::llround(2.0 * r / h));
    if (std::abs(static_cast<double>(shift) * h - 2.0 * r) > 1e-9 * h)
        throw std::invalid_argument("sandwich: 2r must be an integer number of cells");
    if (pair.u.snapshots.size() != pair.v.snapshots.size())
        throw std::invalid_argument("sandwich: snapshot schedules differ");

    const double m = std::max(lp_norm(pair.u.snapshots.front().second, 1.0), 1e-300);
    for (const Field* f0 : {&pair.u.snapshots.front().second, &pair.v.snapshots.front().second})
        if (line_mass_outside(*f0, r + 1e-12 * std::max(1.0, r)) > 1e-12 * m)
            throw std::invalid_argument("sandwich: initial data not supported in |x_N| <= r");

    double viol = 0.0;
    for (std::size_t s = 0; s < pair.u.snapshots.size(); ++s) {
        if (std::abs(pair.u.snapshots[s].first - pair.v.snapshots[s].first) > time_eps)
            throw std::invalid_argument("sandwich: snapshot times differ");
        const Field pu = primitive_xn(pair.u.snapshots[s].second);
        const Field pv = primitive_xn(pair.v.snapshots[s].second);
        const std::int64_t lines = g.dim() == 1 ? 1 : g.cells(0);
        const std::int64_t len = g.cells(axn);
        for (std::int64_t l = 0; l < lines; ++l) {
            const std::int64_t base = g.dim() == 1 ? 0 : l * g.cells(1);
            const double total = pu[base + len - 1];
            for (std::int64_t i = 0; i < len; ++i) {
                const double below = i - shift >= 0 ? pu[base + i - shift] : 0.0;
                const double above = i + shift < len ? pu[base + i + shift] : total;
                viol = std::max(viol, below - pv[base + i]);
                viol = std::max(viol, pv[base + i] - above);
            }
        }
    }
    return viol;
}

double energy_integral(const Trajectory& traj, double tau, double t_hi) {
    const EnergySeries& e = traj.energy;
    std::vector<double> terms;
    for (std::size_t i = 0; i < e.t_after.size(); ++i)
        if (e.t_after[i] > tau + time_eps && e.t_after[i] <= t_hi + time_eps)
            terms.push_back(e.dt[i] * e.grad_energy[i]);
    return pairwise_sum(terms);
}

EnergyCheck energy_check(const Trajectory& traj, double tau) {
    EnergyCheck c;
    c.integral = energy_integral(traj, tau, traj.config.t_end);
    const Field& u_tau = traj.snapshot_at(tau);
    const double l2 = lp_norm(u_tau, 2.0);
    c.budget = 0.5 * l2 * l2;
    const double q = traj.config.flux.q;
    const double n = traj.config.grid.dim();
    const double m = std::abs(traj.config.mass);
    c.fitted_const =
        c.integral / (std::pow(tau, -(n + 1.0) / (2.0 * q)) * std::pow(m, 1.0 / q));
    return c;
}

}  // namespace fastconv
