#include "fastconv/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fastconv/flux.hpp"
#include "fastconv/operators.hpp"
#include "fastconv/reduce.hpp"

namespace fastconv {

namespace {

double bump01(double s) {
    if (std::abs(s) >= 1.0) return 0.0;
    const double c = std::cos(0.5 * std::numbers::pi * s);
    return c * c;
}

struct LineLayout {
    std::int64_t lines;
    std::int64_t line_stride;
    std::int64_t len;
};

LineLayout xn_lines(const Grid& g) {
    if (g.dim() == 1) return {1, 0, g.cells(0)};
    return {g.cells(0), g.cells(1), g.cells(1)};
}

/// Monotone entropy flux paired with the scheme's interface flux.
double entropy_flux(const FluxParams& fp, double a, double b, double k) {
    return numerical_flux(fp, std::max(a, k), std::max(b, k)) -
           numerical_flux(fp, std::min(a, k), std::min(b, k));
}

FluxParams effective_flux(const RunConfig& cfg) {
    FluxParams fp = cfg.flux;
    fp.eta = cfg.effective_eta();
    return fp;
}

void check_pair(const Trajectory& traj, std::size_t j) {
    const DenseWindow& w = traj.window;
    const double dt = w.dt_used[j + 1];
    if (!(dt > 0.0) || std::abs(w.t[j] + dt - w.t[j + 1]) > 1e-9 * std::max(1.0, w.t[j + 1]))
        throw std::logic_error("entropy audit: window entries are not consecutive steps");
}

void require_window(const DenseWindow& w) {
    if (w.state.size() < 2)
        throw std::invalid_argument(
            "entropy audit: trajectory has no dense window (configure an audit window)");
}

/// g = |u0 - k| - lam (Q_right - Q_left), the post-convection Kato bound.
Field convected_distance(const RunConfig& cfg, const FluxParams& fp, const Field& u0, double lam,
                         double k) {
    const Grid& g = u0.grid();
    const auto a0 = u0.values();
    Field gv(g, 0.0);
    auto gvv = gv.values();
    for (std::size_t i = 0; i < a0.size(); ++i) gvv[i] = std::abs(a0[i] - k);
    if (cfg.convection) {
        const LineLayout ll = xn_lines(g);
        for (std::int64_t l = 0; l < ll.lines; ++l) {
            const std::size_t base = static_cast<std::size_t>(l * ll.line_stride);
            double q_left = 0.0;  // zero-flux closure
            for (std::int64_t i = 0; i < ll.len; ++i) {
                const std::size_t c = base + static_cast<std::size_t>(i);
                const double q_right =
                    (i + 1 < ll.len) ? entropy_flux(fp, a0[c], a0[c + 1], k) : 0.0;
                gvv[c] -= lam * (q_right - q_left);
                q_left = q_right;
            }
        }
    }
    return gv;
}

}  // namespace

double TestBump::value(const Grid& g, std::int64_t i0, std::int64_t i1, double t) const {
    double v = amplitude * bump01((t - t_center) / t_radius);
    if (v == 0.0) return 0.0;
    const std::int64_t idx[2] = {i0, i1};
    for (int a = 0; a < g.dim(); ++a) {
        const auto ax = static_cast<std::size_t>(a);
        v *= bump01((g.center(a, idx[ax]) - center[ax]) / radius[ax]);
        if (v == 0.0) return 0.0;
    }
    return v;
}

Field TestBump::sample(const Grid& g, double t) const {
    Field out(g, 0.0);
    auto v = out.values();
    if (g.dim() == 1) {
        for (std::int64_t i = 0; i < g.cells(0); ++i)
            v[static_cast<std::size_t>(i)] = value(g, i, 0, t);
    } else {
        for (std::int64_t i0 = 0; i0 < g.cells(0); ++i0)
            for (std::int64_t i1 = 0; i1 < g.cells(1); ++i1)
                v[static_cast<std::size_t>(out.index(i0, i1))] = value(g, i0, i1, t);
    }
    return out;
}

bool TestBump::supported_inside(const Grid& g) const {
    for (int a = 0; a < g.dim(); ++a) {
        const auto ax = static_cast<std::size_t>(a);
        if (!(radius[ax] > 0.0)) return false;
        const double margin = 1.5 * g.spacing(a);
        if (center[ax] - radius[ax] < g.lo(a) + margin) return false;
        if (center[ax] + radius[ax] > g.hi(a) - margin) return false;
    }
    return t_radius > 0.0;
}

Field entropy_production(const RunConfig& cfg, const Field& u0, const Field& u1, double dt,
                         double k) {
    const Grid& g = u0.grid();
    if (!(u1.grid() == g)) throw std::invalid_argument("entropy_production: grid mismatch");
    const FluxParams fp = effective_flux(cfg);
    const double lam = dt / g.spacing(g.axis_xn());

    const auto a1 = u1.values();
    const std::size_t n = a1.size();

    Field w1(g, 0.0);
    {
        auto w1v = w1.values();
        for (std::size_t i = 0; i < n; ++i) w1v[i] = std::abs(a1[i] - k);
    }
    const Field gv = convected_distance(cfg, fp, u0, lam, k);

    Field aw1(g, 0.0), agv(g, 0.0);
    apply_operator(cfg.op, w1, aw1);
    apply_operator(cfg.op, gv, agv);

    Field e(g, 0.0);
    {
        auto ev = e.values();
        const auto w1v = w1.values();
        const auto gvv = gv.values();
        const auto aw = aw1.values();
        const auto ag = agv.values();
        const double th = cfg.theta;
        for (std::size_t i = 0; i < n; ++i)
            ev[i] = w1v[i] - gvv[i] + th * dt * aw[i] + (1.0 - th) * dt * ag[i];
    }
    return e;
}

double cell_entropy_check(const Trajectory& traj, double k) {
    const DenseWindow& w = traj.window;
    require_window(w);
    const Grid& g = w.state.front().grid();
    const LineLayout ll = xn_lines(g);

    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j + 1 < w.state.size(); ++j) {
        check_pair(traj, j);
        const Field e = entropy_production(traj.config, w.state[j], w.state[j + 1],
                                           w.dt_used[j + 1], k);
        const auto ev = e.values();
        for (std::int64_t l = 0; l < ll.lines; ++l) {
            const std::size_t base = static_cast<std::size_t>(l * ll.line_stride);
            for (std::int64_t i = 1; i + 1 < ll.len; ++i)
                worst = std::min(worst, -ev[base + static_cast<std::size_t>(i)]);
        }
    }
    return worst;
}

double kruzhkov_residual(const Trajectory& traj, double k, const TestBump& phi) {
    const DenseWindow& w = traj.window;
    require_window(w);
    const RunConfig& cfg = traj.config;
    const Grid& g = w.state.front().grid();
    if (!phi.supported_inside(g))
        throw std::invalid_argument("entropy audit: test bump support reaches the boundary layer");
    const FluxParams fp = effective_flux(cfg);
    const int axis = g.axis_xn();
    const double vol = g.cell_volume();
    const std::size_t n = static_cast<std::size_t>(g.cell_count());
    const LineLayout ll = xn_lines(g);

    std::vector<double> terms;
    std::vector<double> cellbuf(n);
    std::vector<double> facebuf;

    Field phi_prev = phi.sample(g, w.t.front());
    for (std::size_t j = 0; j + 1 < w.state.size(); ++j) {
        check_pair(traj, j);
        const double dt = w.dt_used[j + 1];
        const double lam = dt / g.spacing(axis);
        const Field phi_next = phi.sample(g, w.t[j + 1]);
        const auto pp = phi_prev.values();
        const auto pn = phi_next.values();
        const auto a0 = w.state[j].values();
        const auto a1 = w.state[j + 1].values();

        // time part of -phi E: sum_i |u0 - k| (phi_next - phi_prev)
        for (std::size_t i = 0; i < n; ++i)
            cellbuf[i] = std::abs(a0[i] - k) * (pn[i] - pp[i]);
        terms.push_back(pairwise_sum(cellbuf));

        if (cfg.convection) {
            // flux part: lam sum_faces Q (phi_next_right - phi_next_left)
            facebuf.clear();
            for (std::int64_t l = 0; l < ll.lines; ++l) {
                const std::size_t base = static_cast<std::size_t>(l * ll.line_stride);
                for (std::int64_t i = 0; i + 1 < ll.len; ++i) {
                    const std::size_t c = base + static_cast<std::size_t>(i);
                    facebuf.push_back(lam * entropy_flux(fp, a0[c], a0[c + 1], k) *
                                      (pn[c + 1] - pn[c]));
                }
            }
            terms.push_back(pairwise_sum(facebuf));
        }

        if (!cfg.op.is_zero(g.dim())) {
            Field aphi(g, 0.0);
            apply_operator(cfg.op, phi_next, aphi);
            const auto ap = aphi.values();
            const Field gv = convected_distance(cfg, fp, w.state[j], lam, k);
            const auto gvv = gv.values();
            for (std::size_t i = 0; i < n; ++i)
                cellbuf[i] = -dt *
                             (cfg.theta * std::abs(a1[i] - k) + (1.0 - cfg.theta) * gvv[i]) *
                             ap[i];
            terms.push_back(pairwise_sum(cellbuf));
        }

        phi_prev = phi_next;
    }

    // endpoint terms: phi^0 |u^0 - k| - phi^M |u^M - k|
    {
        const Field phi0 = phi.sample(g, w.t.front());
        const auto p0 = phi0.values();
        const auto pm = phi_prev.values();
        const auto am = w.state.back().values();
        const auto az = w.state.front().values();
        for (std::size_t i = 0; i < n; ++i)
            cellbuf[i] = p0[i] * std::abs(az[i] - k) - pm[i] * std::abs(am[i] - k);
        terms.push_back(pairwise_sum(cellbuf));
    }

    return vol * pairwise_sum(terms);
}

DenseWindow reverse_window(const DenseWindow& w) {
    DenseWindow rev;
    const std::size_t m = w.t.size();
    rev.t.resize(m);
    rev.state.resize(m);
    rev.dt_used.resize(m);
    if (m == 0) return rev;
    const double t0 = w.t.front(), t1 = w.t.back();
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t src = m - 1 - j;
        rev.t[j] = t0 + (t1 - w.t[src]);
        rev.state[j] = w.state[src];
        // Step that separates reversed entries j-1 and j is the one that
        // separated the original entries src and src+1.
        rev.dt_used[j] = j == 0 ? 0.0 : w.dt_used[m - j];
    }
    return rev;
}

std::vector<double> kruzhkov_levels(const DenseWindow& window, int count) {
    if (window.state.empty())
        throw std::invalid_argument("entropy audit: dense window is empty");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const Field& f : window.state) {
        lo = std::min(lo, min_value(f));
        hi = std::max(hi, max_value(f));
    }
    std::vector<double> levels{0.0};
    if (count > 0 && hi > lo) {
        for (int j = 0; j < count; ++j)
            levels.push_back(lo + (j + 0.5) * (hi - lo) / count);
    }
    return levels;
}

std::vector<TestBump> default_test_bumps(const Grid& g, double t0, double t1, int count) {
    if (count < 1) throw std::invalid_argument("default_test_bumps: count must be positive");
    const double tc = 0.5 * (t0 + t1);
    const double th = 0.5 * (t1 - t0);
    std::array<double, max_dim> mid{0.0, 0.0};
    std::array<double, max_dim> ext{1.0, 1.0};
    for (int a = 0; a < g.dim(); ++a) {
        const auto ax = static_cast<std::size_t>(a);
        mid[ax] = 0.5 * (g.lo(a) + g.hi(a));
        ext[ax] = g.hi(a) - g.lo(a);
    }
    const auto axn = static_cast<std::size_t>(g.dim() - 1);

    std::vector<TestBump> bumps;
    bumps.reserve(static_cast<std::size_t>(count));
    for (int j = 0; j < count; ++j) {
        TestBump b;
        // centers sweep the convection axis; widths and time windows alternate
        const double frac = count > 1 ? static_cast<double>(j) / (count - 1) : 0.5;
        const bool wide = j % 2 == 0;
        for (int a = 0; a < g.dim(); ++a) {
            const auto ax = static_cast<std::size_t>(a);
            b.center[ax] = mid[ax];
            b.radius[ax] = (wide ? 0.30 : 0.18) * ext[ax];
        }
        b.center[axn] = mid[axn] + (frac - 0.5) * 0.25 * ext[axn];
        if (g.dim() == 2 && j % 4 >= 2) b.center[0] = mid[0] + 0.08 * ext[0];
        switch (j % 3) {
            case 0:  // covers the whole window, positive at the endpoints
                b.t_center = tc;
                b.t_radius = 1.5 * th;
                break;
            case 1:  // interior, vanishes before the endpoints
                b.t_center = tc;
                b.t_radius = 0.9 * th;
                break;
            default:  // early-leaning window
                b.t_center = t0 + 0.4 * (t1 - t0);
                b.t_radius = 0.75 * th;
                break;
        }
        b.amplitude = wide ? 1.0 : 2.0;
        bumps.push_back(b);
    }
    return bumps;
}

EntropyAuditSummary audit_entropy(const Trajectory& traj, const std::vector<TestBump>& tests,
                                  int level_count) {
    const DenseWindow& w = traj.window;
    require_window(w);
    const Grid& g = w.state.front().grid();
    const RunConfig& cfg = traj.config;

    double dt_max = 0.0;
    for (std::size_t j = 1; j < w.dt_used.size(); ++j) dt_max = std::max(dt_max, w.dt_used[j]);
    double support = 0.0;
    for (const TestBump& b : tests) {
        if (!b.supported_inside(g))
            throw std::invalid_argument(
                "entropy audit: test bump support reaches the boundary layer");
        double measure = 2.0 * b.t_radius;
        for (int a = 0; a < g.dim(); ++a) {
            const auto ax = static_cast<std::size_t>(a);
            if (b.radius[ax] < 2.0 * g.spacing(a))
                throw std::invalid_argument("entropy audit: bump width below 2 dx");
            measure *= 2.0 * b.radius[ax];
        }
        if (b.t_radius < 2.0 * dt_max)
            throw std::invalid_argument("entropy audit: bump time radius below 2 dt");
        support = std::max(support, measure);
    }

    EntropyAuditSummary s;
    s.levels = kruzhkov_levels(w, level_count);
    s.pairs = static_cast<long>(w.state.size()) - 1;

    double worst_cell = std::numeric_limits<double>::infinity();
    for (double k : s.levels) worst_cell = std::min(worst_cell, cell_entropy_check(traj, k));
    s.min_cell_check = worst_cell;

    const FluxParams fp = effective_flux(cfg);
    s.flux_gap = fp.eta > 0.0 ? std::pow(fp.eta, 0.5 * fp.q) * support : 0.0;

    if (cfg.theta < 1.0) {
        double diag = 0.0;
        for (int a = 0; a < g.dim(); ++a)
            diag += 2.0 * cfg.op.coeff(a, g.dim()) / (g.spacing(a) * g.spacing(a));
        s.theta_spread_ok = (1.0 - cfg.theta) * dt_max * diag <= 1.0 + 1e-12;
    }

    double worst_res = std::numeric_limits<double>::infinity();
    double worst_gap = 0.0;
    const double vol = g.cell_volume();
    for (const TestBump& b : tests) {
        for (double k : s.levels) {
            const double weak = kruzhkov_residual(traj, k, b);
            // direct route: -sum over pairs of vol * <phi^{m+1}, E^m>
            std::vector<double> parts;
            for (std::size_t j = 0; j + 1 < w.state.size(); ++j) {
                const Field e =
                    entropy_production(cfg, w.state[j], w.state[j + 1], w.dt_used[j + 1], k);
                const Field ph = b.sample(g, w.t[j + 1]);
                parts.push_back(pairwise_dot(ph.values(), e.values()));
            }
            const double direct = -vol * pairwise_sum(parts);
            worst_res = std::min(worst_res, weak);
            worst_gap = std::max(worst_gap, std::abs(weak - direct));
        }
    }
    s.min_residual = worst_res;
    s.dual_route_gap = worst_gap;
    return s;
}

}  // namespace fastconv
