#include "fastconv/selfsim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fastconv/kernels.hpp"
#include "fastconv/reduce.hpp"

namespace fastconv {

Exponents exponents(int dim, double q) {
    if (dim < 1 || dim > max_dim)
        throw std::invalid_argument("exponents: dim must be 1 or " + std::to_string(max_dim));
    const double floor_q = 1.0 - 1.0 / dim;
    if (!(q > floor_q))
        throw std::invalid_argument("exponents: q = " + std::to_string(q) +
                                    " violates q > 1 - 1/N = " + std::to_string(floor_q));
    if (!(q < 1.0))
        throw std::invalid_argument("exponents: q = " + std::to_string(q) +
                                    " is outside the fast regime q < 1");
    Exponents e;
    e.dim = dim;
    e.q = q;
    const double n = dim;
    e.alpha = (n + 1.0) / (2.0 * q);
    e.beta = (n + 1.0 - q * (n - 1.0)) / (2.0 * q);
    e.gamma = 0.5 * (n - 1.0) + e.beta;
    return e;
}

double heat_kernel_marginal(int dim, double t, std::span<const double> xprime) {
    if (dim < 1 || dim > max_dim)
        throw std::invalid_argument("heat_kernel_marginal: dim must be 1 or " +
                                    std::to_string(max_dim));
    if (static_cast<int>(xprime.size()) != dim - 1)
        throw std::invalid_argument("heat_kernel_marginal: x' arity must be dim - 1");
    return heat_kernel(dim - 1, t, xprime);
}

Field marginal_reference(const Grid& marginal_grid, int full_dim, double mass, double t) {
    if (marginal_grid.dim() != 1)
        throw std::invalid_argument("marginal_reference: marginal grids are one dimensional");
    Field out(marginal_grid, 0.0);
    if (full_dim == 1) {
        for (std::int64_t i = 0; i < marginal_grid.cells(0); ++i) out[i] = mass;
        return out;
    }
    for (std::int64_t i = 0; i < marginal_grid.cells(0); ++i) {
        const double x = marginal_grid.center(0, i);
        out[i] = mass * heat_kernel_marginal(full_dim, t, std::span<const double>{&x, 1});
    }
    return out;
}

Field rescale(const Field& u, double t, const Exponents& e, const Grid& profile_grid) {
    if (!(t > 0.0)) throw std::invalid_argument("rescale: t must be positive");
    const Grid& src = u.grid();
    if (src.dim() != profile_grid.dim())
        throw std::invalid_argument("rescale: profile grid dim does not match field");
    const double amp = std::pow(t, e.alpha);
    const double sx = std::sqrt(t);
    const double sn = std::pow(t, e.beta);

    Field out(profile_grid, 0.0);
    auto v = out.values();
    if (src.dim() == 1) {
        for (std::int64_t i = 0; i < profile_grid.cells(0); ++i) {
            const double x = sn * profile_grid.center(0, i);
            v[static_cast<std::size_t>(i)] = amp * interpolate(u, std::span<const double>{&x, 1});
        }
    } else {
        for (std::int64_t i0 = 0; i0 < profile_grid.cells(0); ++i0) {
            for (std::int64_t i1 = 0; i1 < profile_grid.cells(1); ++i1) {
                const double x[2] = {sx * profile_grid.center(0, i0),
                                     sn * profile_grid.center(1, i1)};
                v[static_cast<std::size_t>(out.index(i0, i1))] =
                    amp * interpolate(u, std::span<const double>{x, 2});
            }
        }
    }
    return out;
}

Grid profile_grid_for(const Grid& run_grid, const Exponents& e, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("profile_grid_for: t must be positive");
    std::array<double, max_dim> lo{}, hi{}, h{};
    for (int a = 0; a < run_grid.dim(); ++a) {
        const bool axial = a == run_grid.dim() - 1;
        const double s = axial ? std::pow(t, e.beta) : std::sqrt(t);
        lo[static_cast<std::size_t>(a)] = run_grid.lo(a) / s;
        hi[static_cast<std::size_t>(a)] = run_grid.hi(a) / s;
        h[static_cast<std::size_t>(a)] = run_grid.spacing(a) / s;
    }
    const int d = run_grid.dim();
    return Grid::centered(d, std::span<const double>{lo.data(), static_cast<std::size_t>(d)},
                          std::span<const double>{hi.data(), static_cast<std::size_t>(d)},
                          std::span<const double>{h.data(), static_cast<std::size_t>(d)});
}

double collapse_distance(const Field& u1, double t1, const Field& u2, double t2,
                         const Exponents& e, const Grid& profile_grid) {
    const Field v1 = rescale(u1, t1, e, profile_grid);
    const Field v2 = rescale(u2, t2, e, profile_grid);
    Field diff(profile_grid, 0.0);
    auto d = diff.values();
    const auto a = v1.values();
    const auto b = v2.values();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] - b[i];
    return lp_norm(diff, 1.0);
}

double collapse_distance(const Trajectory& traj, const Exponents& e, double t1, double t2) {
    if (!(t1 < t2)) throw std::invalid_argument("collapse_distance: need t1 < t2");
    const Field& u1 = traj.snapshot_at(t1);
    const Field& u2 = traj.snapshot_at(t2);
    const Grid profile = profile_grid_for(traj.config.grid, e, t2);
    return collapse_distance(u1, t1, u2, t2, e, profile);
}

DecayFit fit_power_law(std::span<const double> t, std::span<const double> value, double t_lo,
                       double t_hi) {
    if (t.size() != value.size())
        throw std::invalid_argument("fit_power_law: t and value length mismatch");
    if (!(t_lo > 0.0) || !(t_hi > t_lo))
        throw std::invalid_argument("fit_power_law: window must satisfy 0 < t_lo < t_hi");

    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_lo || t[i] > t_hi) continue;
        if (!(value[i] > 0.0))
            throw std::invalid_argument("fit_power_law: nonpositive value inside fit window");
        lx.push_back(std::log(t[i]));
        ly.push_back(std::log(value[i]));
    }
    const double decades = std::log10(t_hi / t_lo);
    const auto needed = static_cast<std::size_t>(std::ceil(8.0 * std::max(decades, 0.25)));
    if (lx.size() < std::max<std::size_t>(needed, 3))
        throw std::invalid_argument("fit_power_law: fit window undersampled (" +
                                    std::to_string(lx.size()) + " samples for " +
                                    std::to_string(decades) + " decades)");

    const auto n = static_cast<double>(lx.size());
    const double mx = pairwise_sum(lx) / n;
    const double my = pairwise_sum(ly) / n;
    for (double& x : lx) x -= mx;
    for (double& y : ly) y -= my;
    const double sxx = pairwise_dot(lx, lx);
    if (!(sxx > 0.0)) throw std::invalid_argument("fit_power_law: degenerate time samples");
    const double sxy = pairwise_dot(lx, ly);

    DecayFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.samples = static_cast<long>(lx.size());

    std::vector<double> r2(lx.size());
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double r = ly[i] - fit.slope * lx[i];
        fit.max_residual = std::max(fit.max_residual, std::abs(r));
        r2[i] = r * r;
    }
    if (lx.size() > 2)
        fit.stderr_slope = std::sqrt(pairwise_sum(r2) / ((n - 2.0) * sxx));
    return fit;
}

DecayFit decay_fit(const Trajectory& traj, double p, double t_lo, double t_hi) {
    const StepSeries& s = traj.series;
    const std::vector<double>* norm = nullptr;
    if (p == 1.0) norm = &s.l1;
    else if (p == 2.0) norm = &s.l2;
    else if (std::isinf(p)) norm = &s.linf;
    else
        throw std::invalid_argument("decay_fit: the series records p = 1, 2, and infinity only");
    return fit_power_law(s.t, *norm, t_lo, t_hi);
}

namespace {

void check_source(const SourceSolution& s) {
    if (!(s.q > 0.0 && s.q < 1.0))
        throw std::invalid_argument("source solution: q must lie in (0, 1)");
    if (!(s.mass > 0.0)) throw std::invalid_argument("source solution: mass must be positive");
}

}  // namespace

double SourceSolution::front(double t) const {
    check_source(*this);
    if (!(t > 0.0)) throw std::invalid_argument("source solution: t must be positive");
    const double p = 1.0 / (1.0 - q);
    // mass condition: (q t)^p a^(1-p) / (p - 1) = M
    return std::pow(std::pow(q * t, p) / ((p - 1.0) * mass), 1.0 / (p - 1.0));
}

double SourceSolution::peak(double t) const {
    const double p = 1.0 / (1.0 - q);
    return std::pow(q * t / front(t), p);
}

double SourceSolution::value(double t, double x) const {
    if (x < front(t)) return 0.0;
    const double p = 1.0 / (1.0 - q);
    return std::pow(q * t / x, p);
}

Field SourceSolution::sample(const Grid& g, double t) const {
    if (g.dim() != 1)
        throw std::invalid_argument("source solution: sampling needs a dim-1 grid");
    const double a = front(t);
    const double p = 1.0 / (1.0 - q);
    Field out(g, 0.0);
    for (std::int64_t i = 0; i < g.cells(0); ++i) {
        const double x = g.center(0, i);
        if (x >= a) out[i] = std::pow(q * t / x, p);
    }
    return out;
}

}  // namespace fastconv
