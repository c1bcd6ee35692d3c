#pragma once

#include <span>

#include "fastconv/grid.hpp"
#include "fastconv/stepper.hpp"

namespace fastconv {

/// Scaling exponents of the long-time collapse for flux exponent q in
/// dimension N: u(t, x) ~ t^-alpha V(x' / sqrt(t), x_N / t^beta).
/// alpha = (N + 1) / (2q), beta = (N + 1 - q(N - 1)) / (2q),
/// gamma = (N - 1) / 2 + beta; gamma equals alpha, which is exactly the
/// combination that makes the rescaling mass preserving.
struct Exponents {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    int dim = 1;
    double q = 0.0;
};

/// Requires q > 1 - 1/N (below that the flux is not mass conserving).
Exponents exponents(int dim, double q);

/// Gaussian heat kernel in N - 1 variables, the x'-marginal reference:
/// (4 pi t)^-(N-1)/2 exp(-|x'|^2 / 4t); the empty product for N = 1 gives
/// the constant 1.
double heat_kernel_marginal(int dim, double t, std::span<const double> xprime);

/// mass * heat_kernel_marginal sampled on a marginal grid (dim - 1 axes).
Field marginal_reference(const Grid& marginal_grid, int full_dim, double mass, double t);

/// Pulls a field at time t back to similarity variables on profile_grid:
/// v(xi) = t^alpha u(sqrt(t) xi', t^beta xi_N). Requires t > 0.
Field rescale(const Field& u, double t, const Exponents& e, const Grid& profile_grid);

/// Similarity-variable image of the run box at time t (same cell counts).
Grid profile_grid_for(const Grid& run_grid, const Exponents& e, double t);

/// L1 distance between the rescaled profiles of two states.
double collapse_distance(const Field& u1, double t1, const Field& u2, double t2,
                         const Exponents& e, const Grid& profile_grid);

/// Same, reading the two states from a trajectory's snapshots. The shared
/// profile grid is the t2 image of the run box, whose rescaled support is
/// contained in the t1 image for t1 < t2.
double collapse_distance(const Trajectory& traj, const Exponents& e, double t1, double t2);

/// Ordinary least squares for log(value) against log(t) over the window
/// [t_lo, t_hi]. Demands at least eight samples per decade of window width
/// and strictly positive values; throws otherwise.
struct DecayFit {
    double slope = 0.0;
    double intercept = 0.0;     // fitted log-value at log t = 0
    double stderr_slope = 0.0;  // OLS standard error of the slope
    double max_residual = 0.0;  // worst absolute log-space residual
    long samples = 0;
};

DecayFit fit_power_law(std::span<const double> t, std::span<const double> value, double t_lo,
                       double t_hi);

/// Fits the decay of the L^p norm series of a run; p must be 1, 2, or
/// infinity (the norms the step series records).
DecayFit decay_fit(const Trajectory& traj, double p, double t_lo, double t_hi);

/// Closed-form mass-M source solution of the pure convection equation
/// u_t + (u^q)_x = 0 in one dimension, q in (0, 1): a rarefaction fan
/// u = (q t / x)^(1/(1-q)) ahead of a single shock at x = front(t), empty
/// behind it. Small amplitudes travel arbitrarily fast, so the fan extends
/// to +infinity for every positive time.
struct SourceSolution {
    double q = 0.75;
    double mass = 1.0;

    double front(double t) const;  // shock position, grows like t^(1/q)
    double peak(double t) const;   // value just ahead of the shock
    double value(double t, double x) const;
    Field sample(const Grid& g, double t) const;  // dim-1 grids only
};

}  // namespace fastconv
