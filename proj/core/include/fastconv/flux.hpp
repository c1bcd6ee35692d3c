#pragma once

#include "fastconv/grid.hpp"

namespace fastconv {

/// Convection nonlinearity f(u) = |u|^(q-1) u and its smooth regularization
///   f_eta(s) = (s^2 + eta)^(q/2) - eta^(q/2)   for s >= 0,
/// extended to s < 0 either oddly (default, keeps the flux monotone for
/// signed states) or by the even formula itself.
struct FluxParams {
    double q = 0.75;
    double eta = 0.0;
    bool odd_extension = true;
    // Positive floor on |u|, only consulted when eta = 0 (the exact flux has
    // unbounded slope at 0 for q < 1, so a CFL bound needs a floor there).
    double u_floor = 0.0;
};

/// Requires q in the mass-conservation range q > 1 - 1/N for the grid
/// dimension, q > 0, eta >= 0.
void validate(const FluxParams& p, int dim);

double flux_exact(const FluxParams& p, double s);
double flux_eta(const FluxParams& p, double s);

/// Upper bound on sup |f_eta'| over the states reachable in a run,
/// L = q * eta^((q-1)/2) for q <= 1 and eta > 0. With eta = 0 a positive
/// u_floor is required when q < 1.
double lipschitz_bound(const FluxParams& p, double umax);

/// Godunov flux through the general min/max characterization:
///   F(a, b) = min over [a, b] of f_eta   if a <= b,
///             max over [b, a] of f_eta   otherwise.
/// The only interior critical point any of the supported flux forms has is
/// s = 0, so the extremum is attained at a, b, or 0.
double numerical_flux(const FluxParams& p, double a, double b);

/// Per-cell divergence of the numerical flux along x_N with zero-flux
/// boundary faces: (F(u_i, u_{i+1}) - F(u_{i-1}, u_i)) / dx_N per x'-line.
/// The volume-weighted sum over all cells telescopes to zero exactly.
Field convection_divergence(const FluxParams& p, const Field& u);

}  // namespace fastconv
