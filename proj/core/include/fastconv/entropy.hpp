#pragma once

#include <array>
#include <vector>

#include "fastconv/stepper.hpp"

namespace fastconv {

/// Nonnegative smooth test function: tensor product of cos^2 bumps in space
/// and time. bump(s) = cos^2(pi s / 2) on |s| < 1, zero outside, so the
/// function is C^1 with compact support.
struct TestBump {
    std::array<double, max_dim> center{0.0, 0.0};
    std::array<double, max_dim> radius{1.0, 1.0};
    double t_center = 0.0;
    double t_radius = 1.0;
    double amplitude = 1.0;

    double value(const Grid& g, std::int64_t i0, std::int64_t i1, double t) const;
    Field sample(const Grid& g, double t) const;

    /// True when the spatial support stays clear of the outermost cell layer,
    /// which the audit requires: boundary-adjacent cells use the zero-flux
    /// closure instead of a consistent interior flux pair.
    bool supported_inside(const Grid& g) const;
};

/// Per-cell entropy production of one accepted step, for constant k:
///   E_i = |u1 - k|_i - g_i + theta dt (A|u1 - k|)_i + (1 - theta) dt (A g)_i,
///   g   = |u0 - k| - (dt / dx) (Q_right - Q_left),
/// with Q the monotone entropy flux Q(a, b) = F(max(a,k), max(b,k)) -
/// F(min(a,k), min(b,k)) built from the scheme's interface flux F, and Q = 0
/// on the zero-flux boundary faces. Wherever the closure is a consistent
/// flux pair (all cells except the first and last layer along the
/// convection axis), E_i <= 0 up to rounding for CFL-respecting steps.
Field entropy_production(const RunConfig& cfg, const Field& u0, const Field& u1, double dt,
                         double k);

/// Most negative value of -E over all audited step pairs and all cells away
/// from the convection-axis boundary layers. Nonnegative up to rounding for
/// a valid monotone run; the contract is return >= -tolerance.
double cell_entropy_check(const Trajectory& traj, double k);

/// Weighted inequality residual -sum_m sum_i phi^{m+1}_i E^m_i vol, evaluated
/// in summed-by-parts form: time differences of phi against |u - k|, space
/// differences of phi against the entropy flux, A phi against the diffusion
/// terms, plus exact endpoint terms. A nonnegative return certifies the
/// inequality for this (k, phi); equals the direct cell sum to rounding.
double kruzhkov_residual(const Trajectory& traj, double k, const TestBump& phi);

/// Constants for an audit: `count` midpoints spanning the range of the
/// windowed states, with k = 0 always prepended.
std::vector<double> kruzhkov_levels(const DenseWindow& window, int count);

/// The same states in reverse order on an increasing clock, step sizes
/// remapped to the reversed pairs. Auditing a shock-bearing run through this
/// must fail: entropy production flips sign under time reversal.
DenseWindow reverse_window(const DenseWindow& w);

/// Deterministic family of `count` admissible bumps: centers spread along
/// the convection axis, two time windows (one overlapping the endpoints, one
/// interior), two width tiers.
std::vector<TestBump> default_test_bumps(const Grid& g, double t0, double t1, int count);

struct EntropyAuditSummary {
    double min_cell_check = 0.0;   // worst cell_entropy_check over levels
    double min_residual = 0.0;     // worst kruzhkov_residual over tests x levels
    double dual_route_gap = 0.0;   // |weak form - direct sum|, worst case
    double flux_gap = 0.0;         // eta^(q/2) * largest bump support measure
    bool theta_spread_ok = true;   // (1-theta) dt ||A||_diag <= 1 held throughout
    long pairs = 0;
    std::vector<double> levels;
};

/// Full audit of a trajectory's dense window: per-cell check at every level,
/// weighted residuals for every test bump, and the agreement gap between the
/// weak-form and direct evaluation routes. Enforces bump admissibility:
/// support strictly inside the domain, radius >= 2 dx, time radius >= 2 dt.
EntropyAuditSummary audit_entropy(const Trajectory& traj, const std::vector<TestBump>& tests,
                                  int level_count);

}  // namespace fastconv
