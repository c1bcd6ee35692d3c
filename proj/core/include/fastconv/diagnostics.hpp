#pragma once

#include <span>
#include <vector>

#include "fastconv/stepper.hpp"

namespace fastconv {

/// Two solutions advanced with a shared step sequence (each step takes the
/// smaller of the two CFL bounds), so the discrete contraction, comparison,
/// and sandwich statements apply exactly rather than up to time-mesh skew.
struct RunPair {
    Trajectory u;
    Trajectory v;
    std::vector<double> t;        // after each accepted step, starting at t0
    std::vector<double> l1_dist;  // ||u - v||_1
    std::vector<double> overtake; // ||(u - v)^+||_1
    std::vector<double> mass_u;
    std::vector<double> mass_v;
};

RunPair run_coupled(const RunConfig& cfg, const Field& u0, const Field& v0);

/// Largest step-to-step increase of ||u - v||_1; nonpositive means the pair
/// contracted monotonically.
double max_contraction_increase(const RunPair& pair);

/// Largest ||(u - v)^+||_1 over the run. Requires u0 <= v0 cellwise.
double comparison_violation(const RunPair& pair);

/// Largest drift of integrate(u) - integrate(v) from its initial value.
double mass_difference_drift(const RunPair& pair);

// ============================================================================
// Sign experiment: zero-mass sign-changing perturbations of shrinking support
// ============================================================================

/// Odd perturbation a * sin(pi x_N / h) cos^2(pi x_N / (2h)) on |x_N| <= h
/// (times a matching cos^2 profile in x' for dim 2). Odd symmetry about the
/// center cell cancels the sampled mass: exactly in dim 1, to rounding in
/// dim 2 (the pairwise sum may split mirrored cells across subtrees).
Field dipole_perturbation(const Grid& g, double amplitude, double h);

struct SignProbe {
    double width = 0.0;              // perturbation support half-width h
    double initial_neg_mass = 0.0;
    std::vector<double> t;
    std::vector<double> neg_mass;    // ||u^-(t)||_1 along the run
};

/// Runs base-config data plus a dipole of each width; series_stride controls
/// the sampling density of the returned series.
std::vector<SignProbe> sign_experiment(const RunConfig& base, double amplitude,
                                       std::span<const double> widths);

// ============================================================================
// Uniqueness experiment: different mollifiers, shrinking width
// ============================================================================

struct UniquenessRow {
    double width = 0.0;
    double initial_distance = 0.0;
    double final_distance = 0.0;  // L1 distance at t_end
};

std::vector<UniquenessRow> uniqueness_experiment(const RunConfig& base, InitialRecipe::Kind a,
                                                 InitialRecipe::Kind b,
                                                 std::span<const double> widths);

/// Aitken delta-squared extrapolation of the last three entries; exact on
/// geometric tails, used to read the limit of the uniqueness table.
double aitken_limit(std::span<const double> v);

// ============================================================================
// Tail control
// ============================================================================

struct TailRow {
    double radius = 0.0;    // R; the measured tail is taken outside 2R
    double fitted_c = 0.0;  // worst measured / bound ratio over the series
    double worst_time = 0.0;
};

/// Bound per time t elapsed from the series start:
///   A (t / R^2 + t / R^(1 - N(q-1))) + initial tail,  A = sup_t ||u(t)||_1.
/// The trajectory's tail series must have been recorded at radius 2R.
std::vector<TailRow> tail_report(const Trajectory& traj, std::span<const double> radii);

// ============================================================================
// Primitive sandwich
// ============================================================================

/// Spreads each x'-line of f uniformly over the cells fully inside
/// |x_N| <= r, preserving every line integral exactly.
Field slab_data(const Field& f, double r);

/// For pair (u, v) with u supported in |x_N| <= r and v the slab rearrangement:
/// the x_N primitives satisfy P_u(x_N - 2r) <= P_v(x_N) <= P_u(x_N + 2r).
/// Returns the largest violation over aligned snapshots; 2r must be an
/// integer number of cells.
double primitive_sandwich(const RunPair& pair, double r);

// ============================================================================
// Energy
// ============================================================================

/// Sum of dt * <A u, u> over steps with t_after in (tau, t_hi].
double energy_integral(const Trajectory& traj, double tau, double t_hi);

struct EnergyCheck {
    double integral = 0.0;      // dissipation integral over (tau, t_end]
    double budget = 0.0;        // 0.5 ||u(tau)||_2^2, the bound
    double fitted_const = 0.0;  // integral / (tau^-(N+1)/(2q) M^(1/q))
};

/// Requires a snapshot recorded exactly at tau.
EnergyCheck energy_check(const Trajectory& traj, double tau);

}  // namespace fastconv
