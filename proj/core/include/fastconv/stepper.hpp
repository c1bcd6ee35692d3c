#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fastconv/flux.hpp"
#include "fastconv/grid.hpp"
#include "fastconv/operators.hpp"

namespace fastconv {

/// Mollified Dirac-like initial data, sampled at cell centers and
/// renormalized so the discrete mass equals M exactly.
///
///  gaussian(h):    M * prod_a exp(-x_a^2/h^2) / (h sqrt(pi))   (= M K_N(h^2/4))
///  box(h):         M / h^N on the centered cube of side h
///  bump(h):        C exp(-1 / (1 - |x/h|^2)) on |x| < h, mass M
///  heat_kernel(t0): M K_N(t0, x), the warm start
struct InitialRecipe {
    enum class Kind { gaussian, box, bump, heat_kernel };
    Kind kind = Kind::gaussian;
    double param = 0.1;  // width h, or t0 for heat_kernel

    std::string name() const;
};

struct RunConfig {
    Grid grid;
    OperatorChoice op;
    FluxParams flux;
    bool convection = true;

    double mass = 1.0;
    InitialRecipe init;

    double t_start = 0.0;
    double t_end = 1.0;
    double cfl = 0.9;       // fraction of the Lipschitz-stable step, in (0, 1]
    double theta = 1.0;     // implicit weight, in [1/2, 1]
    double lin_tol = 1e-10;
    int lin_max_iter = 2000;

    // Step caps beyond CFL: a fixed cap (required when convection is off),
    // and an optional proportional cap dt <= dt_rel * (t + dt_rel_offset)
    // for runs that need early-time accuracy out of a warm start.
    double dt_max = 0.0;        // 0 = unset
    double dt_rel = 0.0;        // 0 = unset
    double dt_rel_offset = 0.0;

    std::vector<double> snapshot_times;
    std::vector<double> tail_radii;
    int series_stride = 1;

    double boundary_leak_tol = 1e-8;  // relative to mass

    // When set, every accepted step inside [first, second] is recorded into
    // Trajectory::window for the entropy audit.
    std::optional<std::pair<double, double>> audit_window;

    std::string run_id = "run";

    void validate() const;
    /// eta actually used: flux.eta, or (dx_N)^2 when flux.eta is negative
    /// (negative marks "default policy" in configs).
    double effective_eta() const;
};

/// Scalar series sampled while stepping (one entry per accepted step at the
/// configured stride; gradient energy is sampled every step so the energy
/// inequality can be integrated exactly).
struct StepSeries {
    std::vector<double> t;
    std::vector<double> dt;
    std::vector<double> mass;
    std::vector<double> l1, l2, linf;
    std::vector<double> min_v, max_v;
    std::vector<double> neg_mass;  // L1 norm of the negative part
    std::vector<double> boundary_mass;
    std::vector<std::vector<double>> tail;  // one series per configured radius
};

/// Per-step record for the gradient-energy time integral (full stride).
struct EnergySeries {
    std::vector<double> t_after;  // time after the step
    std::vector<double> dt;
    std::vector<double> grad_energy;  // <A u^{m+1}, u^{m+1}>
};

struct DenseWindow {
    std::vector<double> t;        // times of the stored states, increasing
    std::vector<Field> state;     // states at those times (every accepted step)
    std::vector<double> dt_used;  // step size that produced each state; 0 for a seed entry
};

struct Trajectory {
    std::string run_id;
    RunConfig config;
    std::vector<std::pair<double, Field>> snapshots;
    StepSeries series;
    EnergySeries energy;
    DenseWindow window;
    long steps_taken = 0;

    const Field& snapshot_at(double t) const;  // exact time lookup
};

/// Samples the recipe on the grid and rescales to mass M (relative 1e-12).
/// Errors: width below 2 dx on any axis (unresolvable), non-positive raw
/// mass, or more than 1e-6 of the mass in the boundary layer (domain too
/// small for the requested width).
Field make_initial(const InitialRecipe& recipe, double mass, const Grid& g);

/// CFL step: cfl * dx_N / L with L = lipschitz_bound at the current max |u|;
/// capped by dt_max, the proportional cap, and the gap to next_event (the
/// next snapshot time or t_end). Errors when no bound applies (L = 0 and no
/// dt_max).
double cfl_dt(const RunConfig& cfg, const Field& u, double t, double next_event);

/// theta-weighted implicit diffusion step (see diffuse_backward).
Field implicit_diffusion(const RunConfig& cfg, const Field& f, double dt,
                         SolveStats* stats = nullptr);

/// One IMEX step: explicit Godunov convection, then implicit diffusion.
Field step_imex(const RunConfig& cfg, const Field& f, double dt, SolveStats* stats = nullptr);

/// Appends one row of scalar diagnostics (mass, norms, extrema, negative
/// part, boundary layer, tails) for the given state.
void append_step_series(const RunConfig& cfg, StepSeries& s, const Field& u, double t, double dt);

/// Integrates from t_start to t_end. The initial state is recorded as a
/// snapshot unconditionally; requested snapshot times are hit exactly.
/// Aborts when the boundary layer accumulates more than
/// boundary_leak_tol * mass, or when a state goes non-finite.
Trajectory run(const RunConfig& cfg);

/// Same, but starting from a given state at time t0 (resume path; t0 must
/// lie in [t_start, t_end)). Snapshot times before t0 are skipped.
Trajectory run_from(const RunConfig& cfg, const Field& u0, double t0);

}  // namespace fastconv
