#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fastconv {

inline constexpr int max_dim = 2;

/// Uniform tensor grid in 1 or 2 space dimensions, cell-centered.
///
/// The last axis is the distinguished convection direction x_N; in dim 2 the
/// first axis is the transverse coordinate x'. Cell centers sit at
/// origin[a] + (i + 1/2) * spacing[a]. Simulation grids additionally require
/// x = 0 to land exactly on a cell center (Dirac-like data is centered there);
/// that is enforced by validate_for_run(), not by the constructor, because
/// derived grids (marginals, profile grids) have no such constraint.
class Grid {
public:
    Grid() = default;
    Grid(int dim, std::array<std::int64_t, max_dim> cells,
         std::array<double, max_dim> spacing, std::array<double, max_dim> origin);

    /// Builds a run grid covering approximately [lo, hi] per axis with the
    /// given spacing, adjusted so that x = 0 is a cell center. Requires
    /// lo < 0 < hi on every axis.
    static Grid centered(int dim, std::span<const double> lo,
                         std::span<const double> hi, std::span<const double> spacing);

    int dim() const { return dim_; }
    int axis_xn() const { return dim_ - 1; }
    std::int64_t cells(int axis) const { return cells_[axis]; }
    double spacing(int axis) const { return spacing_[axis]; }
    double origin(int axis) const { return origin_[axis]; }

    std::int64_t cell_count() const;
    double cell_volume() const;

    double center(int axis, std::int64_t i) const {
        return origin_[axis] + (static_cast<double>(i) + 0.5) * spacing_[axis];
    }
    double lo(int axis) const { return origin_[axis]; }
    double hi(int axis) const {
        return origin_[axis] + static_cast<double>(cells_[axis]) * spacing_[axis];
    }

    /// True when x = 0 lies on a cell center of every axis (within 1e-9 cells).
    bool zero_on_center() const;

    /// Invariants required of grids that enter a simulation: dim in {1,2},
    /// at least 4 cells per axis, positive spacing, zero on a cell center.
    void validate_for_run() const;

    bool operator==(const Grid& other) const;

    std::string describe() const;

private:
    int dim_ = 0;
    std::array<std::int64_t, max_dim> cells_{0, 0};
    std::array<double, max_dim> spacing_{0.0, 0.0};
    std::array<double, max_dim> origin_{0.0, 0.0};
};

/// Cell-centered scalar field. Storage is row-major with the x_N axis
/// fastest: index = i0 * cells(1) + i1 in dim 2. All entries must stay
/// finite; ensure_finite() is the hard check used by the stepper.
class Field {
public:
    Field() = default;
    explicit Field(const Grid& g, double fill = 0.0);
    Field(const Grid& g, std::vector<double> values);

    const Grid& grid() const { return grid_; }
    std::span<const double> values() const { return v_; }
    std::span<double> values() { return v_; }
    std::int64_t size() const { return static_cast<std::int64_t>(v_.size()); }

    double operator[](std::int64_t i) const { return v_[static_cast<std::size_t>(i)]; }
    double& operator[](std::int64_t i) { return v_[static_cast<std::size_t>(i)]; }

    std::int64_t index(std::int64_t i0, std::int64_t i1) const {
        return i0 * grid_.cells(1) + i1;
    }

    void ensure_finite(const char* context) const;

private:
    Grid grid_;
    std::vector<double> v_;
};

// ---- field functionals ---------------------------------------------------

/// Cell-volume weighted sum of values (deterministic pairwise order).
double integrate(const Field& f);

/// L^p norm with cell-volume weights; p = infinity gives max |v|. p >= 1.
double lp_norm(const Field& f, double p);

/// Sum of |v| * volume over cells whose center has Euclidean norm > r.
double tail_mass(const Field& f, double r);

/// Integral of max(-v, 0), the mass of the negative part.
double negative_part_mass(const Field& f);

double max_abs(const Field& f);
double min_value(const Field& f);
double max_value(const Field& f);

/// Mass of the outermost cell layer (all boundary faces), used for the
/// domain-too-small abort in the stepper.
double boundary_layer_mass(const Field& f);

/// Cumulative integral along x_N per x'-line; the last entry of each line
/// equals the line integral.
Field primitive_xn(const Field& f);

/// Integrates out x_N. For dim 2 the result lives on the 1-d x' grid; for
/// dim 1 the result is a single-cell grid of unit volume holding the mass.
Field marginal_xprime(const Field& f);

/// Multilinear interpolation of cell-center values onto the target grid.
/// Points outside the source box evaluate to 0; points inside the box but
/// beyond the outermost centers clamp to the nearest center coordinate.
double interpolate(const Field& f, std::span<const double> point);
Field resample(const Field& f, const Grid& target);

}  // namespace fastconv
