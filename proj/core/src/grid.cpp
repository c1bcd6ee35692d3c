#include "fastconv/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "fastconv/reduce.hpp"

namespace fastconv {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

}  // namespace

Grid::Grid(int dim, std::array<std::int64_t, max_dim> cells,
           std::array<double, max_dim> spacing, std::array<double, max_dim> origin)
    : dim_(dim), cells_(cells), spacing_(spacing), origin_(origin) {
    if (dim < 1 || dim > max_dim) fail("grid: dim must be 1 or 2, got " + std::to_string(dim));
    for (int a = 0; a < dim; ++a) {
        if (cells_[a] < 1) fail("grid: axis " + std::to_string(a) + " needs at least 1 cell");
        if (!(spacing_[a] > 0.0) || !std::isfinite(spacing_[a]))
            fail("grid: axis " + std::to_string(a) + " spacing must be positive and finite");
        if (!std::isfinite(origin_[a])) fail("grid: origin must be finite");
    }
    for (int a = dim; a < max_dim; ++a) {
        cells_[a] = 1;
        spacing_[a] = 1.0;
        origin_[a] = 0.0;
    }
}

Grid Grid::centered(int dim, std::span<const double> lo, std::span<const double> hi,
                    std::span<const double> spacing) {
    if (dim < 1 || dim > max_dim) fail("grid: dim must be 1 or 2");
    if (static_cast<int>(lo.size()) < dim || static_cast<int>(hi.size()) < dim ||
        static_cast<int>(spacing.size()) < dim)
        fail("grid: centered() needs lo/hi/spacing per axis");
    std::array<std::int64_t, max_dim> cells{1, 1};
    std::array<double, max_dim> h{1.0, 1.0};
    std::array<double, max_dim> origin{0.0, 0.0};
    for (int a = 0; a < dim; ++a) {
        if (!(spacing[a] > 0.0)) fail("grid: spacing must be positive");
        if (!(lo[a] < 0.0 && hi[a] > 0.0))
            fail("grid: centered() requires lo < 0 < hi on every axis");
        // k_lo cells with centers below zero, k_hi above, one center at zero.
        const auto k_lo = static_cast<std::int64_t>(std::llround(-lo[a] / spacing[a] - 0.5));
        const auto k_hi = static_cast<std::int64_t>(std::llround(hi[a] / spacing[a] - 0.5));
        cells[a] = std::max<std::int64_t>(k_lo, 1) + std::max<std::int64_t>(k_hi, 1) + 1;
        h[a] = spacing[a];
        origin[a] = -(static_cast<double>(std::max<std::int64_t>(k_lo, 1)) + 0.5) * spacing[a];
    }
    Grid g(dim, cells, h, origin);
    g.validate_for_run();
    return g;
}

std::int64_t Grid::cell_count() const {
    std::int64_t n = 1;
    for (int a = 0; a < dim_; ++a) n *= cells_[a];
    return n;
}

double Grid::cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= spacing_[a];
    return v;
}

bool Grid::zero_on_center() const {
    for (int a = 0; a < dim_; ++a) {
        const double idx = -origin_[a] / spacing_[a] - 0.5;
        if (std::abs(idx - std::round(idx)) > 1e-9) return false;
        const double r = std::round(idx);
        if (r < 0 || r >= static_cast<double>(cells_[a])) return false;
    }
    return true;
}

void Grid::validate_for_run() const {
    if (dim_ < 1 || dim_ > max_dim) fail("grid: dim must be 1 or 2");
    for (int a = 0; a < dim_; ++a) {
        if (cells_[a] < 4)
            fail("grid: run grids need at least 4 cells per axis, axis " + std::to_string(a) +
                 " has " + std::to_string(cells_[a]));
    }
    if (!zero_on_center()) fail("grid: x = 0 must lie on a cell center of every axis");
}

bool Grid::operator==(const Grid& other) const {
    if (dim_ != other.dim_) return false;
    for (int a = 0; a < dim_; ++a) {
        if (cells_[a] != other.cells_[a]) return false;
        if (spacing_[a] != other.spacing_[a]) return false;
        if (origin_[a] != other.origin_[a]) return false;
    }
    return true;
}

std::string Grid::describe() const {
    std::ostringstream os;
    os << dim_ << "d grid ";
    for (int a = 0; a < dim_; ++a) {
        if (a) os << " x ";
        os << cells_[a] << " cells [" << lo(a) << ", " << hi(a) << "] h=" << spacing_[a];
    }
    return os.str();
}

Field::Field(const Grid& g, double fill)
    : grid_(g), v_(static_cast<std::size_t>(g.cell_count()), fill) {}

Field::Field(const Grid& g, std::vector<double> values) : grid_(g), v_(std::move(values)) {
    if (static_cast<std::int64_t>(v_.size()) != g.cell_count())
        fail("field: value count " + std::to_string(v_.size()) + " does not match grid (" +
             std::to_string(g.cell_count()) + " cells)");
}

void Field::ensure_finite(const char* context) const {
    for (std::size_t i = 0; i < v_.size(); ++i) {
        if (!std::isfinite(v_[i])) {
            std::ostringstream os;
            os << context << ": non-finite value " << v_[i] << " at flat index " << i << " ("
               << grid_.describe() << ")";
            throw std::runtime_error(os.str());
        }
    }
}

// ---- functionals ----------------------------------------------------------

double integrate(const Field& f) {
    return pairwise_sum(f.values()) * f.grid().cell_volume();
}

double lp_norm(const Field& f, double p) {
    if (!(p >= 1.0)) fail("lp_norm: p must be >= 1 (or infinity)");
    const auto v = f.values();
    if (std::isinf(p)) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }
    std::vector<double> powed(v.size());
    if (p == 1.0) {
        for (std::size_t i = 0; i < v.size(); ++i) powed[i] = std::abs(v[i]);
    } else if (p == 2.0) {
        for (std::size_t i = 0; i < v.size(); ++i) powed[i] = v[i] * v[i];
    } else {
        for (std::size_t i = 0; i < v.size(); ++i) powed[i] = std::pow(std::abs(v[i]), p);
    }
    const double s = pairwise_sum(powed) * f.grid().cell_volume();
    return std::pow(s, 1.0 / p);
}

double tail_mass(const Field& f, double r) {
    if (!(r >= 0.0)) fail("tail_mass: radius must be >= 0");
    const Grid& g = f.grid();
    const double r2 = r * r;
    std::vector<double> contrib;
    contrib.reserve(static_cast<std::size_t>(f.size()));
    if (g.dim() == 1) {
        for (std::int64_t i = 0; i < g.cells(0); ++i) {
            const double x = g.center(0, i);
            if (x * x > r2) contrib.push_back(std::abs(f[i]));
        }
    } else {
        for (std::int64_t i0 = 0; i0 < g.cells(0); ++i0) {
            const double x0 = g.center(0, i0);
            for (std::int64_t i1 = 0; i1 < g.cells(1); ++i1) {
                const double x1 = g.center(1, i1);
                if (x0 * x0 + x1 * x1 > r2)
                    contrib.push_back(std::abs(f[i0 * g.cells(1) + i1]));
            }
        }
    }
    return pairwise_sum(contrib) * g.cell_volume();
}

double negative_part_mass(const Field& f) {
    const auto v = f.values();
    std::vector<double> contrib(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) contrib[i] = v[i] < 0.0 ? -v[i] : 0.0;
    return pairwise_sum(contrib) * f.grid().cell_volume();
}

double max_abs(const Field& f) {
    double m = 0.0;
    for (double x : f.values()) m = std::max(m, std::abs(x));
    return m;
}

double min_value(const Field& f) {
    double m = std::numeric_limits<double>::infinity();
    for (double x : f.values()) m = std::min(m, x);
    return m;
}

double max_value(const Field& f) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : f.values()) m = std::max(m, x);
    return m;
}

double boundary_layer_mass(const Field& f) {
    const Grid& g = f.grid();
    std::vector<double> contrib;
    if (g.dim() == 1) {
        const std::int64_t n = g.cells(0);
        contrib.push_back(std::abs(f[0]));
        contrib.push_back(std::abs(f[n - 1]));
    } else {
        const std::int64_t n0 = g.cells(0), n1 = g.cells(1);
        for (std::int64_t i0 = 0; i0 < n0; ++i0) {
            for (std::int64_t i1 = 0; i1 < n1; ++i1) {
                if (i0 == 0 || i0 == n0 - 1 || i1 == 0 || i1 == n1 - 1)
                    contrib.push_back(std::abs(f[i0 * n1 + i1]));
            }
        }
    }
    return pairwise_sum(contrib) * g.cell_volume();
}

Field primitive_xn(const Field& f) {
    const Grid& g = f.grid();
    Field out(g);
    const double hn = g.spacing(g.axis_xn());
    if (g.dim() == 1) {
        double acc = 0.0;
        for (std::int64_t i = 0; i < g.cells(0); ++i) {
            acc += f[i] * hn;
            out[i] = acc;
        }
    } else {
        const std::int64_t n0 = g.cells(0), n1 = g.cells(1);
        for (std::int64_t i0 = 0; i0 < n0; ++i0) {
            double acc = 0.0;
            for (std::int64_t i1 = 0; i1 < n1; ++i1) {
                acc += f[i0 * n1 + i1] * hn;
                out[i0 * n1 + i1] = acc;
            }
        }
    }
    return out;
}

Field marginal_xprime(const Field& f) {
    const Grid& g = f.grid();
    const double hn = g.spacing(g.axis_xn());
    if (g.dim() == 1) {
        Grid point(1, {1, 1}, {1.0, 1.0}, {-0.5, 0.0});
        Field out(point);
        out[0] = integrate(f);
        return out;
    }
    Grid line(1, {g.cells(0), 1}, {g.spacing(0), 1.0}, {g.origin(0), 0.0});
    Field out(line);
    const std::int64_t n0 = g.cells(0), n1 = g.cells(1);
    std::vector<double> row(static_cast<std::size_t>(n1));
    for (std::int64_t i0 = 0; i0 < n0; ++i0) {
        for (std::int64_t i1 = 0; i1 < n1; ++i1) row[static_cast<std::size_t>(i1)] = f[i0 * n1 + i1];
        out[i0] = pairwise_sum(row) * hn;
    }
    return out;
}

namespace {

// Locates x in the cell-center lattice of axis a: returns the left index and
// the interpolation weight toward the right neighbor. Coordinates inside the
// box but beyond the outermost centers clamp to the nearest center.
struct AxisHit {
    std::int64_t left;
    double w;
    bool outside;
};

AxisHit locate(const Grid& g, int a, double x) {
    if (x < g.lo(a) || x > g.hi(a)) return {0, 0.0, true};
    const double s = (x - g.origin(a)) / g.spacing(a) - 0.5;
    const double n1 = static_cast<double>(g.cells(a) - 1);
    const double sc = std::clamp(s, 0.0, n1);
    auto left = static_cast<std::int64_t>(std::floor(sc));
    left = std::clamp<std::int64_t>(left, 0, g.cells(a) - 2 >= 0 ? g.cells(a) - 2 : 0);
    double w = sc - static_cast<double>(left);
    if (g.cells(a) == 1) w = 0.0;
    return {left, w, false};
}

}  // namespace

double interpolate(const Field& f, std::span<const double> point) {
    const Grid& g = f.grid();
    if (static_cast<int>(point.size()) != g.dim())
        fail("interpolate: point arity does not match grid dim");
    if (g.dim() == 1) {
        const AxisHit h = locate(g, 0, point[0]);
        if (h.outside) return 0.0;
        const std::int64_t r = std::min(h.left + 1, g.cells(0) - 1);
        return (1.0 - h.w) * f[h.left] + h.w * f[r];
    }
    const AxisHit h0 = locate(g, 0, point[0]);
    const AxisHit h1 = locate(g, 1, point[1]);
    if (h0.outside || h1.outside) return 0.0;
    const std::int64_t r0 = std::min(h0.left + 1, g.cells(0) - 1);
    const std::int64_t r1 = std::min(h1.left + 1, g.cells(1) - 1);
    const std::int64_t n1 = g.cells(1);
    const double v00 = f[h0.left * n1 + h1.left];
    const double v01 = f[h0.left * n1 + r1];
    const double v10 = f[r0 * n1 + h1.left];
    const double v11 = f[r0 * n1 + r1];
    return (1.0 - h0.w) * ((1.0 - h1.w) * v00 + h1.w * v01) +
           h0.w * ((1.0 - h1.w) * v10 + h1.w * v11);
}

Field resample(const Field& f, const Grid& target) {
    const Grid& src = f.grid();
    if (src.dim() != target.dim())
        fail("resample: source is " + std::to_string(src.dim()) + "d, target is " +
             std::to_string(target.dim()) + "d");
    Field out(target);
    if (src.dim() == 1) {
        for (std::int64_t i = 0; i < target.cells(0); ++i) {
            const AxisHit h = locate(src, 0, target.center(0, i));
            if (h.outside) continue;
            const std::int64_t r = std::min(h.left + 1, src.cells(0) - 1);
            out[i] = (1.0 - h.w) * f[h.left] + h.w * f[r];
        }
    } else {
        const std::int64_t n1s = src.cells(1);
        for (std::int64_t i0 = 0; i0 < target.cells(0); ++i0) {
            const AxisHit h0 = locate(src, 0, target.center(0, i0));
            if (h0.outside) continue;
            const std::int64_t r0 = std::min(h0.left + 1, src.cells(0) - 1);
            for (std::int64_t i1 = 0; i1 < target.cells(1); ++i1) {
                const AxisHit h1 = locate(src, 1, target.center(1, i1));
                if (h1.outside) continue;
                const std::int64_t r1 = std::min(h1.left + 1, src.cells(1) - 1);
                const double v00 = f[h0.left * n1s + h1.left];
                const double v01 = f[h0.left * n1s + r1];
                const double v10 = f[r0 * n1s + h1.left];
                const double v11 = f[r0 * n1s + r1];
                out[i0 * target.cells(1) + i1] =
                    (1.0 - h0.w) * ((1.0 - h1.w) * v00 + h1.w * v01) +
                    h0.w * ((1.0 - h1.w) * v10 + h1.w * v11);
            }
        }
    }
    return out;
}

}  // namespace fastconv
