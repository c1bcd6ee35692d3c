#include "fastconv/operators.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "fastconv/reduce.hpp"

namespace fastconv {

void OperatorChoice::validate() const {
    if (kind == OperatorKind::reduced_plus_axial) {
        if (!(eps >= 0.0)) throw std::invalid_argument("operator: eps must be >= 0");
    }
}

double OperatorChoice::coeff(int axis, int dim) const {
    const bool axial = (axis == dim - 1);
    switch (kind) {
        case OperatorKind::full_laplacian: return 1.0;
        case OperatorKind::reduced_laplacian: return axial ? 0.0 : 1.0;
        case OperatorKind::reduced_plus_axial: return axial ? eps : 1.0;
    }
    return 0.0;
}

bool OperatorChoice::is_zero(int dim) const {
    for (int a = 0; a < dim; ++a)
        if (coeff(a, dim) != 0.0) return false;
    return true;
}

std::string OperatorChoice::name() const {
    switch (kind) {
        case OperatorKind::full_laplacian: return "full";
        case OperatorKind::reduced_laplacian: return "reduced";
        case OperatorKind::reduced_plus_axial: {
            std::ostringstream os;
            os << "reduced_eps(" << eps << ")";
            return os.str();
        }
    }
    return "?";
}

namespace {

// One axis of the Neumann Laplacian: y += c/h^2 * (2x_i - x_{i-1} - x_{i+1})
// with reflected neighbors at the ends (the missing difference drops).
void accumulate_axis(const Field& x, Field& y, std::int64_t stride, std::int64_t count,
                     std::int64_t lines, std::int64_t line_stride, double c_over_h2) {
    for (std::int64_t l = 0; l < lines; ++l) {
        const std::int64_t base = l * line_stride;
        for (std::int64_t i = 0; i < count; ++i) {
            const std::int64_t idx = base + i * stride;
            double acc = 0.0;
            if (i > 0) acc += x[idx] - x[idx - stride];
            if (i + 1 < count) acc += x[idx] - x[idx + stride];
            y[idx] += c_over_h2 * acc;
        }
    }
}

struct AxisPlan {
    std::int64_t stride, count, lines, line_stride;
    double c_over_h2;
};

std::vector<AxisPlan> make_plan(const OperatorChoice& op, const Grid& g) {
    std::vector<AxisPlan> plan;
    for (int a = 0; a < g.dim(); ++a) {
        const double c = op.coeff(a, g.dim());
        if (c == 0.0) continue;
        const double w = c / (g.spacing(a) * g.spacing(a));
        if (g.dim() == 1) {
            plan.push_back({1, g.cells(0), 1, 0, w});
        } else if (a == 1) {
            plan.push_back({1, g.cells(1), g.cells(0), g.cells(1), w});
        } else {
            plan.push_back({g.cells(1), g.cells(0), g.cells(1), 1, w});
        }
    }
    return plan;
}

}  // namespace

void apply_operator(const OperatorChoice& op, const Field& x, Field& y) {
    const Grid& g = x.grid();
    for (auto& v : y.values()) v = 0.0;
    for (const AxisPlan& p : make_plan(op, g))
        accumulate_axis(x, y, p.stride, p.count, p.lines, p.line_stride, p.c_over_h2);
}

double gradient_energy(const OperatorChoice& op, const Field& x) {
    const Grid& g = x.grid();
    const double vol = g.cell_volume();
    std::vector<double> contrib;
    for (const AxisPlan& p : make_plan(op, g)) {
        for (std::int64_t l = 0; l < p.lines; ++l) {
            const std::int64_t base = l * p.line_stride;
            for (std::int64_t i = 0; i + 1 < p.count; ++i) {
                const double d = x[base + (i + 1) * p.stride] - x[base + i * p.stride];
                contrib.push_back(p.c_over_h2 * d * d * vol);
            }
        }
    }
    return pairwise_sum(contrib);
}

Field diffuse_backward(const OperatorChoice& op, const Field& f, double dt, double theta,
                       double lin_tol, int max_iter, SolveStats* stats) {
    const Grid& g = f.grid();
    if (op.is_zero(g.dim()) || dt == 0.0) {
        if (stats) *stats = {0, 0.0};
        return f;
    }

    const std::int64_t n = f.size();
    const double fnorm = std::sqrt(pairwise_dot(f.values(), f.values()));
    const double tol = lin_tol * fnorm;

    // rhs = -dt A f; solve (I + theta dt A) w = rhs, return f + w.
    Field rhs(g);
    apply_operator(op, f, rhs);
    for (std::int64_t i = 0; i < n; ++i) rhs[i] *= -dt;

    Field w(g, 0.0);
    Field r = rhs;
    Field pdir = r;
    Field ap(g);

    double rr = pairwise_dot(r.values(), r.values());
    int it = 0;
    while (std::sqrt(rr) > tol && it < max_iter) {
        apply_operator(op, pdir, ap);
        for (std::int64_t i = 0; i < n; ++i) ap[i] = pdir[i] + theta * dt * ap[i];
        const double p_ap = pairwise_dot(pdir.values(), ap.values());
        if (!(p_ap > 0.0)) break;  // numerically converged: direction has no curvature left
        const double alpha = rr / p_ap;
        for (std::int64_t i = 0; i < n; ++i) w[i] += alpha * pdir[i];
        for (std::int64_t i = 0; i < n; ++i) r[i] -= alpha * ap[i];
        const double rr_new = pairwise_dot(r.values(), r.values());
        const double beta = rr_new / rr;
        for (std::int64_t i = 0; i < n; ++i) pdir[i] = r[i] + beta * pdir[i];
        rr = rr_new;
        ++it;
    }
    if (std::sqrt(rr) > tol && it >= max_iter) {
        std::ostringstream os;
        os << "diffusion solve: conjugate gradients did not reach residual " << tol << " in "
           << max_iter << " iterations (residual " << std::sqrt(rr) << ")";
        throw std::runtime_error(os.str());
    }
    if (stats) *stats = {it, std::sqrt(rr)};

    Field v = f;
    for (std::int64_t i = 0; i < n; ++i) v[i] += w[i];
    return v;
}

}  // namespace fastconv
