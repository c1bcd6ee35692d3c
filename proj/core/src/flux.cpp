#include "fastconv/flux.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fastconv {

void validate(const FluxParams& p, int dim) {
    const double q_min = 1.0 - 1.0 / static_cast<double>(dim);
    if (!(p.q > q_min)) {
        std::ostringstream os;
        os << "flux: q = " << p.q << " violates q > 1 - 1/N = " << q_min << " for N = " << dim
           << " (q <= 1 - 1/N loses mass conservation)";
        throw std::invalid_argument(os.str());
    }
    if (!(p.q > 0.0)) throw std::invalid_argument("flux: q must be positive");
    if (!(p.eta >= 0.0)) throw std::invalid_argument("flux: eta must be >= 0");
    if (p.u_floor < 0.0) throw std::invalid_argument("flux: u_floor must be >= 0");
}

double flux_exact(const FluxParams& p, double s) {
    if (s == 0.0) return 0.0;
    const double mag = std::pow(std::abs(s), p.q);
    return s > 0.0 ? mag : -mag;
}

double flux_eta(const FluxParams& p, double s) {
    if (p.eta == 0.0) return flux_exact(p, s);
    const double eta_pow = std::pow(p.eta, 0.5 * p.q);
    if (s >= 0.0 || !p.odd_extension)
        return std::pow(s * s + p.eta, 0.5 * p.q) - eta_pow;
    return -(std::pow(s * s + p.eta, 0.5 * p.q) - eta_pow);
}

double lipschitz_bound(const FluxParams& p, double umax) {
    if (p.eta > 0.0) {
        if (p.q <= 1.0) return p.q * std::pow(p.eta, 0.5 * (p.q - 1.0));
        return p.q * std::pow(umax * umax + p.eta, 0.5 * (p.q - 1.0));
    }
    if (p.q >= 1.0) return p.q * std::pow(std::max(umax, 0.0), p.q - 1.0);
    if (!(p.u_floor > 0.0))
        throw std::invalid_argument(
            "flux: eta = 0 with q < 1 has unbounded slope at u = 0; set a positive u_floor");
    return p.q * std::pow(p.u_floor, p.q - 1.0);
}

double numerical_flux(const FluxParams& p, double a, double b) {
    const double fa = flux_eta(p, a);
    if (a == b) return fa;
    const double fb = flux_eta(p, b);
    if (a < b) {
        double m = std::min(fa, fb);
        if (a < 0.0 && 0.0 < b) m = std::min(m, flux_eta(p, 0.0));
        return m;
    }
    double m = std::max(fa, fb);
    if (b < 0.0 && 0.0 < a) m = std::max(m, flux_eta(p, 0.0));
    return m;
}

Field convection_divergence(const FluxParams& p, const Field& u) {
    const Grid& g = u.grid();
    Field out(g);
    const int an = g.axis_xn();
    const double inv_h = 1.0 / g.spacing(an);
    const std::int64_t nn = g.cells(an);
    const std::int64_t lines = g.dim() == 1 ? 1 : g.cells(0);

    for (std::int64_t line = 0; line < lines; ++line) {
        const std::int64_t base = line * nn;
        // Faces -1/2 and nn-1/2 carry zero flux; interior face i+1/2 carries
        // F(u_i, u_{i+1}). div_i = (F_{i+1/2} - F_{i-1/2}) / h.
        double flux_left = 0.0;
        for (std::int64_t i = 0; i < nn; ++i) {
            const double flux_right =
                (i + 1 < nn) ? numerical_flux(p, u[base + i], u[base + i + 1]) : 0.0;
            out[base + i] = (flux_right - flux_left) * inv_h;
            flux_left = flux_right;
        }
    }
    return out;
}

}  // namespace fastconv
