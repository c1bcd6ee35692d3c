#pragma once

#include <cstdint>
#include <string>

#include "fastconv/grid.hpp"

namespace fastconv {

/// Diffusion part L of the equation, discretized with the second-order
/// stencil and zero-Neumann closure (missing neighbors reflect, so constants
/// are annihilated and the operator is symmetric positive semidefinite).
enum class OperatorKind {
    full_laplacian,       // L = -Delta, all axes
    reduced_laplacian,    // L = -Delta_x', transverse axes only (none in dim 1)
    reduced_plus_axial,   // L = -Delta_x' - eps * d^2/dx_N^2
};

struct OperatorChoice {
    OperatorKind kind = OperatorKind::full_laplacian;
    double eps = 0.0;  // axial coefficient, reduced_plus_axial only

    void validate() const;
    /// Diffusion coefficient on the given axis of a dim-d grid.
    double coeff(int axis, int dim) const;
    /// True when every coefficient vanishes (dim-1 reduced Laplacian).
    bool is_zero(int dim) const;
    std::string name() const;
};

/// y = A x for the chosen operator (A is the discrete L, so A >= 0).
void apply_operator(const OperatorChoice& op, const Field& x, Field& y);

/// <A x, x> with the face-difference identity; this is the discrete
/// squared gradient seminorm sum_faces coeff * (dx_face u)^2 * vol.
double gradient_energy(const OperatorChoice& op, const Field& x);

struct SolveStats {
    int iterations = 0;
    double residual = 0.0;
};

/// Solves (I + theta dt A) v = (I - (1-theta) dt A) f by conjugate gradients
/// on the increment w = v - f, whose right-hand side -dt A f has exactly zero
/// mean. Krylov iterates inherit that zero mean, so the solve conserves mass
/// to rounding rather than to the residual tolerance. Residual target is
/// lin_tol * ||f||_2 (unweighted vector norm); exceeding max_iter throws.
Field diffuse_backward(const OperatorChoice& op, const Field& f, double dt, double theta,
                       double lin_tol, int max_iter, SolveStats* stats = nullptr);

}  // namespace fastconv
