#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "fracwave/types.hpp"

namespace fracwave::spectral {

/// A scalar coefficient: either a constant or a sampled closed form.
struct Coefficient {
    bool is_constant = true;
    double value = 1.0;
    std::function<double(double)> fn;

    static Coefficient constant(double v) {
        Coefficient c;
        c.is_constant = true;
        c.value = v;
        return c;
    }
    static Coefficient of(std::function<double(double)> f) {
        Coefficient c;
        c.is_constant = false;
        c.fn = std::move(f);
        return c;
    }
    double operator()(double x) const { return is_constant ? value : fn(x); }
};

/// Elliptic operator L = d/dx(a(x) d/dx) - c(x) on the interval (0, ell) with
/// Dirichlet boundary conditions.  Requires a >= delta > 0 and c >= 0.
struct OperatorSpec {
    double ell = 1.0;
    Coefficient a = Coefficient::constant(1.0);
    Coefficient c = Coefficient::constant(0.0);
    double delta = 1e-8;  // ellipticity floor
};

/// Eigenvalues, sampled orthonormal eigenfunctions and quadrature weights of
/// -L.  Immutable after construction; safe to share across threads.
///
/// For a rectangle the spatial grid is flattened row-major over (x1, x2); the
/// 1-D members x/w hold the flattened coordinates' weights, and x1/x2 keep the
/// axis grids.
struct ModalBasis {
    bool is_interval = true;
    std::vector<double> x;       // node coordinates (interval) / flattened index order (rectangle)
    std::vector<double> w;       // trapezoid quadrature weights per node
    std::vector<double> lambda;  // ascending, > 0
    std::vector<std::vector<double>> X;  // X[n][node], discretely orthonormal

    // rectangle metadata (empty for intervals)
    std::vector<double> x1, x2;
    std::size_t J1 = 0, J2 = 0;

    std::size_t n_modes() const { return lambda.size(); }
    std::size_t n_nodes() const { return w.size(); }
};

using ModalCoeffs = std::vector<double>;

/// Dirichlet eigenpairs of -L on (0, ell), J+1 grid nodes, first N modes.
///
/// Constant coefficients use the closed forms lambda_n = a (n pi / ell)^2 + c
/// and X_n = sqrt(2/ell) sin(n pi x / ell) (renormalized in the discrete inner
/// product, in which the sampled sines are exactly orthogonal).  Variable
/// coefficients build the conservative second-order finite-difference matrix
/// (a at half-nodes) and solve the symmetric tridiagonal eigenproblem.
///
/// Throws ResolutionError when N > J/4 or J < 64; EllipticityError when a
/// dips below op.delta at a sampled half-node; DomainError when c < 0.
ModalBasis eigenpairs(const OperatorSpec& op, std::size_t N, std::size_t J);

/// Eigenvalues only (same discretization), for refinement studies at large J.
std::vector<double> eigenvalues_only(const OperatorSpec& op, std::size_t N, std::size_t J);

/// Tensor-product basis on the rectangle (0, op1.ell) x (0, op2.ell) for the
/// separable operator L = L_x + L_y.  Pair eigenvalues lambda_m + lambda_n are
/// sorted ascending with stable (m, n) lexicographic tie-breaking; clusters
/// within 1e-10 relative are degenerate pairs and any orthonormal span is
/// acceptable.
ModalBasis tensor_basis(const OperatorSpec& op1, const OperatorSpec& op2, std::size_t N,
                        std::size_t J1, std::size_t J2);

/// Coefficients (f, X_n) under the basis quadrature weights.
ModalCoeffs project(const std::vector<double>& fvals, const ModalBasis& basis);

/// Pointwise sum  sum_n c_n X_n(x_j).
std::vector<double> synthesize(const ModalCoeffs& coeffs, const ModalBasis& basis);

/// Fourth-order first derivative of uniform samples (5-point stencils,
/// one-sided at the ends).  Needs at least 5 samples.
std::vector<double> derivative4(const std::vector<double>& f, double dx);

/// Parseval / Bessel diagnostics for a sampled h with Dirichlet data:
///   parseval_gap = | sum_n h_n^2 - ||h||^2 |   (discrete L2 norm)
///   bessel_lhs   = sum_n lambda_n h_n^2
///   bessel_rhs   = int a (h')^2 + c h^2 dx     (h' by 4th-order differences)
/// and holds = (bessel_lhs <= bessel_rhs * (1 + 1e-6)).  Interval bases only.
struct BesselReport {
    double parseval_gap = 0;
    double bessel_lhs = 0;
    double bessel_rhs = 0;
    bool holds = true;
};
BesselReport bessel_diagnostic(const std::vector<double>& fvals, const ModalBasis& basis,
                               const OperatorSpec& op);

}  // namespace fracwave::spectral
