#pragma once

#include <cstddef>
#include <vector>

#include "fracwave/types.hpp"

namespace fracwave::fracops {

/// How the first few nodes of a discrete Caputo derivative are produced.
///
/// kPolynomial applies the plain product-integration scheme everywhere; it is
/// exact on affine data (and, for the order-in-(1,2) operator, on quadratics)
/// but loses accuracy near t=0 when the input carries a t^alpha component.
///
/// kSingularBasis first fits y - y(0) on nodes 1..3 in the basis
/// {t^mu, t, t^2} (mu = the fractional order's signature power), applies the
/// derivative to the fitted part in closed form and the plain scheme to the
/// remainder, which then vanishes through node 3.  This restores full order
/// for inputs with algebraic startup behavior.  The fit degenerates as the
/// signature power approaches an integer, so it automatically falls back to
/// kPolynomial outside a safe parameter window (documented per operator).
enum class Startup { kPolynomial, kSingularBasis };

/// Riemann-Liouville fractional integral I^mu y, mu in (0, 2), evaluated at
/// the grid nodes by exact integration of the piecewise-linear interpolant
/// (product trapezoid).  Node 0 is 0.  Exact for affine y.
/// use_fft selects an FFT convolution path (same weights, same result up to
/// roundoff); the direct path is the reference.
TimeSeries rl_integral(const TimeSeries& y, double mu, bool use_fft = false);

/// Nodal first derivative: second-order central differences, one-sided
/// three-point stencils at both ends.
TimeSeries ddt(const TimeSeries& y);

/// Nodal second derivative: central differences in the interior, second-order
/// one-sided four-point stencils at the two end nodes (exact on cubics).
TimeSeries d2dt2(const TimeSeries& y);

/// Caputo derivative of order gamma in (0,1): I^{1-gamma} applied to ddt(y),
/// so the plain path satisfies exactly
///     caputo_deriv_low(y, gamma, kPolynomial) == rl_integral(ddt(y), 1-gamma)
/// Node 0 is 0.  kSingularBasis uses the {t^gamma, t, t^2} startup model when
/// gamma lies in [0.05, 0.9].
TimeSeries caputo_deriv_low(const TimeSeries& y, double gamma,
                            Startup startup = Startup::kPolynomial);

/// Caputo derivative of order alpha in (1,2): I^{2-alpha} applied to d2dt2(y).
/// kSingularBasis (the default) uses the {t^alpha, t, t^2} startup model when
/// alpha lies in (1, 1.9]; above that the plain scheme already has order
/// alpha - 1 >= 0.9 and the fit would be ill-conditioned (t^alpha ~ t^2).
/// With kSingularBasis node 0 carries the model's t->0+ limit; with
/// kPolynomial it is 0.
TimeSeries caputo_deriv_high(const TimeSeries& y, const FracOrder& ord,
                             Startup startup = Startup::kSingularBasis);

/// max over interior nodes of
///   | RL^gamma y  -  Caputo^gamma y  -  y(0) t^{-gamma}/Gamma(1-gamma) |
/// where RL^gamma y is discretized as y(0) t^{-gamma}/Gamma(1-gamma) plus
/// I^{1-gamma} of the piecewise-constant slope density, and the Caputo term
/// uses the kPolynomial path.  Zero (to roundoff) for constant y.
double rl_caputo_bridge_residual(const TimeSeries& y, double gamma);

/// Convolution against a weakly singular kernel, by exact moments of the
/// piecewise-linear interpolant: for every node i,
///   out[i] = int_0^{t_i} tau^p * L[w_j * f_{i-j}](tau) dtau,   p > -1,
/// where L[G](tau) interpolates the nodal products G_j = w[j]*f[i-j]
/// linearly in tau.  w and f live on the same grid.  out[0] = 0.
std::vector<double> conv_singular(double p, const std::vector<double>& w,
                                  const std::vector<double>& f, const TimeGrid& g);

/// int_0^T t^p * L[w_i * f_i](t) dt with the same product-integration rule.
double integral_singular(double p, const std::vector<double>& w,
                         const std::vector<double>& f, const TimeGrid& g);

/// The panel weights behind conv_singular / integral_singular:
///   int_{t_j}^{t_{j+1}} tau^p * L[G](tau) dtau = P[j] G_j + Q[j] G_{j+1}
/// for a piecewise-linear G.  Exposed for sequential Volterra stepping, where
/// the convolution cannot be formed wholesale.
struct SingularPanelWeights {
    std::vector<double> P, Q;  // per panel j = 0..M-1
};
SingularPanelWeights singular_panel_weights(double p, const TimeGrid& g);

/// int_0^T (T-t)^p * L[y](t) dt: the weight is singular at the right end.
double integral_singular_right(double p, const std::vector<double>& y, const TimeGrid& g);

/// Trapezoid rule over the series' own grid.
double trapezoid(const TimeSeries& y);

/// Energy-inequality probe for a scalar signal theta on [0, T]:
///   lhs = int_0^T theta'(t) * (d^alpha theta)(t) dt
///   rhs = 1/(2 Gamma(1-gamma)) int_0^T (T-t)^{-gamma} theta'(t)^2 dt
///         - T^{1-gamma} / (2 Gamma(2-gamma)) * theta'(0)^2,
/// gamma = alpha - 1.  The inequality lhs >= rhs holds for smooth theta;
/// gap = lhs - rhs should be >= -(discretization error).
struct EnergyGap {
    double lhs;
    double rhs;
    double gap;
};
EnergyGap energy_inequality_gap(const TimeSeries& theta, const FracOrder& ord);

}  // namespace fracwave::fracops
