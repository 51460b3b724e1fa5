#pragma once

#include <functional>

#include "fracwave/types.hpp"

namespace fracwave::mlf {

/// Parameters for the two-parameter Mittag-Leffler function E_{alpha,beta}.
/// The solver only ever needs beta in {1, 2, alpha, alpha-1, 2-alpha}, but any
/// real beta is accepted.
struct MlfParams {
    double alpha;
    double beta;
    double tol = 1e-12;   // absolute accuracy target, must lie in (1e-15, 1e-3)
};

/// Evaluates E_{alpha,beta}(z) for z <= 0.
///
/// Three regimes, switched on |z|:
///   * |z| <= 5: Taylor series in extended precision;
///   * moderate |z|: Laplace-type branch-cut representation
///       E(-x) = (2/alpha) Re[e^{s} s^{1-beta}]  (pole pair, only for alpha > 1)
///             + (1/pi) int_0^inf e^{-r} r^{alpha-beta}
///               [r^alpha sin(pi beta) - x sin(pi(alpha-beta))] /
///               [r^{2 alpha} + 2 x r^alpha cos(pi alpha) + x^2] dr,
///     with s = x^{1/alpha} e^{i pi/alpha}, integrated by composite
///     Gauss-Legendre on graded panels (plus dedicated panels around the
///     near-pole of the density when cos(pi alpha) < 0);
///   * large |z|: power asymptotics  -sum_{k>=1} z^{-k}/Gamma(beta-alpha k)
///     plus the same oscillatory pole-pair term.  The switch radius grows with
///     alpha so the dropped remainder (of size ~e^{-|z|^{1/alpha}}) stays
///     below tol.
///
/// Throws DomainError for alpha outside (0,2], z > 0, or tol outside
/// (1e-15, 1e-3); ConvergenceError if no regime can reach tol (not reachable
/// for the supported parameter set -- treated as a bug signal).
double mlf_eval(const MlfParams& p, double z);

/// First-derivative identities checked by centered differences:
///   kE1ToEaa:      d/dt E_{a,1}(-l t^a)            = -l t^{a-1} E_{a,a}(-l t^a)
///   kTE2ToE1:      d/dt [t E_{a,2}(-l t^a)]        = E_{a,1}(-l t^a)
///   kTa1EaaToEaa1: d/dt [t^{a-1} E_{a,a}(-l t^a)]  = t^{a-2} E_{a,a-1}(-l t^a)
enum class DerivIdentity { kE1ToEaa, kTE2ToE1, kTa1EaaToEaa1 };

/// |centered difference of the left side at t - analytic right side|.
/// Requires t > h > 0 and lambda >= 0.
double deriv_identity_residual(DerivIdentity kind, const FracOrder& ord, double lambda,
                               double t, double h);

/// Mixed-order identities discretized on a uniform grid (the fractional
/// derivative of order alpha-1 comes from the discrete operators in
/// fracwave::fracops):
///   kTa1EaaToE1:  d^{a-1}[t^{a-1} E_{a,a}(-l t^a)] = E_{a,1}(-l t^a)
///   kE1ToTE2: d^{a-1}[E_{a,1}(-l t^a)]         = -l t E_{a,2}(-l t^a)
///   kDuhamelVelocity:       d^{a-1} int_0^t f(s)(t-s)^{a-2} E_{a,a-1}(-l (t-s)^a) ds
///                   = f(t) - l int_0^t f(s)(t-s)^{a-1} E_{a,a}(-l (t-s)^a) ds
///
/// Note the sign of kTa1EaaToE1: differentiating the defining series term by
/// term gives +E_{a,1}(-l t^a) (the function vanishes at t=0+, so the Caputo
/// and Riemann-Liouville versions coincide and both are +).
enum class FracIdentity { kTa1EaaToE1, kE1ToTE2, kDuhamelVelocity };

/// Max over interior grid nodes of |discrete left side - right side|.
/// f is only used by kDuhamelVelocity (defaults to f == 1 when absent).
double frac_identity_residual(FracIdentity kind, const FracOrder& ord, double lambda,
                              const TimeGrid& grid,
                              const std::function<double(double)>& f = {});

}  // namespace fracwave::mlf
