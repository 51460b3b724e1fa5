#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "fracwave/spectral.hpp"
#include "fracwave/types.hpp"

namespace fracwave::direct {

/// Full statement of the initial-boundary value problem
///   d_t^alpha u - Lu = f(t) h(x),  u(0,.) = phi,  u_t(0,.) = psi,  u|_boundary = 0.
///
/// basis may be supplied directly; otherwise it is built from op with the
/// (N, J) controls.  N == 0 requests automatic truncation from the projected
/// coefficient tails.  f/h absent mean a zero source.
struct ProblemSpec {
    FracOrder ord{1.5};
    TimeGrid grid{1.0, 256};
    spectral::OperatorSpec op;
    std::size_t N = 0;
    std::size_t J = 256;
    std::shared_ptr<const spectral::ModalBasis> basis;  // optional, overrides (op, N, J)
    std::vector<double> phi, psi;                       // spatial samples on the basis grid
    std::optional<TimeSeries> f;
    std::optional<std::vector<double>> h;
    double mlf_tol = 1e-12;
};

/// One mode's evolution: nodal u_n and u_n', plus the cached kernel tables
/// E_{alpha,beta}(-lambda t_i^alpha) they were built from (beta = 1, 2, alpha,
/// alpha-1) and the unit-source velocity convolution w (empty when f absent).
/// The tables let observers integrate the t^{alpha-1}-type factors with
/// singular quadrature instead of differencing the assembled series.
struct ModeSolution {
    double lambda = 0;
    double phi_n = 0, psi_n = 0, h_n = 0;
    std::vector<double> u;  // u_n(t_i)
    std::vector<double> v;  // u_n'(t_i)
    std::vector<double> e1, e2, eaa, eaa1;
    std::vector<double> w;  // int_0^t (t-s)^{a-2} E_{a,a-1}(-l (t-s)^a) f(s) ds
};

/// Modal solution container.  Spatial fields are synthesized on demand.
struct Field {
    FracOrder ord{1.5};
    TimeGrid grid{1.0, 256};
    std::shared_ptr<const spectral::ModalBasis> basis;
    std::vector<ModeSolution> modes;
    std::optional<TimeSeries> f;  // temporal factor used (if any)

    bool truncation_warning = false;  // share of the last mode in the data energy > 1e-6
    double truncation_share = 0.0;

    std::size_t n_modes() const { return modes.size(); }
    /// u(t_i, .) on the basis grid.
    std::vector<double> u_at(std::size_t i) const;
    /// u_t(t_i, .) on the basis grid.
    std::vector<double> ut_at(std::size_t i) const;
    /// max over interior time nodes of |d_t^alpha u_n + lambda_n u_n - h_n f|.
    double mode_residual(std::size_t n) const;
};

/// The basis a ProblemSpec resolves to: the explicitly supplied one, or a
/// fresh construction from (op, N, J) (N == 0 defaults to min(J/4, 64)).
std::shared_ptr<const spectral::ModalBasis> resolve_basis(const ProblemSpec& p);

/// Evolves a single mode:
///   u_n(t) = phi_n E_{a,1}(-l t^a) + psi_n t E_{a,2}(-l t^a)
///            + h_n int_0^t (t-s)^{a-1} E_{a,a}(-l (t-s)^a) f(s) ds
///   u_n'(t) = -l phi_n t^{a-1} E_{a,a}(-l t^a) + psi_n E_{a,1}(-l t^a)
///            + h_n int_0^t (t-s)^{a-2} E_{a,a-1}(-l (t-s)^a) f(s) ds
/// with both convolutions by singular product integration (the (t-s)^{a-2}
/// kernel is unbounded; naive trapezoid is not an option).
/// u_n(0) = phi_n and u_n'(0) = psi_n exactly.  Throws DomainError for l <= 0.
ModeSolution modal_evolve(const FracOrder& ord, const TimeGrid& grid, double lambda,
                          double phi_n, double psi_n, double h_n,
                          const std::optional<TimeSeries>& f, double mlf_tol = 1e-12);

/// Projects the data, evolves all modes (data-parallel) and assembles a Field.
Field direct_solve(const ProblemSpec& p);

/// g(t_i) = sum_n (h, X_n) u_n(t_i): the spatially averaged observation.
TimeSeries observe_g(const Field& fld, const std::vector<double>& h);

/// omega(x_j) = sum_n [int_0^T f u_n' dt] X_n(x_j): the time-averaged
/// velocity observation.  The time integral splits structurally:
/// the t^{a-1} and t^{a-2}-type factors are integrated with singular product
/// quadrature, the smooth factor with the trapezoid rule.
std::vector<double> observe_omega(const Field& fld, const TimeSeries& f);

/// Per-mode time integrals I_n = int_0^T f u_n' dt (the modal content of
/// observe_omega, exposed for the inverse machinery and tests).
std::vector<double> omega_coefficients(const Field& fld, const TimeSeries& f);

}  // namespace fracwave::direct
