#include <cmath>
#include <vector>

#include "fracwave/errors.hpp"
#include "fracwave/fracops.hpp"
#include "fracwave/mlf.hpp"

namespace fracwave::mlf {

double frac_identity_residual(FracIdentity kind, const FracOrder& ord, double lambda,
                              const TimeGrid& grid, const std::function<double(double)>& f) {
    if (lambda < 0.0) throw DomainError("frac_identity_residual: lambda must be >= 0");
    if (grid.M < 64) throw DomainError("frac_identity_residual: need at least 64 time steps");
    const double a = ord.alpha;
    const double g = ord.gamma;
    const std::size_t M = grid.M;
    const double tol = 1e-13;
    auto E = [&](double beta, double t) {
        return mlf_eval({a, beta, tol}, -lambda * std::pow(t, a));
    };

    TimeSeries lhs_in = TimeSeries::zeros(grid);
    std::vector<double> rhs(M + 1, 0.0);
    switch (kind) {
        case FracIdentity::kTa1EaaToE1:
            for (std::size_t i = 0; i <= M; ++i) {
                double t = grid.node(i);
                lhs_in.v[i] = i == 0 ? 0.0 : std::pow(t, a - 1.0) * E(a, t);
                rhs[i] = E(1.0, t);
            }
            break;
        case FracIdentity::kE1ToTE2:
            for (std::size_t i = 0; i <= M; ++i) {
                double t = grid.node(i);
                lhs_in.v[i] = E(1.0, t);
                rhs[i] = -lambda * t * E(2.0, t);
            }
            break;
        case FracIdentity::kDuhamelVelocity: {
            std::function<double(double)> ff = f ? f : [](double) { return 1.0; };
            std::vector<double> fv(M + 1), eaa1(M + 1), eaa(M + 1);
            for (std::size_t i = 0; i <= M; ++i) {
                double t = grid.node(i);
                fv[i] = ff(t);
                eaa1[i] = E(a - 1.0, t);
                eaa[i] = E(a, t);
            }
            lhs_in.v = fracops::conv_singular(a - 2.0, eaa1, fv, grid);
            std::vector<double> conv = fracops::conv_singular(a - 1.0, eaa, fv, grid);
            for (std::size_t i = 0; i <= M; ++i) rhs[i] = fv[i] - lambda * conv[i];
            break;
        }
    }

    TimeSeries d = fracops::caputo_deriv_low(lhs_in, g, fracops::Startup::kSingularBasis);
    double worst = 0.0;
    for (std::size_t i = 1; i < M; ++i) {
        worst = std::max(worst, std::abs(d.v[i] - rhs[i]));
    }
    return worst;
}

}  // namespace fracwave::mlf
