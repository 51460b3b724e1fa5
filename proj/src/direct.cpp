#include "fracwave/direct.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fracwave/errors.hpp"
#include "fracwave/fracops.hpp"
#include "fracwave/mlf.hpp"
#include "fracwave/util.hpp"

namespace fracwave::direct {
namespace {

void check_boundary(const std::vector<double>& s, const char* name) {
    if (s.empty()) return;
    double scale = 1.0;
    for (double v : s) scale = std::max(scale, std::abs(v));
    if (std::abs(s.front()) > 1e-8 * scale || std::abs(s.back()) > 1e-8 * scale) {
        throw BoundaryError(std::string(name) + " violates the Dirichlet boundary values");
    }
}

std::vector<double> zeros_or(const std::vector<double>& s, std::size_t n, const char* name) {
    if (s.empty()) return std::vector<double>(n, 0.0);
    if (s.size() != n) {
        throw GridMismatch(std::string(name) + ": sample count " + std::to_string(s.size()) +
                           " does not match the basis grid " + std::to_string(n));
    }
    return s;
}

}  // namespace

ModeSolution modal_evolve(const FracOrder& ord, const TimeGrid& grid, double lambda,
                          double phi_n, double psi_n, double h_n,
                          const std::optional<TimeSeries>& f, double mlf_tol) {
    if (!(lambda > 0.0)) {
        throw DomainError("modal_evolve: lambda must be positive, got " + std::to_string(lambda));
    }
    if (f && !(f->grid == grid)) {
        throw GridMismatch("modal_evolve: f is sampled on a different grid");
    }
    const double a = ord.alpha;
    const std::size_t M = grid.M;

    ModeSolution m;
    m.lambda = lambda;
    m.phi_n = phi_n;
    m.psi_n = psi_n;
    m.h_n = h_n;
    m.e1.resize(M + 1);
    m.e2.resize(M + 1);
    m.eaa.resize(M + 1);
    m.eaa1.resize(M + 1);
    for (std::size_t i = 0; i <= M; ++i) {
        double z = -lambda * std::pow(grid.node(i), a);
        m.e1[i] = mlf::mlf_eval({a, 1.0, mlf_tol}, z);
        m.e2[i] = mlf::mlf_eval({a, 2.0, mlf_tol}, z);
        m.eaa[i] = mlf::mlf_eval({a, a, mlf_tol}, z);
        m.eaa1[i] = mlf::mlf_eval({a, a - 1.0, mlf_tol}, z);
    }

    const bool sourced = f.has_value() && h_n != 0.0;
    std::vector<double> duh;
    if (f) {
        duh = fracops::conv_singular(a - 1.0, m.eaa, f->v, grid);
        m.w = fracops::conv_singular(a - 2.0, m.eaa1, f->v, grid);
    }

    m.u.resize(M + 1);
    m.v.resize(M + 1);
    for (std::size_t i = 0; i <= M; ++i) {
        double t = grid.node(i);
        double ta1 = i == 0 ? 0.0 : std::pow(t, a - 1.0);
        m.u[i] = phi_n * m.e1[i] + psi_n * t * m.e2[i] + (sourced ? h_n * duh[i] : 0.0);
        m.v[i] = -lambda * phi_n * ta1 * m.eaa[i] + psi_n * m.e1[i] +
                 (sourced ? h_n * m.w[i] : 0.0);
    }
    m.u[0] = phi_n;
    m.v[0] = psi_n;
    return m;
}

std::shared_ptr<const spectral::ModalBasis> resolve_basis(const ProblemSpec& p) {
    if (p.basis) return p.basis;
    std::size_t n = p.N > 0 ? p.N : std::min<std::size_t>(p.J / 4, 64);
    return std::make_shared<spectral::ModalBasis>(spectral::eigenpairs(p.op, n, p.J));
}

Field direct_solve(const ProblemSpec& p) {
    std::shared_ptr<const spectral::ModalBasis> basis = resolve_basis(p);
    const std::size_t nodes = basis->n_nodes();

    std::vector<double> phi = zeros_or(p.phi, nodes, "phi");
    std::vector<double> psi = zeros_or(p.psi, nodes, "psi");
    check_boundary(phi, "phi");
    check_boundary(psi, "psi");
    std::vector<double> h;
    if (p.h) {
        h = zeros_or(*p.h, nodes, "h");
        check_boundary(h, "h");
    } else {
        h.assign(nodes, 0.0);
    }
    if (p.f && !(p.f->grid == p.grid)) {
        throw GridMismatch("direct_solve: f is sampled on a different time grid");
    }

    spectral::ModalCoeffs phin = spectral::project(phi, *basis);
    spectral::ModalCoeffs psin = spectral::project(psi, *basis);
    spectral::ModalCoeffs hn = spectral::project(h, *basis);

    std::size_t N = basis->n_modes();
    if (p.N == 0 && !p.basis) {
        // Automatic truncation: drop trailing modes whose worst-case series
        // contribution (initial data plus Duhamel bound) is negligible.
        double fmax = 0.0;
        if (p.f) {
            for (double v : p.f->v) fmax = std::max(fmax, std::abs(v));
        }
        const double T = p.grid.T;
        const double duh = std::pow(T, p.ord.alpha) / std::tgamma(p.ord.alpha + 1.0);
        std::vector<double> s(N);
        double total = 0.0;
        for (std::size_t n = 0; n < N; ++n) {
            s[n] = std::abs(phin[n]) + T * std::abs(psin[n]) + std::abs(hn[n]) * fmax * duh;
            total += s[n];
        }
        if (total > 0.0) {
            double tail = 0.0;
            std::size_t keep = N;
            for (std::size_t n = N; n-- > 1;) {
                tail += s[n];
                if (tail >= 1e-10 * total) break;
                keep = n;
            }
            N = keep;
        }
    }

    Field fld;
    fld.ord = p.ord;
    fld.grid = p.grid;
    fld.basis = basis;
    fld.f = p.f;
    fld.modes.resize(N);
    parallel_for(N, [&](std::size_t n) {
        fld.modes[n] = modal_evolve(p.ord, p.grid, basis->lambda[n], phin[n], psin[n], hn[n],
                                    p.f, p.mlf_tol);
    });

    double total = 0.0, last = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
        double e = phin[n] * phin[n] + psin[n] * psin[n] + hn[n] * hn[n];
        total += e;
        if (n + 1 == N) last = e;
    }
    if (total > 0.0) {
        fld.truncation_share = last / total;
        fld.truncation_warning = fld.truncation_share > 1e-6;
    }
    return fld;
}

std::vector<double> Field::u_at(std::size_t i) const {
    spectral::ModalCoeffs c(modes.size());
    for (std::size_t n = 0; n < modes.size(); ++n) c[n] = modes[n].u[i];
    return spectral::synthesize(c, *basis);
}

std::vector<double> Field::ut_at(std::size_t i) const {
    spectral::ModalCoeffs c(modes.size());
    for (std::size_t n = 0; n < modes.size(); ++n) c[n] = modes[n].v[i];
    return spectral::synthesize(c, *basis);
}

double Field::mode_residual(std::size_t n) const {
    const ModeSolution& m = modes[n];
    TimeSeries u{grid, m.u};
    TimeSeries d = fracops::caputo_deriv_high(u, ord);
    double worst = 0.0;
    for (std::size_t i = 1; i < grid.M; ++i) {
        double src = (f && m.h_n != 0.0) ? m.h_n * f->v[i] : 0.0;
        worst = std::max(worst, std::abs(d.v[i] + m.lambda * m.u[i] - src));
    }
    return worst;
}

TimeSeries observe_g(const Field& fld, const std::vector<double>& h) {
    spectral::ModalCoeffs hn = spectral::project(h, *fld.basis);
    TimeSeries g = TimeSeries::zeros(fld.grid);
    for (std::size_t i = 0; i <= fld.grid.M; ++i) {
        long double s = 0.0L;
        for (std::size_t n = 0; n < fld.modes.size(); ++n) {
            s += static_cast<long double>(hn[n]) * fld.modes[n].u[i];
        }
        g.v[i] = static_cast<double>(s);
    }
    return g;
}

std::vector<double> omega_coefficients(const Field& fld, const TimeSeries& f) {
    if (!(f.grid == fld.grid)) {
        throw GridMismatch("observe_omega: weight f is sampled on a different grid");
    }
    const double a = fld.ord.alpha;
    const std::size_t M = fld.grid.M;
    std::vector<double> I(fld.modes.size(), 0.0);
    parallel_for(fld.modes.size(), [&](std::size_t n) {
        const ModeSolution& m = fld.modes[n];
        // int f u_n' dt  =  -l phi_n int t^{a-1} E_aa f dt  +  psi_n int E_1 f dt
        //                   + h_n int t^{a-1} q_n(t) f dt,   q_n = w_n / t^{a-1}.
        double acc = 0.0;
        if (m.phi_n != 0.0) {
            acc -= m.lambda * m.phi_n * fracops::integral_singular(a - 1.0, m.eaa, f.v, fld.grid);
        }
        if (m.psi_n != 0.0) {
            TimeSeries prod = TimeSeries::zeros(fld.grid);
            for (std::size_t i = 0; i <= M; ++i) prod.v[i] = m.e1[i] * f.v[i];
            acc += m.psi_n * fracops::trapezoid(prod);
        }
        if (m.h_n != 0.0 && !m.w.empty()) {
            std::vector<double> q(M + 1);
            q[0] = fld.f->v[0] / std::tgamma(a);
            for (std::size_t i = 1; i <= M; ++i) {
                q[i] = m.w[i] / std::pow(fld.grid.node(i), a - 1.0);
            }
            acc += m.h_n * fracops::integral_singular(a - 1.0, q, f.v, fld.grid);
        }
        I[n] = acc;
    });
    return I;
}

std::vector<double> observe_omega(const Field& fld, const TimeSeries& f) {
    return spectral::synthesize(omega_coefficients(fld, f), *fld.basis);
}

}  // namespace fracwave::direct
