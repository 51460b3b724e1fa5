#include "fracwave/spectral.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <tuple>

#include "fracwave/errors.hpp"

namespace fracwave::spectral {
namespace {

constexpr double kPi = 3.14159265358979323846;

void validate_resolution(std::size_t N, std::size_t J, const char* who) {
    if (J < 64) {
        throw ResolutionError(std::string(who) + ": spatial resolution J must be >= 64, got " +
                              std::to_string(J));
    }
    if (N == 0) throw ResolutionError(std::string(who) + ": need at least one mode");
    if (N > J / 4) {
        throw ResolutionError(std::string(who) + ": N = " + std::to_string(N) +
                              " exceeds J/4 = " + std::to_string(J / 4));
    }
}

std::vector<double> grid_nodes(double ell, std::size_t J) {
    std::vector<double> x(J + 1);
    for (std::size_t j = 0; j <= J; ++j) x[j] = ell * static_cast<double>(j) / static_cast<double>(J);
    x[J] = ell;
    return x;
}

std::vector<double> trapezoid_weights(double ell, std::size_t J) {
    double d = ell / static_cast<double>(J);
    std::vector<double> w(J + 1, d);
    w[0] = 0.5 * d;
    w[J] = 0.5 * d;
    return w;
}

void check_coefficients(const OperatorSpec& op, std::size_t J) {
    double d = op.ell / static_cast<double>(J);
    for (std::size_t j = 0; j < J; ++j) {
        double xm = (static_cast<double>(j) + 0.5) * d;
        double av = op.a(xm);
        if (!(av >= op.delta)) {
            throw EllipticityError("eigenpairs: a(" + std::to_string(xm) + ") = " +
                                   std::to_string(av) + " is below the ellipticity floor " +
                                   std::to_string(op.delta));
        }
    }
    for (std::size_t j = 0; j <= J; ++j) {
        double xv = static_cast<double>(j) * d;
        double cv = op.c(xv);
        if (cv < -1e-12) {
            throw DomainError("eigenpairs: c(" + std::to_string(xv) + ") = " +
                              std::to_string(cv) + " is negative");
        }
    }
}

void renormalize(std::vector<double>& vec, const std::vector<double>& w) {
    long double s = 0.0L;
    for (std::size_t j = 0; j < vec.size(); ++j) s += static_cast<long double>(w[j]) * vec[j] * vec[j];
    double inv = 1.0 / std::sqrt(static_cast<double>(s));
    for (double& v : vec) v *= inv;
}

void fix_sign(std::vector<double>& vec) {
    double amax = 0.0;
    for (double v : vec) amax = std::max(amax, std::abs(v));
    for (double v : vec) {
        if (std::abs(v) > 1e-8 * amax) {
            if (v < 0.0) {
                for (double& u : vec) u = -u;
            }
            return;
        }
    }
}

// Symmetric conservative finite differences: tridiagonal matrix over the
// interior nodes with a sampled at half-nodes.
void build_tridiagonal(const OperatorSpec& op, std::size_t J, Eigen::VectorXd& diag,
                       Eigen::VectorXd& sub) {
    double d = op.ell / static_cast<double>(J);
    std::vector<double> ah(J);
    for (std::size_t j = 0; j < J; ++j) ah[j] = op.a((static_cast<double>(j) + 0.5) * d);
    diag.resize(static_cast<Eigen::Index>(J - 1));
    sub.resize(static_cast<Eigen::Index>(J - 2));
    for (std::size_t j = 1; j < J; ++j) {
        double cj = op.c(static_cast<double>(j) * d);
        diag[static_cast<Eigen::Index>(j - 1)] = (ah[j - 1] + ah[j]) / (d * d) + cj;
        if (j < J - 1) sub[static_cast<Eigen::Index>(j - 1)] = -ah[j] / (d * d);
    }
}

}  // namespace

ModalBasis eigenpairs(const OperatorSpec& op, std::size_t N, std::size_t J) {
    validate_resolution(N, J, "eigenpairs");
    check_coefficients(op, J);

    ModalBasis b;
    b.is_interval = true;
    b.x = grid_nodes(op.ell, J);
    b.w = trapezoid_weights(op.ell, J);
    b.lambda.resize(N);
    b.X.assign(N, std::vector<double>(J + 1, 0.0));

    if (op.a.is_constant && op.c.is_constant) {
        // Closed forms; the sampled sines are exactly orthogonal in the
        // discrete trapezoid inner product (discrete sine transform identity).
        double amp = std::sqrt(2.0 / op.ell);
        for (std::size_t n = 1; n <= N; ++n) {
            double k = static_cast<double>(n) * kPi / op.ell;
            b.lambda[n - 1] = op.a.value * k * k + op.c.value;
            auto& X = b.X[n - 1];
            for (std::size_t j = 1; j < J; ++j) {
                X[j] = amp * std::sin(k * b.x[j]);
            }
            renormalize(X, b.w);
        }
    } else {
        Eigen::VectorXd diag, sub;
        build_tridiagonal(op, J, diag, sub);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        if (es.info() != Eigen::Success) {
            throw ConvergenceError("eigenpairs: tridiagonal eigensolver failed");
        }
        double d = op.ell / static_cast<double>(J);
        double inv_sqrt_d = 1.0 / std::sqrt(d);
        for (std::size_t n = 0; n < N; ++n) {
            b.lambda[n] = es.eigenvalues()[static_cast<Eigen::Index>(n)];
            auto& X = b.X[n];
            for (std::size_t j = 1; j < J; ++j) {
                X[j] = es.eigenvectors()(static_cast<Eigen::Index>(j - 1),
                                         static_cast<Eigen::Index>(n)) * inv_sqrt_d;
            }
            fix_sign(X);
            renormalize(X, b.w);
        }
    }
    if (!(b.lambda.front() > 0.0)) {
        throw DomainError("eigenpairs: smallest eigenvalue is not positive");
    }
    return b;
}

std::vector<double> eigenvalues_only(const OperatorSpec& op, std::size_t N, std::size_t J) {
    validate_resolution(N, J, "eigenvalues_only");
    check_coefficients(op, J);
    if (op.a.is_constant && op.c.is_constant) {
        std::vector<double> l(N);
        for (std::size_t n = 1; n <= N; ++n) {
            double k = static_cast<double>(n) * kPi / op.ell;
            l[n - 1] = op.a.value * k * k + op.c.value;
        }
        return l;
    }
    Eigen::VectorXd diag, sub;
    build_tridiagonal(op, J, diag, sub);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw ConvergenceError("eigenvalues_only: tridiagonal eigensolver failed");
    }
    std::vector<double> l(N);
    for (std::size_t n = 0; n < N; ++n) l[n] = es.eigenvalues()[static_cast<Eigen::Index>(n)];
    return l;
}

ModalBasis tensor_basis(const OperatorSpec& op1, const OperatorSpec& op2, std::size_t N,
                        std::size_t J1, std::size_t J2) {
    // Enough 1-D modes per axis to be sure the N smallest sums are covered.
    std::size_t K1 = std::min(N, J1 / 4);
    std::size_t K2 = std::min(N, J2 / 4);
    if (K1 * K2 < N) {
        throw ResolutionError("tensor_basis: N = " + std::to_string(N) +
                              " exceeds the resolvable mode count " + std::to_string(K1 * K2));
    }
    ModalBasis b1 = eigenpairs(op1, K1, J1);
    ModalBasis b2 = eigenpairs(op2, K2, J2);

    std::vector<std::tuple<double, std::size_t, std::size_t>> sums;
    sums.reserve(K1 * K2);
    for (std::size_t m = 0; m < K1; ++m) {
        for (std::size_t n = 0; n < K2; ++n) {
            sums.emplace_back(b1.lambda[m] + b2.lambda[n], m, n);
        }
    }
    std::sort(sums.begin(), sums.end());  // ties broken by (m, n) lexicographic order

    ModalBasis b;
    b.is_interval = false;
    b.x1 = b1.x;
    b.x2 = b2.x;
    b.J1 = J1;
    b.J2 = J2;
    const std::size_t nodes = (J1 + 1) * (J2 + 1);
    b.w.resize(nodes);
    b.x.clear();
    for (std::size_t i = 0; i <= J1; ++i) {
        for (std::size_t j = 0; j <= J2; ++j) {
            b.w[i * (J2 + 1) + j] = b1.w[i] * b2.w[j];
        }
    }
    b.lambda.resize(N);
    b.X.assign(N, std::vector<double>(nodes, 0.0));
    for (std::size_t k = 0; k < N; ++k) {
        auto [lam, m, n] = sums[k];
        b.lambda[k] = lam;
        auto& X = b.X[k];
        for (std::size_t i = 0; i <= J1; ++i) {
            for (std::size_t j = 0; j <= J2; ++j) {
                X[i * (J2 + 1) + j] = b1.X[m][i] * b2.X[n][j];
            }
        }
    }
    return b;
}

ModalCoeffs project(const std::vector<double>& fvals, const ModalBasis& basis) {
    if (fvals.size() != basis.n_nodes()) {
        throw GridMismatch("project: sample count " + std::to_string(fvals.size()) +
                           " does not match the basis grid " + std::to_string(basis.n_nodes()));
    }
    ModalCoeffs c(basis.n_modes());
    for (std::size_t n = 0; n < basis.n_modes(); ++n) {
        long double s = 0.0L;
        const auto& X = basis.X[n];
        for (std::size_t j = 0; j < fvals.size(); ++j) {
            s += static_cast<long double>(basis.w[j]) * fvals[j] * X[j];
        }
        c[n] = static_cast<double>(s);
    }
    return c;
}

std::vector<double> synthesize(const ModalCoeffs& coeffs, const ModalBasis& basis) {
    if (coeffs.size() != basis.n_modes()) {
        throw GridMismatch("synthesize: coefficient count " + std::to_string(coeffs.size()) +
                           " does not match the basis mode count " +
                           std::to_string(basis.n_modes()));
    }
    std::vector<double> out(basis.n_nodes(), 0.0);
    for (std::size_t n = 0; n < coeffs.size(); ++n) {
        const auto& X = basis.X[n];
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += coeffs[n] * X[j];
    }
    return out;
}

std::vector<double> derivative4(const std::vector<double>& f, double d) {
    if (f.size() < 5) throw DomainError("derivative4: need at least 5 samples");
    const std::size_t J = f.size() - 1;
    std::vector<double> g(J + 1);
    const double s = 1.0 / (12.0 * d);
    g[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) * s;
    g[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) * s;
    for (std::size_t j = 2; j + 2 <= J; ++j) {
        g[j] = (f[j - 2] - 8.0 * f[j - 1] + 8.0 * f[j + 1] - f[j + 2]) * s;
    }
    g[J - 1] = (3.0 * f[J] + 10.0 * f[J - 1] - 18.0 * f[J - 2] + 6.0 * f[J - 3] - f[J - 4]) * s;
    g[J] = (25.0 * f[J] - 48.0 * f[J - 1] + 36.0 * f[J - 2] - 16.0 * f[J - 3] + 3.0 * f[J - 4]) * s;
    return g;
}

BesselReport bessel_diagnostic(const std::vector<double>& fvals, const ModalBasis& basis,
                               const OperatorSpec& op) {
    if (!basis.is_interval) {
        throw DomainError("bessel_diagnostic: interval bases only");
    }
    if (fvals.size() != basis.n_nodes()) {
        throw GridMismatch("bessel_diagnostic: sample count does not match the basis grid");
    }
    double scale = 1.0;
    for (double v : fvals) scale = std::max(scale, std::abs(v));
    if (std::abs(fvals.front()) > 1e-8 * scale || std::abs(fvals.back()) > 1e-8 * scale) {
        throw BoundaryError("bessel_diagnostic: samples violate the Dirichlet boundary values");
    }

    ModalCoeffs h = project(fvals, basis);
    long double sum2 = 0.0L, lhs = 0.0L, norm2 = 0.0L, rhs = 0.0L;
    for (std::size_t n = 0; n < h.size(); ++n) {
        sum2 += static_cast<long double>(h[n]) * h[n];
        lhs += static_cast<long double>(basis.lambda[n]) * h[n] * h[n];
    }
    const std::size_t J = fvals.size() - 1;
    double d = basis.x[1] - basis.x[0];
    std::vector<double> fp = derivative4(fvals, d);
    for (std::size_t j = 0; j <= J; ++j) {
        norm2 += static_cast<long double>(basis.w[j]) * fvals[j] * fvals[j];
        rhs += static_cast<long double>(basis.w[j]) *
               (op.a(basis.x[j]) * fp[j] * fp[j] + op.c(basis.x[j]) * fvals[j] * fvals[j]);
    }
    BesselReport rep;
    rep.parseval_gap = std::abs(static_cast<double>(sum2 - norm2));
    rep.bessel_lhs = static_cast<double>(lhs);
    rep.bessel_rhs = static_cast<double>(rhs);
    rep.holds = rep.bessel_lhs <= rep.bessel_rhs * (1.0 + 1e-6) + 1e-12;
    return rep;
}

}  // namespace fracwave::spectral
