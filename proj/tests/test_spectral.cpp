#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "fracwave/errors.hpp"
#include "fracwave/spectral.hpp"
#include "testutil.hpp"

using namespace fracwave;
using spectral::Coefficient;
using spectral::ModalBasis;
using spectral::OperatorSpec;

namespace {

std::vector<double> sample_x(const ModalBasis& b, const std::function<double(double)>& f) {
    std::vector<double> v(b.x.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = f(b.x[j]);
    return v;
}

}  // namespace

TEST_CASE("constant coefficients: closed-form eigenvalues") {
    for (double ell : {1.0, 2.0}) {
        for (double c : {0.0, 3.5}) {
            OperatorSpec op;
            op.ell = ell;
            op.c = Coefficient::constant(c);
            auto basis = spectral::eigenpairs(op, 20, 256);
            for (std::size_t n = 1; n <= 20; ++n) {
                double k = static_cast<double>(n) * M_PI / ell;
                double exact = k * k + c;
                CAPTURE(ell);
                CAPTURE(c);
                CAPTURE(n);
                CHECK(std::abs(basis.lambda[n - 1] - exact) <= 1e-8 * exact);
            }
        }
    }
}

TEST_CASE("orthonormality, ordering, boundary values") {
    OperatorSpec op;
    auto b = spectral::eigenpairs(op, 12, 256);
    for (std::size_t m = 0; m < 12; ++m) {
        CHECK(b.X[m][0] == 0.0);
        CHECK(b.X[m][b.x.size() - 1] == 0.0);
        if (m > 0) CHECK(b.lambda[m] >= b.lambda[m - 1]);
        for (std::size_t n = m; n < 12; ++n) {
            double ip = 0.0;
            for (std::size_t j = 0; j < b.x.size(); ++j) ip += b.w[j] * b.X[m][j] * b.X[n][j];
            CHECK(std::abs(ip - (m == n ? 1.0 : 0.0)) <= 1e-10);
        }
    }
}

TEST_CASE("projection: orthonormal basis recovery and closed-form coefficients") {
    OperatorSpec op;
    auto b = spectral::eigenpairs(op, 16, 512);

    auto c2 = spectral::project(b.X[1], b);
    for (std::size_t n = 0; n < c2.size(); ++n) {
        CHECK(std::abs(c2[n] - (n == 1 ? 1.0 : 0.0)) <= 1e-10);
    }

    auto cz = spectral::project(std::vector<double>(b.x.size(), 0.0), b);
    CHECK(testsupport::max_abs(cz) == 0.0);

    // h = x(1-x): coefficients 2 sqrt(2) (1 - (-1)^n) / (n pi)^3, i.e.
    // 4 sqrt(2)/(n pi)^3 for odd n and 0 for even n (Parseval-verified:
    // the squares sum to ||h||^2 = 1/30).
    auto h = sample_x(b, [](double x) { return x * (1.0 - x); });
    auto hn = spectral::project(h, b);
    for (std::size_t n = 1; n <= hn.size(); ++n) {
        double np = static_cast<double>(n) * M_PI;
        double exact = (n % 2 == 1) ? 4.0 * std::sqrt(2.0) / (np * np * np) : 0.0;
        CAPTURE(n);
        CHECK(std::abs(hn[n - 1] - exact) <= 1e-8);
    }
}

TEST_CASE("synthesis round trips") {
    OperatorSpec op;
    auto b = spectral::eigenpairs(op, 16, 512);

    spectral::ModalCoeffs e1(16, 0.0);
    e1[0] = 1.0;
    auto x1 = spectral::synthesize(e1, b);
    CHECK(testsupport::max_abs_diff(x1, b.X[0]) <= 1e-12);

    spectral::ModalCoeffs c(16);
    for (std::size_t n = 0; n < 16; ++n) c[n] = 1.0 / static_cast<double>((n + 1) * (n + 1));
    auto back = spectral::project(spectral::synthesize(c, b), b);
    CHECK(testsupport::max_abs_diff(back, c) <= 1e-10);

    auto h = sample_x(b, [](double x) { return x * (1.0 - x); });
    auto resynth = spectral::synthesize(spectral::project(h, b), b);
    // the sine-series tail beyond n = 16 sums to ~2e-4 (odd coefficients
    // decay like n^-3)
    CHECK(testsupport::max_abs_diff(resynth, h) <= 3e-4);
}

TEST_CASE("variable coefficients: self-refinement of eigenvalues") {
    OperatorSpec op;
    op.a = Coefficient::of([](double x) { return 1.0 + 0.5 * x; });
    auto coarse = spectral::eigenvalues_only(op, 5, 512);
    auto fine = spectral::eigenvalues_only(op, 5, 4096);
    for (std::size_t n = 0; n < 5; ++n) {
        CAPTURE(n);
        CHECK(std::abs(coarse[n] - fine[n]) <= 1e-4 * fine[n]);
    }
}

TEST_CASE("variable coefficients: Rayleigh-quotient consistency") {
    OperatorSpec op;
    op.a = Coefficient::of([](double x) { return 1.0 + 0.5 * x; });
    op.c = Coefficient::of([](double x) { return x; });
    auto b = spectral::eigenpairs(op, 6, 512);
    // quadratic form <a X', X'> + <c X, X> over <X, X> reproduces lambda
    double dx = b.x[1] - b.x[0];
    for (std::size_t n = 0; n < 6; ++n) {
        auto dX = spectral::derivative4(b.X[n], dx);
        double num = 0.0, den = 0.0;
        for (std::size_t j = 0; j < b.x.size(); ++j) {
            double aj = 1.0 + 0.5 * b.x[j], cj = b.x[j];
            num += b.w[j] * (aj * dX[j] * dX[j] + cj * b.X[n][j] * b.X[n][j]);
            den += b.w[j] * b.X[n][j] * b.X[n][j];
        }
        CAPTURE(n);
        CHECK(std::abs(num / den - b.lambda[n]) <= 5e-3 * b.lambda[n]);
    }
}

TEST_CASE("monotonicity in the zero-order coefficient") {
    OperatorSpec lo, hi;
    lo.a = hi.a = Coefficient::of([](double x) { return 1.0 + x; });
    lo.c = Coefficient::constant(0.0);
    hi.c = Coefficient::of([](double x) { return 2.0 + std::sin(3.0 * x); });
    auto ll = spectral::eigenvalues_only(lo, 8, 512);
    auto lh = spectral::eigenvalues_only(hi, 8, 512);
    for (std::size_t n = 0; n < 8; ++n) CHECK(lh[n] >= ll[n]);
}

TEST_CASE("rectangle tensor basis") {
    OperatorSpec op1, op2;
    op2.ell = 2.0;
    auto b1 = spectral::eigenpairs(op1, 4, 128);
    auto b2 = spectral::eigenpairs(op2, 4, 128);
    auto bt = spectral::tensor_basis(op1, op2, 6, 128, 128);
    CHECK_FALSE(bt.is_interval);
    // smallest sums of the two 1-D spectra, ascending
    std::vector<double> sums;
    for (double l1 : b1.lambda)
        for (double l2 : b2.lambda) sums.push_back(l1 + l2);
    std::sort(sums.begin(), sums.end());
    for (std::size_t n = 0; n < 6; ++n) {
        CHECK(std::abs(bt.lambda[n] - sums[n]) <= 1e-9 * sums[n]);
    }
    // discrete orthonormality carries over to the flattened grid
    for (std::size_t m = 0; m < 6; ++m) {
        for (std::size_t n = m; n < 6; ++n) {
            double ip = 0.0;
            for (std::size_t j = 0; j < bt.w.size(); ++j) ip += bt.w[j] * bt.X[m][j] * bt.X[n][j];
            CHECK(std::abs(ip - (m == n ? 1.0 : 0.0)) <= 1e-10);
        }
    }
}

TEST_CASE("self-adjointness of the discrete operator via projections") {
    // (L f, g) = (f, L g) expressed through the basis: both orderings of a
    // lambda-weighted coefficient pairing agree.
    OperatorSpec op;
    op.a = Coefficient::of([](double x) { return 1.0 + x * x; });
    auto b = spectral::eigenpairs(op, 10, 256);
    auto f = sample_x(b, [](double x) { return x * (1.0 - x); });
    auto g = sample_x(b, [](double x) { return std::sin(M_PI * x) * (1.0 - x); });
    auto fn = spectral::project(f, b);
    auto gn = spectral::project(g, b);
    double lfg = 0.0, flg = 0.0;
    for (std::size_t n = 0; n < 10; ++n) {
        lfg += b.lambda[n] * fn[n] * gn[n];
        flg += fn[n] * b.lambda[n] * gn[n];
    }
    CHECK(std::abs(lfg - flg) <= 1e-12);
}

TEST_CASE("bessel diagnostic") {
    OperatorSpec op;
    auto b = spectral::eigenpairs(op, 64, 512);

    SUBCASE("single mode: equality") {
        auto rep = spectral::bessel_diagnostic(b.X[0], b, op);
        CHECK(std::abs(rep.bessel_lhs - b.lambda[0]) <= 1e-8 * b.lambda[0]);
        CHECK(std::abs(rep.bessel_rhs - b.lambda[0]) <= 1e-6 * b.lambda[0]);
        CHECK(rep.holds);
    }

    SUBCASE("h = x(1-x): strict inequality and tight Parseval gap") {
        auto h = sample_x(b, [](double x) { return x * (1.0 - x); });
        auto rep = spectral::bessel_diagnostic(h, b, op);
        CHECK(rep.parseval_gap <= 1e-6);
        CHECK(rep.bessel_lhs <= rep.bessel_rhs * (1.0 + 1e-6));
        // int (1-2x)^2 dx = 1/3; the trapezoid carries its h^2 f'' / 12
        // constant, about 2.5e-6 at J = 512
        CHECK(std::abs(rep.bessel_rhs - 1.0 / 3.0) <= 5e-6);
        CHECK(rep.holds);
    }

    SUBCASE("zero function") {
        auto rep = spectral::bessel_diagnostic(std::vector<double>(b.x.size(), 0.0), b, op);
        CHECK(rep.parseval_gap == 0.0);
        CHECK(rep.bessel_lhs == 0.0);
        CHECK(rep.holds);
    }

    SUBCASE("Dirichlet violation rejected") {
        auto bad = sample_x(b, [](double x) { return x; });
        CHECK_THROWS_AS(spectral::bessel_diagnostic(bad, b, op), BoundaryError);
    }
}

TEST_CASE("validation errors") {
    OperatorSpec op;
    CHECK_THROWS_AS(spectral::eigenpairs(op, 40, 128), ResolutionError);
    CHECK_THROWS_AS(spectral::eigenpairs(op, 4, 32), ResolutionError);
    OperatorSpec bad;
    bad.a = Coefficient::of([](double x) { return x - 0.2; });  // dips below delta
    CHECK_THROWS_AS(spectral::eigenpairs(bad, 4, 128), EllipticityError);
}
