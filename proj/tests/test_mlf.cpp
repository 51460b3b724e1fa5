#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "fracwave/errors.hpp"
#include "fracwave/fracops.hpp"
#include "fracwave/mlf.hpp"
#include "oracle.hpp"
#include "testutil.hpp"

using namespace fracwave;
using testsupport::MlfOracle;
using testsupport::urand;

TEST_CASE("normalization: E(0) = 1/Gamma(beta)") {
    for (double a : {1.1, 1.25, 1.5, 1.75, 1.95}) {
        for (double b : {1.0, 2.0, a, a - 1.0, 2.0 - a}) {
            CAPTURE(a);
            CAPTURE(b);
            CHECK(mlf::mlf_eval({a, b}, 0.0) == doctest::Approx(1.0 / std::tgamma(b)).epsilon(1e-12));
        }
    }
}

TEST_CASE("classical reductions") {
    // alpha = 1: exponential, across the whole Taylor/integral/asymptotic range
    for (double z : {0.0, -0.5, -5.0, -12.0, -30.0}) {
        CHECK(std::abs(mlf::mlf_eval({1.0, 1.0}, z) - std::exp(z)) <= 1e-12);
    }
    // alpha = 2: trigonometric closed forms
    CHECK(std::abs(mlf::mlf_eval({2.0, 1.0}, -1.0) - 0.5403023058681398) <= 1e-12);
    for (double x : {0.3, 1.0, 2.5, 6.0}) {
        CHECK(std::abs(mlf::mlf_eval({2.0, 1.0}, -x * x) - std::cos(x)) <= 1e-12);
        CHECK(std::abs(mlf::mlf_eval({2.0, 2.0}, -x * x) - std::sin(x) / x) <= 1e-12);
    }
}

TEST_CASE("frozen extended-precision reference point") {
    // E_{1.5,1.5}(-3.7), 50-digit Taylor summation (independently cross-checked
    // against an 80-digit python evaluation during development).
    const double frozen = 1.18226262411771643e-01;
    CHECK(std::abs(mlf::mlf_eval({1.5, 1.5}, -3.7) - frozen) <= 1e-12);
    CHECK(std::abs(testsupport::oracle_mlf(1.5, 1.5, -3.7) - frozen) <= 1e-15);
}

TEST_CASE("oracle agreement and decay envelope, random sweep") {
    std::mt19937 gen(911203u);
    for (int s = 0; s < 120; ++s) {
        double a = urand(gen, 1.0 + 1e-3, 2.0 - 1e-3);
        double bsel = urand(gen);
        double b = bsel < 0.25 ? 1.0 : bsel < 0.5 ? 2.0 : bsel < 0.75 ? a : a - 1.0;
        if (b < 0.02) b = a;  // keep Gamma(beta) representable in the table
        double z = -50.0 * urand(gen);
        CAPTURE(a);
        CAPTURE(b);
        CAPTURE(z);
        MlfOracle oracle(a, b);
        double got = mlf::mlf_eval({a, b}, z);
        CHECK(std::abs(got - oracle.eval(z)) <= 1e-10);
        CHECK(std::abs(got) <= oracle.envelope_c() / (1.0 + std::abs(z)));
    }
}

TEST_CASE("envelope extends into the far asymptotic regime") {
    for (double a : {1.25, 1.5, 1.75}) {
        MlfOracle oracle(a, 1.0);
        double c = oracle.envelope_c();
        for (double z : {-1e3, -1e6}) {
            CAPTURE(a);
            CAPTURE(z);
            CHECK(std::abs(mlf::mlf_eval({a, 1.0}, z)) <= c / (1.0 + std::abs(z)));
        }
    }
}

TEST_CASE("bounded decay along the trajectory map t -> E(-lambda t^alpha)") {
    const double a = 1.5, lambda = 4.0;
    MlfOracle oracle(a, 1.0);
    const double c = oracle.envelope_c();
    for (int k = -20; k <= 8; ++k) {
        double t = std::pow(2.0, 0.5 * k);
        double z = -lambda * std::pow(t, a);
        CHECK(std::abs(mlf::mlf_eval({a, 1.0}, z)) <= c / (1.0 + std::abs(z)));
    }
}

TEST_CASE("domain validation") {
    CHECK_THROWS_AS(mlf::mlf_eval({1.5, 1.0}, 0.5), DomainError);
    CHECK_THROWS_AS(mlf::mlf_eval({2.5, 1.0}, -1.0), DomainError);
    CHECK_THROWS_AS(mlf::mlf_eval({-1.0, 1.0}, -1.0), DomainError);
    CHECK_THROWS_AS(mlf::mlf_eval({1.5, 1.0, 1e-2}, -1.0), DomainError);
    CHECK_THROWS_AS(mlf::mlf_eval({1.5, 1.0, 1e-16}, -1.0), DomainError);
    CHECK_THROWS_AS(
        mlf::deriv_identity_residual(mlf::DerivIdentity::kE1ToEaa, FracOrder(1.5), 1.0, 0.0, 1e-5),
        DomainError);
}

TEST_CASE("first-derivative identities by centered differences") {
    const double h = 1e-5;
    const FracOrder ord(1.5);

    SUBCASE("pinned examples") {
        CHECK(mlf::deriv_identity_residual(mlf::DerivIdentity::kE1ToEaa, ord, 1.0, 1.0, h) <= 1e-7);
        // lambda = 0 collapses d/dt [t E_{a,2}] to the constant 1 = E_{a,1}(0)
        CHECK(mlf::deriv_identity_residual(mlf::DerivIdentity::kTE2ToE1, ord, 0.0, 1.0, h) <= 1e-10);
        CHECK(mlf::deriv_identity_residual(mlf::DerivIdentity::kTa1EaaToEaa1, ord, 2.5, 0.5, h) <=
              1e-6);
    }

    SUBCASE("random parameter sweep, all three identities") {
        std::mt19937 gen(48131u);
        for (int s = 0; s < 50; ++s) {
            double lambda = urand(gen, 0.1, 8.0);
            double t = urand(gen, 0.1, 2.0);
            double a = urand(gen, 1.1, 1.9);
            FracOrder o(a);
            CAPTURE(a);
            CAPTURE(lambda);
            CAPTURE(t);
            for (auto kind : {mlf::DerivIdentity::kE1ToEaa, mlf::DerivIdentity::kTE2ToE1,
                              mlf::DerivIdentity::kTa1EaaToEaa1}) {
                CHECK(mlf::deriv_identity_residual(kind, o, lambda, t, h) <= 1e-6);
            }
        }
    }
}

TEST_CASE("mixed-order identities under grid refinement") {
    for (double a : {1.25, 1.5, 1.75}) {
        FracOrder ord(a);
        for (auto kind : {mlf::FracIdentity::kTa1EaaToE1, mlf::FracIdentity::kE1ToTE2,
                          mlf::FracIdentity::kDuhamelVelocity}) {
            CAPTURE(a);
            CAPTURE(static_cast<int>(kind));
            double r512 = mlf::frac_identity_residual(kind, ord, 1.0, TimeGrid(1.0, 512));
            double r1024 = mlf::frac_identity_residual(kind, ord, 1.0, TimeGrid(1.0, 1024));
            CHECK(r512 <= 0.05);
            CHECK(r1024 <= 0.025);
        }
    }
}

TEST_CASE("velocity-convolution identity with a varying source") {
    auto f = [](double t) { return 1.0 + std::sin(2.0 * M_PI * t); };
    for (double a : {1.25, 1.75}) {
        CHECK(mlf::frac_identity_residual(mlf::FracIdentity::kDuhamelVelocity, FracOrder(a), 2.0,
                                          TimeGrid(1.0, 1024), f) <= 0.025);
    }
}

TEST_CASE("coarse grids are rejected") {
    CHECK_THROWS_AS(mlf::frac_identity_residual(mlf::FracIdentity::kTa1EaaToE1, FracOrder(1.5), 1.0,
                                                TimeGrid(1.0, 32)),
                    DomainError);
}
