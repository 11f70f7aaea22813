#include "opcalc/errors.hpp"
#include "opcalc/ode1d.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <numbers>

using namespace opcalc;

namespace {

const double kSqrt2 = std::numbers::sqrt2;
const double kSqrt3 = std::numbers::sqrt3;

std::vector<double> grid(double a, double b, int n)
{
    std::vector<double> xs;
    for (int i = 0; i < n; ++i) xs.push_back(a + (b - a) * i / (n - 1));
    return xs;
}

}  // namespace

TEST_CASE("CharPoly evaluation and bounds")
{
    const CharPoly p({1.0, 0.0, 1.0});
    CHECK(p(complex(0, 1)) == complex(0.0));
    CHECK(p.degree() == 2);
    CHECK(p.norm1() == 2.0);
    const CharPoly q({2.0, kSqrt3, 0.0, 1.0});
    CHECK(q.cauchy_bound() >= 1.0);
    CHECK(q.min_abs_on_negative_integers() > 0.0);
    CHECK(CharPoly({1.0, 1.0}).min_abs_on_negative_integers() == 0.0);
}

TEST_CASE("admissibility scan")
{
    CHECK(check_admissible(CharPoly({1.0, 0.0, 1.0}), 1000).empty());
    CHECK(check_admissible(CharPoly({1.0, 1.0}), 1000) == std::vector<std::int64_t>{1});
    CHECK(check_admissible(CharPoly({2.0, kSqrt3, 0.0, 1.0}), 100000).empty());
    // (w + 2)(w + 5)
    CHECK(check_admissible(CharPoly({10.0, 7.0, 1.0}), 1000) == std::vector<std::int64_t>{2, 5});
    try {
        require_admissible(CharPoly({1.0, 1.0}), "test");
        FAIL("expected AdmissibilityError");
    } catch (const AdmissibilityError& e) {
        CHECK(e.offending() == std::vector<std::int64_t>{1});
        CHECK(std::string(e.what()).find("n = 1") != std::string::npos);
    }
}

TEST_CASE("exp right-hand side: u'' + u = sum e^{-nx}")
{
    const CharPoly p({1.0, 0.0, 1.0});
    const auto sol = solve_exp_rhs(p, sequences::one());
    for (std::uint64_t n = 1; n <= 50; ++n) CHECK(sol.u.coeffs(n) == complex(1.0 / (1.0 + double(n * n))));
    const auto xs = grid(0.5, 5.0, 12);
    CHECK(residual_ode(p, sol.u, ExpSeries{sequences::one()}, xs) <= 1e-10);

    // finite-difference cross-check of the same residual
    const auto u = [&](double x) { return eval_exp_series(sol.u, x, 1e-15).value; };
    for (double x : {0.5, 1.0, 2.0, 5.0}) {
        const complex r = u(x) + oracle::derivative_n(u, x, 2, 0.1) - 1.0 / std::expm1(x);
        CHECK(std::abs(r) <= 1e-6);
    }
}

TEST_CASE("1 + sqrt2 w + w^2 with sigma0 coefficients")
{
    const CharPoly p({1.0, kSqrt2, 1.0});
    const auto sol = solve_exp_rhs(p, sequences::sigma0());
    for (std::uint64_t n = 1; n <= 60; ++n) {
        const double nn = static_cast<double>(n);
        CHECK(std::abs(sol.u.coeffs(n) - oracle::sigma0(n) / (1.0 - kSqrt2 * nn + nn * nn)) <= 1e-15);
    }
}

TEST_CASE("degree zero symbol scales pointwise")
{
    const CharPoly p({4.0});
    const auto sol = solve_exp_rhs(p, sequences::phi());
    for (double x : {0.5, 2.0}) {
        const auto u = eval_exp_series(sol.u, x, 1e-15).value;
        const auto c = eval_exp_series({sequences::phi()}, x, 1e-15).value;
        CHECK(std::abs(u - c / 4.0) <= 1e-14);
    }
}

TEST_CASE("Lambert right-hand side")
{
    const CharPoly p2({1.0, 0.0, 1.0});
    const auto a = solve_lambert_rhs(p2, sequences::delta1());
    for (std::uint64_t n = 1; n <= 40; ++n) CHECK(a.u.coeffs(n) == complex(1.0 / (1.0 + double(n * n))));

    const CharPoly p4({1.0, 0.0, 0.0, 0.0, 1.0});
    const auto b = solve_lambert_rhs(p4, sequences::one());
    for (std::uint64_t n = 1; n <= 40; ++n) {
        const double nn = static_cast<double>(n);
        CHECK(std::abs(b.u.coeffs(n) - oracle::sigma0(n) / (1.0 + nn * nn * nn * nn)) <= 1e-16);
    }
    CHECK(residual_ode(p4, b.u, LambertSeries{sequences::one()}, grid(0.5, 5.0, 10)) <= 1e-10);

    const auto via_exp = solve_exp_rhs(p4, divisor_transformed(sequences::phi()));
    const auto via_lam = solve_lambert_rhs(p4, sequences::phi());
    for (std::uint64_t n = 1; n <= 100; ++n) CHECK(via_exp.u.coeffs(n) == via_lam.u.coeffs(n));
}

TEST_CASE("the other denominator sign fails the residual test")
{
    // P(n) instead of P(-n) for P = 1 + w + w^4 (differs on odd powers)
    const CharPoly p({1.0, 1.0, 0.0, 0.0, 1.0});
    CoefficientSequence wrong(
        [p](std::uint64_t n) { return divisor_transform(sequences::one(), n) / p(static_cast<double>(n)); },
        "wrong sign", {2.0, 0.5});
    const double xs[] = {1.0};
    CHECK(residual_ode(p, ExpSeries{wrong}, LambertSeries{sequences::one()}, xs) > 1e-3);
    CHECK(residual_ode(p, solve_lambert_rhs(p, sequences::one()).u, LambertSeries{sequences::one()}, xs) <= 1e-12);
}

TEST_CASE("inadmissible polynomials are rejected")
{
    CHECK_THROWS_AS(solve_exp_rhs(CharPoly({1.0, 1.0}), sequences::one()), AdmissibilityError);
    CHECK_THROWS_AS(solve_lambert_rhs(CharPoly({6.0, 5.0, 1.0}), sequences::one()), AdmissibilityError);
}

TEST_CASE("near resonance produces a warning")
{
    // root at w = -(3 + 1e-9)
    const CharPoly p({3.0 + 1e-9, 1.0});
    const auto sol = solve_exp_rhs(p, sequences::delta1());
    CHECK_FALSE(sol.warnings.empty());
}

TEST_CASE("residual_ode: perturbation and empty sample set")
{
    const CharPoly p({2.0, 0.0, 1.0});   // P(-1) = 3
    const auto sol = solve_exp_rhs(p, sequences::one());
    const auto base = sol.u.coeffs;
    CoefficientSequence pert([base](std::uint64_t n) { return base(n) + (n == 1 ? 1e-3 : 0.0); }, "perturbed",
                             base.growth());
    const double x = 1.0;
    const double xs[] = {x};
    const double r = residual_ode(p, ExpSeries{pert}, ExpSeries{sequences::one()}, xs);
    CHECK(r == doctest::Approx(1e-3 * 3.0 * std::exp(-x)).epsilon(1e-6));
    CHECK(residual_ode(p, sol.u, ExpSeries{sequences::one()}, std::span<const double>{}) == 0.0);
}

TEST_CASE("coefficient exactness, linearity and the Moebius route")
{
    const CharPoly p({1.0, complex(0.5, 1.0), 0.0, 2.0});
    const auto c1 = sequences::sigma0(), c2 = sequences::phi();
    const auto s1 = solve_exp_rhs(p, c1), s2 = solve_exp_rhs(p, c2);
    const complex alpha(2.0, -1.0), beta(0.5, 0.0);
    CoefficientSequence mix([=](std::uint64_t n) { return alpha * c1(n) + beta * c2(n); }, "mix", {10.0, 1.0});
    const auto sm = solve_exp_rhs(p, mix);
    for (std::uint64_t n = 1; n <= 300; ++n) {
        const complex pn = p(-static_cast<double>(n));
        CHECK(std::abs(pn * s1.u.coeffs(n) - c1(n)) <= 1e-14 * std::abs(c1(n)));
        CHECK(std::abs(sm.u.coeffs(n) - (alpha * s1.u.coeffs(n) + beta * s2.u.coeffs(n)))
              <= 1e-14 * std::abs(sm.u.coeffs(n)) + 1e-300);
    }
    const auto weights = solution_lambert_weights(p, c1);
    for (std::uint64_t n = 1; n <= 300; ++n) {
        // the divisor sum cancels; rounding scales with the summed magnitudes
        double mag = 0.0;
        for (auto d : oracle::divisors_brute(n)) mag += std::abs(weights(d));
        CHECK(std::abs(divisor_transform(weights, n) - s1.u.coeffs(n)) <= 1e-14 * mag);
    }
}
