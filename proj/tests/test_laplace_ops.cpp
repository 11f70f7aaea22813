#include "opcalc/errors.hpp"
#include "opcalc/laplace_ops.hpp"
#include "oracles.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/factorials.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/polygamma.hpp>

#include <doctest.h>

using namespace opcalc;

namespace {

/// int_0^inf phi(w) e^{-s w} dw, real part: tanh-sinh up to the last kink,
/// exp-sinh beyond it.
double forward_laplace(const std::function<complex(double)>& phi, double s, const std::vector<double>& kinks = {})
{
    const auto f = [&](double w) { return (phi(w) * std::exp(-s * w)).real(); };
    boost::math::quadrature::tanh_sinh<double> ts;
    boost::math::quadrature::exp_sinh<double> es;
    double a = 0.0, sum = 0.0;
    for (double k : kinks) {
        if (k <= a) continue;
        sum += ts.integrate(f, a, k);
        a = k;
    }
    return sum + es.integrate(f, a, std::numeric_limits<double>::infinity());
}

SymbolFunction exp_minus_plus_one()
{
    auto op = OperatorSpec::shift(-1.0);
    op.add(1.0, 0);
    return SymbolFunction::from_operator(op);
}

/// Optimally truncated asymptotic series for log(1 + d/dx) x^{-2}.
double log1p_series(double x)
{
    double sum = 0.0, best = INFINITY;
    for (unsigned n = 1; n < 150; ++n) {
        const double term = -boost::math::factorial<double>(n + 1) / (n * std::pow(x, n + 2));
        if (std::abs(term) > best) break;
        best = std::abs(term);
        sum += term;
    }
    return sum;
}

}  // namespace

TEST_CASE("table entries")
{
    const auto p2 = inverse_laplace(LaplaceSpec::parse("power:2"));
    CHECK(p2.phi(3.0) == complex(3.0));
    const auto p1 = inverse_laplace(LaplaceSpec::inverse_power(1));
    CHECK(p1.phi(7.0) == complex(1.0));
    const auto pole = inverse_laplace(LaplaceSpec::parse("pole:-1:2"));
    CHECK(std::abs(pole.phi(2.0) - 2.0 * std::exp(-2.0)) <= 1e-15);
    const auto del = inverse_laplace(LaplaceSpec::parse("delayed:0.5:2"));
    CHECK(del.phi(0.25) == complex(0.0));
    CHECK(del.phi(1.5) == complex(1.0));

    for (const auto& e : {p1, p2, pole, inverse_laplace(LaplaceSpec::parse("power:3")), del})
        for (double s : {1.5, 2.0, 5.0})
            CHECK(std::abs(forward_laplace(e.phi, s, e.breakpoints) - e.transform(s).real()) <= 1e-10);

    for (const auto& e : {p2, pole})
        for (int j = 0; j <= 100; ++j) CHECK(std::abs(e.phi(j)) <= e.growth.at(j) * (1 + 1e-12));

    CHECK(LaplaceSpec::parse("pole:-1:2").to_string() == "pole:-1:2");
    CHECK_THROWS_AS(LaplaceSpec::parse("sin:1"), UnsupportedError);
    CHECK_THROWS_AS(LaplaceSpec::parse("power:0"), UnsupportedError);
    CHECK_THROWS_AS(LaplaceSpec::parse("pole:x:1"), UnsupportedError);
    CHECK_THROWS_AS(inverse_laplace(LaplaceSpec::delayed_power(-1.0, 1)), UnsupportedError);
}

TEST_CASE("applying symbols")
{
    const auto g = inverse_laplace(LaplaceSpec::inverse_power(2));
    CHECK(std::abs(apply_operator(SymbolFunction::constant(1.0), g, 2.0).value - 0.25) <= 1e-9);
    CHECK(std::abs(apply_operator(SymbolFunction::from_operator(OperatorSpec::derivative()), g, 2.0).value + 0.25) <= 1e-9);

    for (const char* spec : {"power:1", "power:2", "pole:-1:2", "delayed:0.5:1"}) {
        const auto e = inverse_laplace(LaplaceSpec::parse(spec));
        for (double s : {1.5, 2.0, 5.0, 10.0})
            CHECK(std::abs(apply_operator(SymbolFunction::constant(1.0), e, s).value - e.transform(s)) <= 1e-9);
    }
}

TEST_CASE("log(1 + D) needs a restricted path")
{
    const auto g = inverse_laplace(LaplaceSpec::inverse_power(2));
    const SymbolFunction h{[](complex l) { return std::log(1.0 + l); }, "log(1+l)", 1.0, std::nullopt};
    const auto v = apply_operator(h, g, 30.0);
    CHECK(v.restricted);
    CHECK(v.path_end < 1.0);
    CHECK(std::abs(v.value.real() - log1p_series(30.0)) <= 1e-12);
    CHECK_THROWS_AS(apply_operator(h, g, 5.0), SingularPathError);
}

TEST_CASE("pure shift: y(s + 1) = 1/s^2")
{
    const auto g = inverse_laplace(LaplaceSpec::inverse_power(2));
    const auto y = solve_operator_eq(SymbolFunction::from_operator(OperatorSpec::shift(1.0)), g);
    for (double s = 2.0; s <= 10.0; s += 0.5) {
        CHECK(std::abs(y(s + 1.0) - 1.0 / (s * s)) <= 1e-10);
        CHECK(std::abs(y(s) - 1.0 / ((s - 1) * (s - 1))) <= 1e-10);
    }
    CHECK(std::abs(y.inverse_transform(2.0) - 2.0 * std::exp(2.0)) <= 1e-12);
}

TEST_CASE("polygamma example: the quadrature solution satisfies y(s) + y(s - 1) = 1/s^2")
{
    const auto g = inverse_laplace(LaplaceSpec::inverse_power(2));
    const auto y = solve_operator_eq(exp_minus_plus_one(), g);
    for (double s = 2.0; s <= 10.0; s += 1.0) {
        const double psi = 0.25 * (boost::math::polygamma(1, (s + 1) / 2) - boost::math::polygamma(1, 1 + s / 2));
        CHECK(std::abs(y(s) - psi) <= 1e-10);
        CHECK(std::abs(y(s) + y(s - 1.0) - 1.0 / (s * s)) <= 1e-8);
    }
    // the equation read as y(s + 1) + y(s) = 1/s^2 is off by one
    CHECK(std::abs(y(3.0) + y(2.0) - 0.25) > 0.1);
    CHECK(pointwise_residual(exp_minus_plus_one().terms.value(), y, [](complex s) { return 1.0 / (s * s); },
                             std::vector<double>{2, 4, 6, 8, 10})
          <= 1e-8);
}

TEST_CASE("log example: the symbol vanishes at the origin")
{
    const auto g = inverse_laplace(LaplaceSpec::inverse_power(2));
    const auto symbol = [](double a) {
        return SymbolFunction{[a](complex l) { return 2.0 * l * l - a * l - std::log(1.0 - l); }, "log example",
                              std::nullopt, std::nullopt};
    };
    // a = 1: w / f(-w) ~ 1/(2.5 w), not integrable
    CHECK_THROWS_AS(solve_operator_eq(symbol(1.0), g), SingularPathError);

    // a = 2: f(-w) ~ 2 w, the quotient stays bounded
    const auto y = solve_operator_eq(symbol(2.0), g);
    const SymbolFunction log_part{[](complex l) { return -std::log(1.0 - l); }, "-log(1-l)", std::nullopt, std::nullopt};
    const auto ye = y.as_entry();
    for (double s : {2.0, 3.0, 4.0}) {
        const auto ys = [&](double t) { return y(t); };
        const complex d1 = oracle::derivative(ys, s, 0.1), d2 = oracle::derivative_n(ys, s, 2, 0.1);
        const complex lhs = 2.0 * d2 - 2.0 * d1 + apply_operator(log_part, ye, s).value;
        CHECK(std::abs(lhs - 1.0 / (s * s)) <= 1e-6);
    }
}

TEST_CASE("zero of the reflected symbol on the path")
{
    const auto g = inverse_laplace(LaplaceSpec::inverse_power(2));
    const auto one_plus = SymbolFunction::from_poly(CharPoly({1.0, 1.0}));   // f(-w) = 1 - w
    try {
        solve_operator_eq(one_plus, g);
        FAIL("expected SingularPathError");
    } catch (const SingularPathError& e) {
        CHECK(std::abs(e.location() - 1.0) <= 1e-4);
    }
    CHECK_THROWS_AS(require_zero_free(one_plus, 10.0), SingularPathError);
    CHECK_NOTHROW(require_zero_free(SymbolFunction::from_poly(CharPoly({1.0, 0.0, 1.0})), 64.0));
}

TEST_CASE("divergent integrals are detected")
{
    const auto g = inverse_laplace(LaplaceSpec::inverse_power(2));
    CHECK_THROWS_AS(apply_operator(SymbolFunction::from_operator(OperatorSpec::shift(-1.0)), g, 0.5), DivergenceError);
}

TEST_CASE("linearity in the right-hand side")
{
    const auto f = SymbolFunction::from_poly(CharPoly({2.0, 1.0, 1.0}));
    const auto a = inverse_laplace(LaplaceSpec::parse("power:2"));
    const auto b = inverse_laplace(LaplaceSpec::parse("pole:-0.5:1"));
    const complex wa(0.3, -1.2), wb(-2.0, 0.7);
    const InverseLaplaceEntry es[] = {a, b};
    const complex ws[] = {wa, wb};
    const auto ya = solve_operator_eq(f, a), yb = solve_operator_eq(f, b), yc = solve_operator_eq(f, combine(es, ws));
    for (double s : {1.5, 3.0, 7.0}) CHECK(std::abs(yc(s) - (wa * ya(s) + wb * yb(s))) <= 1e-9);
}

TEST_CASE("polynomial symbol checked by finite differences")
{
    const CharPoly p({1.0, 0.0, 1.0});   // y + y'' = 1/s^2
    const auto y = solve_operator_eq(SymbolFunction::from_poly(p), inverse_laplace(LaplaceSpec::inverse_power(2)));
    for (double s = 2.0; s <= 6.0; s += 1.0) {
        const auto ys = [&](double t) { return y(t); };
        const complex lhs = y(s) + oracle::d2_5pt(ys, s, 1e-2);
        CHECK(std::abs(lhs - 1.0 / (s * s)) <= 1e-5);
        CHECK(std::abs(y(s) + y.derivative(s, 2) - 1.0 / (s * s)) <= 1e-9);
    }
}

TEST_CASE("inversion round trips")
{
    const auto g = inverse_laplace(LaplaceSpec::inverse_power(2));
    const std::vector<double> ss{2.0, 5.0};
    const auto id = invert_round_trip(SymbolFunction::constant(1.0), g, ss);
    CHECK(id.max_integral_error <= 1e-12);
    const auto sh = invert_round_trip(SymbolFunction::from_operator(OperatorSpec::shift(1.0)), g, ss);
    CHECK(sh.max_integral_error <= 1e-9);
    CHECK(sh.max_term_error <= 1e-9);
    const auto pg = invert_round_trip(exp_minus_plus_one(), g, std::vector<double>{2, 3, 4, 6});
    CHECK(pg.max_integral_error <= 1e-7);
    CHECK(pg.max_term_error <= 1e-7);
}

TEST_CASE("even/odd split agrees with the reflected form for polynomials")
{
    const auto g = inverse_laplace(LaplaceSpec::parse("pole:-1:2"));
    for (double s : {1.0, 2.5}) {
        const auto c = even_odd_check(CharPoly({1.0, -2.0, 0.5, 3.0}), g, s);
        CHECK(std::abs(c.integral - c.derivative_sum) <= 1e-10 * std::max(1.0, std::abs(c.integral)));
    }
}
