#include "opcalc/errors.hpp"
#include "opcalc/series.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <numbers>
#include <random>

using namespace opcalc;
using doctest::Approx;

namespace {

double lambert_value(const LambertSeries& s, double x) { return eval_lambert_series(s, x, 1e-15).value.real(); }

}  // namespace

TEST_CASE("exp series: geometric and closed forms")
{
    const auto g = eval_exp_series({sequences::one()}, std::log(2.0), 1e-12);
    CHECK(std::abs(g.value - 1.0) <= 1e-12);
    CHECK(g.tail_bound <= 1e-12);

    const double e = std::numbers::e;
    const auto n = eval_exp_series({sequences::identity()}, 1.0, 1e-14);
    CHECK(std::abs(n.value.real() - e / ((e - 1) * (e - 1))) <= 1e-13);
    CHECK(std::abs(n.value.real() - oracle::power_sum_50([](std::uint64_t k) { return double(k); }, 1.0, 200)) <= 1e-13);
}

TEST_CASE("exp series with Moebius coefficients against a 50-digit partial sum")
{
    const auto v = eval_exp_series({sequences::mobius()}, 5.0, 1e-15);
    const double ref = oracle::power_sum_50([](std::uint64_t k) { return double(oracle::mobius_brute(k)); }, 5.0, 40);
    CHECK(std::abs(v.value.real() - ref) <= 1e-12);
}

TEST_CASE("Lambert series values")
{
    // Erdos-Borwein constant
    CHECK(std::abs(lambert_value({sequences::one()}, std::log(2.0)) - 1.6066951524152917637833) <= 1e-13);
    const double ref = oracle::lambert_sum_50([](std::uint64_t) { return 1.0; }, std::log(2.0), 200);
    CHECK(std::abs(lambert_value({sequences::one()}, std::log(2.0)) - ref) <= 1e-13);
    CHECK(std::abs(lambert_value({sequences::delta1()}, 1.0) - 1.0 / std::expm1(1.0)) <= 1e-15);
    const double sig = eval_exp_series({sequences::sigma0()}, 2.0, 1e-15).value.real();
    CHECK(std::abs(lambert_value({sequences::one()}, 2.0) - sig) <= 1e-12);
}

TEST_CASE("domain and tolerance errors")
{
    CHECK_THROWS_AS(eval_exp_series({sequences::one(), 0.5}, 0.1, 1e-10), DomainError);
    CHECK_THROWS_AS(eval_exp_series({sequences::one()}, 1.0, 0.0), DomainError);
    CHECK_THROWS_AS(eval_exp_series({sequences::one(), 1e-9}, 1e-9, 1e-300), TruncationError);
}

TEST_CASE("representation conversions")
{
    const auto c = lambert_to_exp({sequences::one()});
    for (std::uint64_t n = 1; n <= 100; ++n) CHECK(c.coeffs(n).real() == oracle::sigma0(n));

    const auto w = exp_to_lambert({sequences::one()});
    for (std::uint64_t n = 1; n <= 100; ++n) CHECK(divisor_transform(w.weights, n) == complex(1.0));

    const auto back = exp_to_lambert(lambert_to_exp({sequences::phi()}));
    for (std::uint64_t n = 1; n <= 300; ++n) CHECK(std::abs(back.weights(n) - sequences::phi()(n)) <= 1e-14);
}

TEST_CASE("Lambert and exp forms agree for random weights with |W(n)| <= n^2")
{
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<complex> w(4000);
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double n = static_cast<double>(i + 1);
            w[i] = std::floor((static_cast<double>(rng() % 2001) / 1000.0 - 1.0) * n * n);
        }
        CoefficientSequence seq = sequences::custom(w, true);
        seq.set_growth({1.0, 2.0});
        const LambertSeries L{seq};
        const auto E = lambert_to_exp(L);
        for (double x : {0.5, 1.0, 2.0}) {
            const auto a = eval_lambert_series(L, x, 1e-12);
            const auto b = eval_exp_series(E, x, 1e-12);
            CHECK(std::abs(a.value - b.value) <= a.tail_bound + b.tail_bound + 1e-12 * std::max(1.0, std::abs(a.value)));
        }
    }
}

TEST_CASE("tail bounds are sound")
{
    for (const auto& name : sequences::registry_names()) {
        const ExpSeries E{sequences::named(name)};
        const LambertSeries L{sequences::named(name)};
        for (double x : {0.3, 1.0, 3.0}) {
            const auto e = eval_exp_series(E, x, 1e-8);
            const auto e_long = eval_exp_series_terms(E, x, 10 * e.terms_used);
            CHECK(std::abs(e_long.value - e.value) <= e.tail_bound * (1 + 1e-9) + 1e-15);
            const auto l = eval_lambert_series(L, x, 1e-8);
            const auto l_long = eval_lambert_series_terms(L, x, 10 * l.terms_used);
            CHECK(std::abs(l_long.value - l.value) <= l.tail_bound * (1 + 1e-9) + 1e-15);
        }
    }
}

TEST_CASE("term-wise derivatives of Lambert series")
{
    const LambertSeries L{sequences::one()};
    const auto f = [&](double x) { return complex(lambert_value(L, x)); };

    const auto d0 = termwise_derivative(L, 0);
    CHECK(std::abs(lambert_value(d0, 1.3) - lambert_value(L, 1.3)) <= 1e-15);

    const auto d1 = termwise_derivative(L, 1);
    CHECK(std::abs(lambert_value(d1, 2.0) - oracle::derivative(f, 2.0).real()) <= 1e-7);

    for (unsigned nu = 1; nu <= 3; ++nu) {
        const auto d = termwise_derivative(L, nu);
        for (double x : {1.0, 2.0, 3.0, 4.0}) {
            const double fd = oracle::derivative_n(f, x, nu, 0.2).real();
            CHECK(std::abs(lambert_value(d, x) - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
        }
    }

    const auto twice = termwise_derivative(termwise_derivative(L, 2), 2);
    const auto four = termwise_derivative(L, 4);
    CHECK(std::abs(lambert_value(twice, 3.0) - lambert_value(four, 3.0)) <= 1e-10);
    const auto one_one = termwise_derivative(termwise_derivative(L, 1), 1);
    CHECK(std::abs(lambert_value(one_one, 3.0) - lambert_value(termwise_derivative(L, 2), 3.0)) <= 1e-10);
}

TEST_CASE("term-wise derivatives of exp series")
{
    const ExpSeries E{sequences::inverse_square()};
    const auto f = [&](double x) { return eval_exp_series(E, x, 1e-15).value; };
    const auto d2 = termwise_derivative(E, 2);
    for (double x : {1.0, 2.5})
        CHECK(std::abs(eval_exp_series(d2, x, 1e-15).value - oracle::derivative_n(f, x, 2, 0.2)) <= 1e-7);
}

TEST_CASE("product identities")
{
    for (double q : {0.1, 0.3, 0.5}) {
        auto mu = TaylorHead::finite({1.0});
        const auto a = product_identity_check(mu, q, 1e-12);
        CHECK(std::abs(a.rhs - std::exp(-q)) <= 1e-10);
        CHECK(a.difference <= 1e-10);

        TaylorHead phi;
        phi.coeffs = sequences::identity();
        const auto b = product_identity_check(phi, q, 1e-12);
        CHECK(std::abs(b.rhs - std::exp(q / (q - 1.0))) <= 1e-10);
        CHECK(b.difference <= 1e-10);
    }
    const auto tiny = product_identity_check(TaylorHead::finite({1.0}), 1e-6, 1e-12);
    CHECK(std::abs(tiny.lhs - 1.0) <= 2e-6);
    CHECK(std::abs(tiny.rhs - 1.0) <= 2e-6);
    CHECK_THROWS_AS(product_identity_check(TaylorHead::finite({1.0}), 0.8, 1e-12), DomainError);
}

TEST_CASE("product exponents")
{
    const auto mu = TaylorHead::finite({1.0});
    for (std::uint64_t n = 1; n <= 50; ++n)
        CHECK(std::abs(product_exponent(mu, n) - double(oracle::mobius_brute(n)) / double(n)) <= 1e-15);
    TaylorHead phi;
    phi.coeffs = sequences::identity();
    for (std::uint64_t n = 1; n <= 50; ++n)
        CHECK(std::abs(product_exponent(phi, n) - double(oracle::totient_gcd(n)) / double(n)) <= 1e-14);
}
