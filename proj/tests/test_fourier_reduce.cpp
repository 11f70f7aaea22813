#include "opcalc/errors.hpp"
#include "opcalc/fourier_reduce.hpp"

#include <doctest.h>

#include <numbers>
#include <sstream>

using namespace opcalc;
using namespace std::complex_literals;

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt2Pi = std::sqrt(2 * kPi);

double gauss(double x) { return std::exp(-0.5 * x * x); }

double max_diff(const SampledFunction& u, const std::function<complex(double)>& f)
{
    double m = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) m = std::max(m, std::abs(u.values[j] - f(u.coordinate(j))));
    return m;
}

double l2_error(const SampledFunction& u, const std::function<double(double)>& f)
{
    double s = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) s += std::norm(u.values[j] - f(u.coordinate(j)));
    return std::sqrt(u.spacing() * s);
}

LinearCoeffODE manufactured(double a1, double b1, double a2, double b2, double a3, double b3,
                            const std::function<std::array<double, 3>(double)>& f, double L = 10.0,
                            std::size_t N = 1024)
{
    LinearCoeffODE ode{a1, b1, a2, b2, a3, b3, {}};
    ode.g = SampledFunction::sample(L, N, [&](double x) {
        const auto d = f(x);
        return complex((a1 * x + b1) * d[2] + (a2 * x + b2) * d[1] + (a3 * x + b3) * d[0]);
    });
    return ode;
}

std::array<double, 3> gaussian_f(double x) { return {gauss(x), -x * gauss(x), (x * x - 1) * gauss(x)}; }

std::array<double, 3> x_gaussian_f(double x)
{
    const double e = std::exp(-x * x);
    return {x * e, (1 - 2 * x * x) * e, (4 * x * x * x - 6 * x) * e};
}

}  // namespace

TEST_CASE("grid validation")
{
    CHECK_THROWS_AS(SampledFunction::sample(1.0, 12, [](double) { return complex(0.0); }).validate(), DomainError);
    CHECK_THROWS_AS(SampledFunction::sample(1.0, 4, [](double) { return complex(0.0); }).validate(), DomainError);
    const auto u = SampledFunction::sample(2.0, 16, [](double x) { return complex(x); });
    CHECK(u.spacing() == 0.25);
    CHECK(u.coordinate(0) == -2.0);
    CHECK(u.coordinate(8) == 0.0);
    CHECK_THROWS_AS(forward_transform(SampledFunction{1.0, std::vector<complex>(24)}), DomainError);
}

TEST_CASE("forward transform of a Gaussian, zero, and the shift theorem")
{
    const auto u = SampledFunction::sample(10.0, 1024, [](double x) { return complex(gauss(x)); });
    const auto U = forward_transform(u);
    CHECK(U.domain == SampledFunction::Domain::frequency);
    CHECK(U.spacing() == doctest::Approx(kPi / 10.0));
    CHECK(max_diff(U, [](double g) { return complex(kSqrt2Pi * gauss(g)); }) <= 1e-10);

    const auto Z = forward_transform(SampledFunction::sample(10.0, 64, [](double) { return complex(0.0); }));
    for (auto v : Z.values) CHECK(v == complex(0.0));

    const auto s = forward_transform(SampledFunction::sample(10.0, 1024, [](double x) { return complex(gauss(x - 1)); }));
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double g = s.coordinate(k);
        CHECK(std::abs(s.values[k] - std::exp(-1i * g) * U.values[k]) <= 1e-9);
    }
}

TEST_CASE("Parseval and the round trip")
{
    const auto u = SampledFunction::sample(8.0, 512, [](double x) { return complex(std::exp(-x * x) * (1 + x), std::sin(x) * gauss(x)); });
    const auto U = forward_transform(u);
    double eu = 0.0, eU = 0.0;
    for (auto v : u.values) eu += std::norm(v);
    for (auto v : U.values) eU += std::norm(v);
    // sum |U|^2 dgamma = 2 pi sum |u|^2 dx
    CHECK(eU * U.spacing() / (2 * kPi * eu * u.spacing()) == doctest::Approx(1.0).epsilon(1e-10));
    const auto back = inverse_transform(U);
    CHECK(back.domain == SampledFunction::Domain::space);
    for (std::size_t j = 0; j < u.size(); ++j) CHECK(std::abs(back.values[j] - u.values[j]) <= 1e-12);
}

TEST_CASE("transform identities: derivative and multiplication by x")
{
    const auto u = SampledFunction::sample(10.0, 1024, [](double x) { return complex(gauss(x)); });
    const auto U = forward_transform(u);
    // transform of f' is i gamma f_hat
    const auto du = forward_transform(SampledFunction::sample(10.0, 1024, [](double x) { return complex(-x * gauss(x)); }));
    for (std::size_t k = 0; k < U.size(); ++k) CHECK(std::abs(du.values[k] - 1i * U.coordinate(k) * U.values[k]) <= 1e-9);
    // transform of x f is i d/dgamma f_hat
    const auto xu = forward_transform(SampledFunction::sample(10.0, 1024, [](double x) { return complex(x * gauss(x)); }));
    const auto dU = frequency_derivative(U);
    for (std::size_t k = 0; k < U.size(); ++k) CHECK(std::abs(xu.values[k] - 1i * dU.values[k]) <= 1e-7);
    // spectral derivative
    const auto sd = spectral_derivative(u);
    CHECK(max_diff(sd, [](double x) { return complex(-x * gauss(x)); }) <= 1e-10);
}

TEST_CASE("reduced coefficients")
{
    const auto g = SampledFunction::sample(10.0, 64, [](double x) { return complex(x * gauss(x)); });
    {
        const auto eq = reduce({0, 0, 0, 1, 0, 0, g});   // f' = g
        CHECK(eq.p.is_zero());
        CHECK(eq.q(2.0) == 2.0i);
    }
    {
        const auto eq = reduce({0, 0, 1, 0, 0, 1, g});   // x f' + f = g
        CHECK(eq.p(3.0) == complex(-3.0));
        CHECK(eq.q(3.0) == complex(0.0));
    }
    {
        const auto eq = reduce({1, 0, 0, 0, 0, 0, g});   // x f'' = g
        CHECK(eq.p(2.0) == -4.0i);
        CHECK(eq.q(2.0) == -4.0i);
    }
    {
        const auto eq = reduce({0, 0, 0, 0, 1, 0, g});   // x f = g
        CHECK(eq.p(5.0) == 1.0i);
        CHECK(eq.q(5.0) == complex(0.0));
    }
}

TEST_CASE("the reduced equation holds for the exact transform")
{
    // f = e^{-x^2/2}: f_hat = sqrt(2 pi) e^{-gamma^2/2}, f_hat' = -gamma f_hat
    struct Case { double a1, b1, a2, b2, a3, b3; };
    for (const auto c : {Case{0, 0, 1, 0, 0, 1}, Case{0, 1, 0, 0, 1, 0}, Case{1, 0.5, -2, 1, 0.3, 2}}) {
        const auto ode = manufactured(c.a1, c.b1, c.a2, c.b2, c.a3, c.b3, gaussian_f);
        const auto eq = reduce(ode);
        for (std::size_t k = 0; k < eq.g_hat.size(); ++k) {
            const double gm = eq.g_hat.coordinate(k);
            const complex fh = kSqrt2Pi * gauss(gm);
            CHECK(std::abs(eq.p(gm) * (-gm * fh) + eq.q(gm) * fh - eq.g_hat.values[k]) <= 1e-9);
        }
    }
    // the uncorrected readout p = gamma, q = 2 for x f' + f fails
    const auto ode = manufactured(0, 0, 1, 0, 0, 1, gaussian_f);
    const auto eq = reduce(ode);
    double worst = 0.0;
    for (std::size_t k = 0; k < eq.g_hat.size(); ++k) {
        const double gm = eq.g_hat.coordinate(k);
        const complex fh = kSqrt2Pi * gauss(gm);
        worst = std::max(worst, std::abs(gm * (-gm * fh) + 2.0 * fh - eq.g_hat.values[k]));
    }
    CHECK(worst > 1.0);
}

TEST_CASE("manufactured solutions are recovered")
{
    const auto a = solve_linear_coeff(manufactured(0, 0, 1, 0, 0, 1, gaussian_f));
    CHECK(l2_error(a.f, gauss) <= 1e-6);

    const auto b = solve_linear_coeff(manufactured(0, 1, 0, 0, 1, 0, x_gaussian_f));
    CHECK(l2_error(b.f, [](double x) { return x * std::exp(-x * x); }) <= 1e-5);

    // sink at gamma = 0: x f' + 2 f
    const auto c = solve_linear_coeff(manufactured(0, 0, 1, 0, 0, 2, gaussian_f));
    CHECK(l2_error(c.f, gauss) <= 1e-6);

    // source at gamma = 0: f'' - x f'
    const auto d = solve_linear_coeff(manufactured(0, 1, -1, 0, 0, 0, gaussian_f));
    CHECK(l2_error(d.f, gauss) <= 1e-6);
}

TEST_CASE("algebraic cases: f' = g and f'' = g")
{
    const auto a = solve_linear_coeff(manufactured(0, 0, 0, 1, 0, 0, gaussian_f));
    CHECK(l2_error(a.f, gauss) <= 1e-10);
    const auto b = solve_linear_coeff(manufactured(0, 1, 0, 0, 0, 0, gaussian_f));
    CHECK(l2_error(b.f, gauss) <= 1e-10);
    // f' = g with int g != 0 has no decaying solution
    LinearCoeffODE bad{0, 0, 0, 1, 0, 0, SampledFunction::sample(10.0, 256, [](double x) { return complex(gauss(x)); })};
    CHECK_THROWS_AS(solve_linear_coeff(bad), SingularReductionError);
}

TEST_CASE("zero forcing gives the zero solution")
{
    LinearCoeffODE ode{0, 1, 1, 0, 0, 1, SampledFunction::sample(10.0, 256, [](double) { return complex(0.0); })};
    const auto s = solve_linear_coeff(ode);
    for (auto v : s.f.values) CHECK(v == complex(0.0));
}

TEST_CASE("rejections")
{
    // too small a window for the forcing to decay
    CHECK_THROWS_AS(solve_linear_coeff(manufactured(0, 0, 1, 0, 0, 1, gaussian_f, 3.0, 256)), TruncationError);
    // nothing but a constant multiple of f
    CHECK_THROWS_AS(solve_linear_coeff(manufactured(0, 0, 0, 0, 0, 2, gaussian_f)), DomainError);
    // x f'' + f: essential singularity at gamma = 0
    CHECK_THROWS_AS(solve_linear_coeff(manufactured(1, 0, 0, 0, 0, 1, gaussian_f)), SingularReductionError);
}

TEST_CASE("linearity in g")
{
    const auto a = manufactured(0, 1, 0, 0, 1, 0, gaussian_f);
    const auto b = manufactured(0, 1, 0, 0, 1, 0, x_gaussian_f);
    auto c = a;
    const complex wa(2.0, 0.0), wb(-0.5, 1.0);
    for (std::size_t j = 0; j < c.g.size(); ++j) c.g.values[j] = wa * a.g.values[j] + wb * b.g.values[j];
    const auto fa = solve_linear_coeff(a).f, fb = solve_linear_coeff(b).f, fc = solve_linear_coeff(c).f;
    for (std::size_t j = 0; j < fc.size(); ++j) CHECK(std::abs(fc.values[j] - (wa * fa.values[j] + wb * fb.values[j])) <= 1e-9);
}

TEST_CASE("refinement does not increase the residual")
{
    for (const auto& f : {gaussian_f, x_gaussian_f}) {
        double prev = INFINITY;
        for (std::size_t N : {128u, 256u, 512u, 1024u}) {
            const auto s = solve_linear_coeff(manufactured(0, 1, 0, 0, 1, 0, f, 10.0, N));
            CHECK(s.residual_max <= prev);
            if (std::isfinite(prev) && prev > 1e-9) CHECK(prev / s.residual_max >= 4.0);
            prev = s.residual_max;
        }
    }
}

TEST_CASE("finite-difference residual of exact samples is small")
{
    const auto ode = manufactured(0.5, 1, 1, 0, 1, 0.2, gaussian_f);
    const auto exact = SampledFunction::sample(10.0, 1024, [](double x) { return complex(gauss(x)); });
    const auto [mx, l2] = fd_residual(ode, exact);
    CHECK(mx <= 1e-5);
    CHECK(l2 <= mx * std::sqrt(20.0));
}

TEST_CASE("CSV serialization")
{
    const auto u = SampledFunction::sample(1.0, 8, [](double x) { return complex(x, -x / 3); });
    std::ostringstream os;
    write_csv(os, u);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "x,re,im");
    std::getline(in, line);
    CHECK(line == "-1,-1,0.33333333333333331");
    int rows = 1;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 8);

    std::ostringstream fs;
    write_csv(fs, forward_transform(u));
    CHECK(fs.str().rfind("gamma,re,im\n", 0) == 0);
}
