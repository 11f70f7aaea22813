#include "opcalc/series.hpp"

#include "opcalc/detail/summation.hpp"
#include "opcalc/errors.hpp"
#include "opcalc/quadrature.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace opcalc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_domain(double x, double domain_min, const char* what)
{
    if (!(x >= domain_min))
        throw DomainError(std::string(what) + ": x = " + std::to_string(x)
                          + " is below domain_min = " + std::to_string(domain_min));
}

void check_tol(double tol)
{
    if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
}

double exp_term_scale(double x, std::uint64_t n) { return std::exp(-static_cast<double>(n) * x); }

double lambert_term_scale(double x, std::uint64_t n)
{
    return 1.0 / std::expm1(static_cast<double>(n) * x);
}

template <class Scale, class Tail>
SeriesValue truncated_sum(const CoefficientSequence& c, double x, double tol, Scale scale,
                          Tail tail)
{
    detail::CompensatedSum sum;
    for (std::uint64_t n = 1; n <= kMaxTerms; ++n) {
        const double s = scale(x, n);
        if (s != 0.0) sum.add(c(n) * s);
        const double t = tail(n);
        if (t <= tol) return {sum.value(), n, t};
    }
    throw TruncationError("tolerance " + std::to_string(tol) + " not reached within "
                          + std::to_string(kMaxTerms) + " terms at x = " + std::to_string(x));
}

template <class Scale>
SeriesValue fixed_sum(const CoefficientSequence& c, double x, std::uint64_t N, Scale scale)
{
    detail::CompensatedSum sum;
    for (std::uint64_t n = 1; n <= N; ++n) {
        const double s = scale(x, n);
        if (s != 0.0) sum.add(c(n) * s);
    }
    return {sum.value(), N, 0.0};
}

}  // namespace

double power_geometric_tail(const GrowthBound& b, double q, std::uint64_t N)
{
    if (b.constant == 0.0) return 0.0;
    const double first = b.constant * std::pow(static_cast<double>(N + 1), b.degree)
                         * std::pow(q, static_cast<double>(N + 1));
    double ratio = q;
    if (b.degree > 0.0)
        ratio = std::pow(static_cast<double>(N + 2) / static_cast<double>(N + 1), b.degree) * q;
    if (ratio >= 1.0) return kInf;
    return first / (1.0 - ratio);
}

// 1/(e^{nx}-1) <= e^{-nx} / (1 - e^{-(N+1)x}) for n > N.
double lambert_tail_bound(const GrowthBound& b, double x, std::uint64_t N)
{
    const double q = std::exp(-x);
    return power_geometric_tail(b, q, N) / -std::expm1(-static_cast<double>(N + 1) * x);
}

SeriesValue eval_exp_series(const ExpSeries& s, double x, double tol)
{
    check_domain(x, s.domain_min, "eval_exp_series");
    check_tol(tol);
    const double q = std::exp(-x);
    const auto& g = s.coeffs.growth();
    return truncated_sum(s.coeffs, x, tol, exp_term_scale,
                         [&](std::uint64_t n) { return power_geometric_tail(g, q, n); });
}

SeriesValue eval_lambert_series(const LambertSeries& s, double x, double tol)
{
    check_domain(x, s.domain_min, "eval_lambert_series");
    check_tol(tol);
    const auto& g = s.weights.growth();
    return truncated_sum(s.weights, x, tol, lambert_term_scale,
                         [&](std::uint64_t n) { return lambert_tail_bound(g, x, n); });
}

SeriesValue eval_exp_series_terms(const ExpSeries& s, double x, std::uint64_t N)
{
    check_domain(x, s.domain_min, "eval_exp_series_terms");
    auto r = fixed_sum(s.coeffs, x, N, exp_term_scale);
    r.tail_bound = power_geometric_tail(s.coeffs.growth(), std::exp(-x), N);
    return r;
}

SeriesValue eval_lambert_series_terms(const LambertSeries& s, double x, std::uint64_t N)
{
    check_domain(x, s.domain_min, "eval_lambert_series_terms");
    auto r = fixed_sum(s.weights, x, N, lambert_term_scale);
    r.tail_bound = lambert_tail_bound(s.weights.growth(), x, N);
    return r;
}

ExpSeries lambert_to_exp(const LambertSeries& s)
{
    return {divisor_transformed(s.weights), s.domain_min};
}

LambertSeries exp_to_lambert(const ExpSeries& s)
{
    return {mobius_inverted(s.coeffs), s.domain_min};
}

ExpSeries termwise_derivative(const ExpSeries& s, unsigned nu)
{
    if (nu == 0) return s;
    auto c = s.coeffs;
    GrowthBound g = c.growth();
    g.degree += nu;
    CoefficientSequence d(
        [c, nu](std::uint64_t n) { return c(n) * std::pow(-static_cast<double>(n), nu); },
        "d^" + std::to_string(nu) + "(" + c.description() + ")", g);
    return {d, s.domain_min};
}

LambertSeries termwise_derivative(const LambertSeries& s, unsigned nu)
{
    if (nu > 12) throw DomainError("termwise_derivative: order above 12 is not supported");
    if (nu == 0) return s;
    const auto inner = divisor_transformed(s.weights);
    GrowthBound g = inner.growth();
    g.degree += nu;
    CoefficientSequence scaled(
        [inner, nu](std::uint64_t d) { return inner(d) * std::pow(-static_cast<double>(d), nu); },
        "(-d)^" + std::to_string(nu) + " " + inner.description(), g);
    return {mobius_inverted(scaled), s.domain_min};
}

TaylorHead TaylorHead::finite(std::vector<complex> coeffs)
{
    const auto D = static_cast<std::uint64_t>(coeffs.size());
    return {sequences::custom(std::move(coeffs), true), D, {}};
}

complex product_exponent(const TaylorHead& f, std::uint64_t n)
{
    return mobius_inverse_transform(f.coeffs, n) / static_cast<double>(n);
}

ProductIdentity product_identity_check(const TaylorHead& f, double q, double tol)
{
    if (!(q > 0.0 && q <= 0.7))
        throw DomainError("product_identity_check: q must lie in (0, 0.7]");
    check_tol(tol);

    // f(u)/u, either from the closed form or from the Taylor data.
    const auto f_over_u = [&](double u) -> complex {
        if (f.closed_form) return f.closed_form(u) / u;
        detail::CompensatedSum sum;
        double pw = 1.0;
        const std::uint64_t cap = f.degree ? *f.degree : kMaxTerms;
        for (std::uint64_t d = 1; d <= cap; ++d) {
            sum.add(f.coeffs(d) * pw);
            pw *= u;
            if (!f.degree && power_geometric_tail(f.coeffs.growth(), u, d) <= 1e-3 * tol * u)
                break;
        }
        return sum.value();
    };
    // tanh-sinh: smooth integrand on a finite interval, and a realistic error estimate.
    const auto integral = quad::tanh_sinh(f_over_u, 0.0, q, 1e-3 * tol);
    if (integral.error > tol * std::max(1.0, std::abs(integral.value))) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.3g", integral.error);
        throw QuadratureError(std::string("product_identity_check: quadrature error ") + buf
                              + " exceeds tolerance");
    }

    ProductIdentity out;
    out.lhs = std::exp(-integral.value);

    // |X(n)| <= bound / n, |log(1 - q^n)| <= q^n / (1 - q).
    GrowthBound xb = divisor_sum_bound(f.coeffs.growth());
    xb.degree -= 1.0;
    detail::CompensatedSum log_rhs;
    for (std::uint64_t n = 1;; ++n) {
        if (n > kMaxTerms) throw TruncationError("product_identity_check: product did not converge");
        const complex x = product_exponent(f, n);
        if (x != 0.0) log_rhs.add(x * std::log1p(-std::pow(q, static_cast<double>(n))));
        if (power_geometric_tail(xb, q, n) / (1.0 - q) <= 1e-3 * tol) {
            out.factors_used = n;
            break;
        }
    }
    out.rhs = std::exp(log_rhs.value());
    out.difference = std::abs(out.lhs - out.rhs);
    return out;
}

}  // namespace opcalc
