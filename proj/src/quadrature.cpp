#include "opcalc/quadrature.hpp"

#include "opcalc/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace opcalc::quad {

namespace {

constexpr unsigned kMaxDepth = 15;
// Relative tolerances below a few ulps cannot be met and only deepen the recursion.
constexpr double kMinTol = 4.0 * std::numeric_limits<double>::epsilon();

template <class Rule>
Result integrate_parts(const Rule& rule, const Integrand& f)
{
    double err_re = 0.0, err_im = 0.0;
    const double re = rule([&](double x) { return f(x).real(); }, &err_re);
    const double im = rule([&](double x) { return f(x).imag(); }, &err_im);
    if (!std::isfinite(re) || !std::isfinite(im))
        throw QuadratureError("quadrature produced a non-finite value");
    return {{re, im}, std::hypot(err_re, err_im)};
}

}  // namespace

Result gauss_kronrod(const Integrand& f, double a, double b, double tol)
{
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    return integrate_parts(
        [&](auto&& g, double* err) { return GK::integrate(g, a, b, kMaxDepth, std::max(tol, kMinTol), err); }, f);
}

Result tanh_sinh(const Integrand& f, double a, double b, double tol)
{
    boost::math::quadrature::tanh_sinh<double> integrator;
    return integrate_parts(
        [&](auto&& g, double* err) {
            double l1 = 0.0;
            return integrator.integrate(g, a, b, std::max(tol, kMinTol), err, &l1);
        },
        f);
}

}  // namespace opcalc::quad
