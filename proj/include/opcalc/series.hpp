#pragma once

#include "opcalc/arith.hpp"

#include <cstdint>
#include <functional>
#include <optional>

namespace opcalc {

/// Hard cap on the number of terms any truncated evaluation may use.
inline constexpr std::uint64_t kMaxTerms = 10'000'000;

/// Result of a truncated series evaluation. `tail_bound` is a rigorous bound on
/// the omitted remainder, given the series' growth bound.
struct SeriesValue {
    complex value;
    std::uint64_t terms_used = 0;
    double tail_bound = 0.0;
};

/// Upper bound on sum_{n>N} K n^d q^n (q in (0,1)); +inf when the ratio test
/// does not yet apply at N.
double power_geometric_tail(const GrowthBound& b, double q, std::uint64_t N);

/// Upper bound on sum_{n>N} K n^d / (e^{n x} - 1).
double lambert_tail_bound(const GrowthBound& b, double x, std::uint64_t N);

/// sum_{n>=1} C(n) e^{-n x}
struct ExpSeries {
    CoefficientSequence coeffs;
    double domain_min = 0.05;
};

/// sum_{n>=1} W(n) / (e^{n x} - 1)
struct LambertSeries {
    CoefficientSequence weights;
    double domain_min = 0.05;
};

SeriesValue eval_exp_series(const ExpSeries& s, double x, double tol);
SeriesValue eval_lambert_series(const LambertSeries& s, double x, double tol);

/// Same sums, but with exactly N terms (no truncation control). The tail bound
/// is still reported.
SeriesValue eval_exp_series_terms(const ExpSeries& s, double x, std::uint64_t N);
SeriesValue eval_lambert_series_terms(const LambertSeries& s, double x, std::uint64_t N);

/// C(n) = sum_{d|n} W(d)
ExpSeries lambert_to_exp(const LambertSeries& s);
/// W(n) = sum_{d|n} C(d) mu(n/d)
LambertSeries exp_to_lambert(const ExpSeries& s);

/// nu-th derivative in x, as a Lambert series: with inner data A = sum_{d|n} W(d),
/// the new weights are sum_{d|n} A(d) (-d)^nu mu(n/d). Requires nu <= 12.
LambertSeries termwise_derivative(const LambertSeries& s, unsigned nu);
/// nu-th derivative of an exponential series: C(n) (-n)^nu.
ExpSeries termwise_derivative(const ExpSeries& s, unsigned nu);

/// Taylor data f_d = f^{(d)}(0)/d!, d >= 1 (f(0) = 0 is implied).
/// `degree` set means f is the polynomial of that degree; `closed_form`
/// optionally supplies f itself for the quadrature side.
struct TaylorHead {
    CoefficientSequence coeffs;
    std::optional<std::uint64_t> degree;
    std::function<complex(double)> closed_form;

    /// Finite head (f_1, ..., f_D).
    static TaylorHead finite(std::vector<complex> coeffs);
};

struct ProductIdentity {
    complex lhs;   // exp(-int_x^inf f(e^{-t}) dt) = exp(-int_0^q f(u)/u du)
    complex rhs;   // prod_n (1 - q^n)^{X(n)}, X(n) = (1/n) sum_{d|n} f_d mu(n/d)
    double difference = 0.0;
    std::uint64_t factors_used = 0;
};

/// Evaluates both sides of the Moebius product identity at q in (0, 0.7].
ProductIdentity product_identity_check(const TaylorHead& f, double q, double tol);

/// Exponent X(n) of the n-th product factor.
complex product_exponent(const TaylorHead& f, std::uint64_t n);

}  // namespace opcalc
