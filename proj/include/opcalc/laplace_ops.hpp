#pragma once

#include "opcalc/arith.hpp"
#include "opcalc/evolution.hpp"
#include "opcalc/ode1d.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace opcalc {

/// Supported entries of the inverse-Laplace table.
struct LaplaceSpec {
    enum class Kind { inverse_power, shifted_pole, delayed_power };

    Kind kind = Kind::inverse_power;
    unsigned k = 1;      // power, k >= 1
    complex a = 0.0;     // pole location for (s - a)^{-k}
    double b = 0.0;      // delay for e^{-b s} s^{-k}, b >= 0

    static LaplaceSpec inverse_power(unsigned k) { return {Kind::inverse_power, k, 0.0, 0.0}; }
    static LaplaceSpec shifted_pole(complex a, unsigned k) { return {Kind::shifted_pole, k, a, 0.0}; }
    static LaplaceSpec delayed_power(double b, unsigned k) { return {Kind::delayed_power, k, 0.0, b}; }

    /// Parses "power:K", "pole:A:K" or "delayed:B:K".
    static LaplaceSpec parse(const std::string& text);
    std::string to_string() const;
};

/// |phi(w)| <= constant * max(w, 1)^power * e^{exponent w} for w >= 0.
struct GrowthCertificate {
    double constant = 1.0;
    double power = 0.0;
    double exponent = 0.0;

    double at(double w) const;
};

/// A Laplace pair: phi on [0, inf) and its transform g(s) = int phi e^{-sw} dw.
struct InverseLaplaceEntry {
    std::string description;
    std::function<complex(double)> phi;
    /// n-th derivative of g at s (closed form).
    std::function<complex(complex, unsigned)> transform_derivative;
    GrowthCertificate growth;
    double abscissa = 0.0;                 // g valid for Re s > abscissa
    std::vector<double> breakpoints;       // kinks of phi

    complex transform(complex s) const { return transform_derivative(s, 0); }
};

/// Table lookup; UnsupportedError for anything outside the table.
InverseLaplaceEntry inverse_laplace(const LaplaceSpec& spec);

/// sum_j weights[j] * entries[j]
InverseLaplaceEntry combine(std::span<const InverseLaplaceEntry> entries,
                            std::span<const complex> weights);

/// An operator symbol h(lambda). Quadrature uses the reflected form h(-w), w >= 0.
struct SymbolFunction {
    std::function<complex(complex)> h;
    std::string description;
    /// Smallest w >= 0 at which h(-w) is singular, if any.
    std::optional<double> reflected_singularity;
    /// Derivative/shift realization, when the symbol has one.
    std::optional<OperatorSpec> terms;

    complex reflected(double w) const { return h(complex(-w, 0.0)); }

    static SymbolFunction from_operator(const OperatorSpec& op);
    static SymbolFunction from_poly(const CharPoly& p);
    static SymbolFunction constant(complex c);
};

struct IntegralValue {
    complex value;
    double error = 0.0;        // quadrature estimate plus tail estimate
    double path_end = 0.0;     // upper limit actually integrated to
    bool restricted = false;   // path stopped short of a symbol singularity
};

inline constexpr double kOperatorTolerance = 1e-8;

/// h(d/dx) f(x) = int_0^inf (L^{-1} f)(w) h(-w) e^{-x w} dw.
/// DivergenceError when the integrand does not decay, SingularPathError when a
/// symbol singularity blocks the path and the remainder cannot be bounded.
IntegralValue apply_operator(const SymbolFunction& h, const InverseLaplaceEntry& f, complex x,
                             double tol = kOperatorTolerance);

/// y(s) = int_0^inf (L^{-1} g)(w) / f(-w) e^{-s w} dw solves f(d/ds) y = g.
class OperatorSolution {
public:
    OperatorSolution(SymbolFunction f, InverseLaplaceEntry g);

    IntegralValue evaluate(complex s, double tol = kOperatorTolerance) const;
    complex operator()(complex s) const { return evaluate(s).value; }
    /// k-th derivative in s, differentiating under the integral.
    complex derivative(complex s, unsigned k, double tol = kOperatorTolerance) const;
    IntegralValue evaluate_derivative(complex s, unsigned k, double tol = kOperatorTolerance) const;

    /// (L^{-1} y)(w) = (L^{-1} g)(w) / f(-w)
    complex inverse_transform(double w) const;
    /// The solution as a Laplace pair (transform evaluated by quadrature).
    InverseLaplaceEntry as_entry() const;

    const SymbolFunction& symbol() const noexcept { return f_; }
    const InverseLaplaceEntry& rhs() const noexcept { return g_; }

private:
    SymbolFunction f_;
    InverseLaplaceEntry g_;
};

/// Checks f(-w) for zeros on [0, w_max]; SingularPathError with the location.
void require_zero_free(const SymbolFunction& f, double w_max);
/// Same, but a zero is accepted where (L^{-1} g)(w) / f(-w) stays bounded.
void require_integrable_quotient(const SymbolFunction& f, const InverseLaplaceEntry& g, double w_max);

OperatorSolution solve_operator_eq(const SymbolFunction& f, const InverseLaplaceEntry& g);

/// max over samples of |sum_terms weight * y^{(order)}(s + shift) - g(s)|:
/// applies a derivative/shift operator pointwise to a quadrature-backed solution.
double pointwise_residual(const OperatorSpec& op, const OperatorSolution& y,
                          const std::function<complex(complex)>& g, std::span<const double> samples);

struct RoundTripReport {
    std::vector<double> samples;
    std::vector<complex> expected;            // g(s)
    std::vector<complex> via_integrals;       // h(d/ds) applied through the inverse-transform integral
    std::vector<complex> via_terms;           // h applied term by term (empty if h has no terms)
    double max_integral_error = 0.0;
    double max_term_error = 0.0;
};

/// y = (1/h)(d/ds) g, then h(d/ds) y, compared with g at the samples.
RoundTripReport invert_round_trip(const SymbolFunction& h, const InverseLaplaceEntry& g,
                                  std::span<const double> samples);

/// Even/odd split cross-check for polynomial symbols:
/// int_0^inf P(w) phi(w) e^{-sw} dw versus sum_k p_k (-1)^k g^{(k)}(s).
struct EvenOddCheck {
    complex integral;
    complex derivative_sum;
};
EvenOddCheck even_odd_check(const CharPoly& p, const InverseLaplaceEntry& g, double s);

}  // namespace opcalc
