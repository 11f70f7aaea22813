#pragma once

#include "opcalc/arith.hpp"
#include "opcalc/ode1d.hpp"
#include "opcalc/series.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace opcalc {

/// One term weight * d^order/dx^order applied to y(x + shift).
struct OperatorTerm {
    complex weight;
    unsigned order = 0;
    complex shift = 0.0;
};

/// A linear operator built from derivatives and (possibly complex) shifts.
/// It multiplies e^{lambda x} by F(lambda) = sum weight * lambda^order * e^{lambda shift}.
struct OperatorSpec {
    std::vector<OperatorTerm> terms;
    std::string description;

    complex symbol(complex lambda) const;
    /// Action on e^{i n x}; equals symbol(i n).
    complex mode_factor(std::int64_t n) const { return symbol(complex(0.0, static_cast<double>(n))); }
    bool has_real_coefficients() const;

    OperatorSpec& add(complex weight, unsigned order, complex shift = 0.0);
    OperatorSpec operator+(const OperatorSpec& other) const;

    /// Terms produced by `generator(l)` for l = 0, 1, ... until |weight| < cutoff.
    static OperatorSpec from_generator(const std::function<OperatorTerm(std::uint64_t)>& generator,
                                       std::string description, double cutoff = 1e-16,
                                       std::uint64_t max_terms = 10'000);
    static OperatorSpec from_poly(const CharPoly& p);

    // Symbols used throughout the examples.
    static OperatorSpec derivative();              // lambda
    static OperatorSpec shift(complex s);          // e^{lambda s}
    static OperatorSpec cosh_shift(complex s);     // (e^{lambda s} + e^{-lambda s}) / 2
    /// h(lambda) = e^{lambda - e^lambda} = sum_l (-1)^l / l! e^{(l+1) lambda}
    static OperatorSpec exp_exp_series();
};

/// u(x,t) = sum_n C(n) exp(-rate(n) t + offset(t)) e^{-n x}.
struct EvolutionSolution {
    CoefficientSequence coeffs;
    std::function<complex(std::uint64_t)> mode_rate;
    std::function<complex(double)> time_offset;   // zero for the free equations
    /// Returns r such that Re(rate(n)) t >= r n for every n >= 1, or throws
    /// when no such linear bound exists (the series diverges at t).
    std::function<double(double)> rate_floor;
    double rate_degree = 1.0;   // |rate(n)| <= n^rate_degree
    double domain_min = 0.05;
    std::string description;

    SeriesValue eval(double x, double t, double tol) const;
    /// d^jt/dt^jt d^jx/dx^jx u, applied term-wise (requires no time offset when jt > 0).
    SeriesValue eval_derivative(double x, double t, unsigned jx, unsigned jt, double tol) const;
};

/// d^nu u/dt^nu + d^nu u/dx^nu = 0 with u(x,0) = sum C(n) e^{-nx}:
/// rate(n) = e^{i pi / nu} n.
EvolutionSolution evolution_solution(unsigned nu, const CoefficientSequence& c,
                                     double domain_min = 0.05);

/// u_t = -d^m u/dx^m + V(t) u, solved by rate(n) = (-n)^m and offset
/// f(t) = int_c^t V(w) dw (adaptive quadrature).
EvolutionSolution schrodinger_solution(unsigned m, std::function<double(double)> potential,
                                       const CoefficientSequence& c, double lower_limit,
                                       double domain_min = 0.05);

/// Truncated bilateral series y_M(x) = sum_{0<|n|<=M} c_n e^{i n x}.
struct TrigSeries {
    std::int64_t M = 0;
    std::vector<complex> coeffs;   // index n + M; coeffs[M] = 0

    complex coeff(std::int64_t n) const { return coeffs[static_cast<std::size_t>(n + M)]; }
    complex operator()(complex x) const;
    complex derivative(complex x, unsigned order) const;
};

/// Fourier coefficients of x - pi on (0, 2 pi): i/n for n != 0.
complex sawtooth_coefficient(std::int64_t n);

/// Solves F(d/dx) y = x - pi: c_n = i / (n F(i n)). Rejects any n with a
/// vanishing or non-finite F(i n) (AdmissibilityError naming the indices).
TrigSeries fourier_fde_solve(const OperatorSpec& f, std::int64_t M);

/// Same with a general right-hand side given by its Fourier coefficients g_n.
TrigSeries fourier_fde_solve(const OperatorSpec& f, std::int64_t M,
                             const std::function<complex(std::int64_t)>& rhs_coefficient);

/// max over samples of |F(d/dx) y_M - (x - pi)|, derivatives and shifts acting
/// on each e^{inx} in closed form. Samples must lie in [0.1, 2 pi - 0.1].
double fde_residual(const OperatorSpec& f, const TrigSeries& y, std::span<const double> samples);

struct ClosedFormReport {
    complex slope;       // particular solution slope * x + intercept
    complex intercept;
    std::vector<complex> homogeneous;   // fitted C_k for e^{rho_k x}
    double l2_distance = 0.0;           // after projecting out the homogeneous modes
    double l2_raw = 0.0;                // before projection
    std::int64_t M = 0;
};

/// Compares the affine particular solution (x a0 - a0 pi - a1) / a0^2 of
/// P(d/dx) y = x - pi with the Fourier solution on (0, 2 pi), modulo the
/// span of e^{rho x} over the given roots.
ClosedFormReport closed_form_compare(const CharPoly& p, std::span<const complex> roots,
                                     std::int64_t M);

}  // namespace opcalc
