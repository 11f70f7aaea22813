#pragma once

#include "opcalc/arith.hpp"
#include "opcalc/series.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace opcalc {

/// P(w) = sum_k a_k w^k, the symbol of sum_k a_k d^k/dx^k.
class CharPoly {
public:
    explicit CharPoly(std::vector<complex> coeffs);

    complex operator()(complex w) const;
    std::size_t degree() const noexcept { return coeffs_.size() - 1; }
    const std::vector<complex>& coeffs() const noexcept { return coeffs_; }

    /// sum_k |a_k|
    double norm1() const;
    /// Every root r satisfies |r| <= cauchy_bound().
    double cauchy_bound() const;
    /// A positive lower bound on |P(-n)| over all integers n >= 1; 0 when some
    /// P(-n) vanishes.
    double min_abs_on_negative_integers() const;

private:
    std::vector<complex> coeffs_;
};

/// Indices n <= n_max with |P(-n)| < 1e-12 * sum_k |a_k| n^k. Beyond the Cauchy
/// bound P has no roots, so scanning min(n_max, bound) is exhaustive.
std::vector<std::int64_t> check_admissible(const CharPoly& p, std::uint64_t n_max);

/// Throws AdmissibilityError if any P(-n), n >= 1, vanishes.
void require_admissible(const CharPoly& p, const std::string& what);

struct OdeSolution {
    ExpSeries u;
    std::vector<std::string> warnings;   // near-resonant modes
};

/// P(d/dx) u = sum C(n) e^{-nx}  =>  u_n = C(n) / P(-n)
OdeSolution solve_exp_rhs(const CharPoly& p, const CoefficientSequence& c,
                          double domain_min = 0.05);

/// P(d/dx) u = sum C(n) / (e^{nx} - 1)  =>  u_n = (sum_{d|n} C(d)) / P(-n)
OdeSolution solve_lambert_rhs(const CharPoly& p, const CoefficientSequence& c,
                              double domain_min = 0.05);

/// Solution weights in the Moebius divisor form: sum_{d|n} (C(d)/P(-d)) mu(n/d).
/// Feeding these through the divisor transform gives C(n)/P(-n).
CoefficientSequence solution_lambert_weights(const CharPoly& p, const CoefficientSequence& c);

using SeriesRhs = std::variant<ExpSeries, LambertSeries>;

/// max_x |P(d/dx) u(x) - rhs(x)| with derivatives taken term-wise.
double residual_ode(const CharPoly& p, const ExpSeries& u, const SeriesRhs& rhs,
                    std::span<const double> xs, double tol = 1e-15);

}  // namespace opcalc
