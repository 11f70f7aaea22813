#pragma once

#include "opcalc/arith.hpp"
#include "opcalc/ode1d.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace opcalc {

/// |a(n,m)| <= constant * n^degree_x * m^degree_y
struct GrowthBound2 {
    double constant = 1.0;
    double degree_x = 0.0;
    double degree_y = 0.0;
};

/// Two-index coefficient map (k, m) -> complex, k, m >= 1.
struct CoefficientSequence2 {
    std::function<complex(std::uint64_t, std::uint64_t)> eval;
    std::string description;
    GrowthBound2 growth;

    complex operator()(std::uint64_t k, std::uint64_t m) const { return eval(k, m); }

    /// c(k,m) = a(k) b(m)
    static CoefficientSequence2 separable(const CoefficientSequence& a, const CoefficientSequence& b);
};

/// G(x,y) = sum c(k,m) / ((e^{kx}-1)(e^{my}-1))
struct DoubleLambertSeries {
    CoefficientSequence2 weights;
    double domain_min = 0.05;
};

/// Dense N x N table indexed from 1.
class Table2 {
public:
    explicit Table2(std::size_t n = 0) : n_(n), v_(n * n) {}

    complex& operator()(std::size_t i, std::size_t j) { return v_[(i - 1) * n_ + (j - 1)]; }
    complex operator()(std::size_t i, std::size_t j) const { return v_[(i - 1) * n_ + (j - 1)]; }
    std::size_t size() const noexcept { return n_; }

private:
    std::size_t n_;
    std::vector<complex> v_;
};

/// (n,m) -> sum_{d|n, e|m} t(d,e)
Table2 divisor_transform2(const Table2& t);
/// (n,m) -> sum_{d|n, e|m} t(d,e) mu(n/d) mu(m/e)
Table2 mobius_inverse_transform2(const Table2& t);

/// Solution of sum_{k,l} a_k b_l d^k_x d^l_y u = G for G a double Lambert series.
struct Grid2Coefficients {
    std::size_t truncation = 0;
    Table2 c;   // right-hand-side weights
    Table2 B;   // B(n,m) = (sum_{k|n, r|m} c(k,r)) / (Px(-n) Py(-m))
    Table2 S;   // Lambert weights of u
    GrowthBound2 s_growth;
    double domain_min = 0.05;
    std::vector<std::string> warnings;
};

Grid2Coefficients solve_2d(const CharPoly& px, const CharPoly& py, const CoefficientSequence2& c,
                           std::size_t truncation, double domain_min = 0.05);

/// u(x,y) = sum S(n,m) / ((e^{nx}-1)(e^{my}-1)); TruncationError if the tail
/// bound at the table's truncation still exceeds tol.
complex eval_2d(const Grid2Coefficients& sol, double x, double y, double tol);

complex eval_double_lambert(const DoubleLambertSeries& g, double x, double y, double tol);

/// max over samples of |sum a_k b_l d^k_x d^l_y u - G|; derivatives act
/// term-wise on the Lambert weights of u, one variable at a time.
double residual_2d(const CharPoly& px, const CharPoly& py, const Grid2Coefficients& sol,
                   const DoubleLambertSeries& g, std::span<const std::pair<double, double>> samples,
                   double tol = 1e-15);

}  // namespace opcalc
