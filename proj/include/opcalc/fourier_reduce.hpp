#pragma once

#include "opcalc/arith.hpp"

#include <array>
#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

namespace opcalc {

/// Uniform samples on [-L, L) (space) or on the matching frequency grid
/// gamma_k = (k - N/2) pi / L (frequency). N is a power of two, N >= 8.
struct SampledFunction {
    enum class Domain { space, frequency };

    double half_width = 1.0;   // L, always the spatial half-width
    std::vector<complex> values;
    Domain domain = Domain::space;

    std::size_t size() const noexcept { return values.size(); }
    double spacing() const;                 // 2L/N or pi/L
    double coordinate(std::size_t j) const;
    void validate() const;                  // DomainError on a bad grid

    static SampledFunction sample(double L, std::size_t N, const std::function<complex(double)>& f);
};

/// f_hat(gamma) = int f(x) e^{-i gamma x} dx, discretized by the trapezoid rule.
SampledFunction forward_transform(const SampledFunction& u);
/// f(x) = (1/2pi) int f_hat(gamma) e^{i gamma x} d gamma; exact inverse of forward_transform.
SampledFunction inverse_transform(const SampledFunction& u_hat);
/// u' via multiplication by i gamma.
SampledFunction spectral_derivative(const SampledFunction& u);
/// d/d gamma of a frequency-domain function, through x-space (multiply by -i x).
SampledFunction frequency_derivative(const SampledFunction& u_hat);

/// CSV with header "x,re,im" or "gamma,re,im", 17 significant digits.
void write_csv(std::ostream& os, const SampledFunction& u);

/// c0 + c1 t + c2 t^2
struct ComplexQuadratic {
    std::array<complex, 3> c{};

    complex operator()(complex t) const { return c[0] + t * (c[1] + t * c[2]); }
    complex derivative(complex t) const { return c[1] + 2.0 * c[2] * t; }
    std::size_t degree() const;
    bool is_zero() const { return degree() == 0 && c[0] == 0.0; }
    /// Roots (none for a nonzero constant).
    std::vector<complex> roots() const;
};

/// (a1 x + b1) f'' + (a2 x + b2) f' + (a3 x + b3) f = g
struct LinearCoeffODE {
    double a1 = 0, b1 = 0, a2 = 0, b2 = 0, a3 = 0, b3 = 0;
    SampledFunction g;
};

/// p(gamma) f_hat' + q(gamma) f_hat = g_hat
struct ReducedEquation {
    ComplexQuadratic p, q;
    SampledFunction g;       // space samples, kept for exact evaluation of g_hat off-grid
    SampledFunction g_hat;
};

/// Frequency-domain coefficients:
///   p = -i a1 gamma^2 - a2 gamma + i a3
///   q = -b1 gamma^2 - 2 i a1 gamma + i b2 gamma - a2 + b3
ReducedEquation reduce(const LinearCoeffODE& ode);

struct ReducedStats {
    std::size_t refinement = 1;
    std::vector<std::string> warnings;
};

/// Bounded solution of the reduced equation on the frequency grid of g_hat.
SampledFunction solve_reduced(const ReducedEquation& eq, ReducedStats* stats = nullptr);

struct LinearCoeffSolution {
    SampledFunction f;
    SampledFunction f_hat;
    double residual_max = 0.0;   // 4th-order finite differences on the interior
    double residual_l2 = 0.0;
    std::size_t refinement = 1;
    std::vector<std::string> warnings;
};

LinearCoeffSolution solve_linear_coeff(const LinearCoeffODE& ode);

/// max and discrete L2 norm of the equation residual for samples f, using
/// 4th-order central differences at interior points 2 .. N-3.
std::pair<double, double> fd_residual(const LinearCoeffODE& ode, const SampledFunction& f);

}  // namespace opcalc
