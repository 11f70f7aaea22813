#pragma once

#include <complex>
#include <functional>

namespace opcalc::quad {

using complex = std::complex<double>;
using Integrand = std::function<complex(double)>;

struct Result {
    complex value;
    double error = 0.0;   // estimated absolute error (real and imaginary parts combined)
};

/// Adaptive Gauss-Kronrod (15/31) on a finite interval.
Result gauss_kronrod(const Integrand& f, double a, double b, double tol);

/// Double-exponential (tanh-sinh) on a finite interval; tolerates endpoint
/// singularities.
Result tanh_sinh(const Integrand& f, double a, double b, double tol);

}  // namespace opcalc::quad
