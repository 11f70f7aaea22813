#pragma once

// Independent reference computations used by the tests. None of these call into
// the library.

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using complex = std::complex<double>;
using big = boost::multiprecision::cpp_bin_float_50;

inline std::vector<std::uint64_t> divisors_brute(std::uint64_t n)
{
    std::vector<std::uint64_t> d;
    for (std::uint64_t k = 1; k <= n; ++k)
        if (n % k == 0) d.push_back(k);
    return d;
}

/// Euler phi by counting k <= n with gcd(k, n) = 1.
inline std::uint64_t totient_gcd(std::uint64_t n)
{
    std::uint64_t c = 0;
    for (std::uint64_t k = 1; k <= n; ++k)
        if (std::gcd(k, n) == 1) ++c;
    return c;
}

/// Moebius function from the definition, via trial division on a copy.
inline int mobius_brute(std::uint64_t n)
{
    int sign = 1;
    for (std::uint64_t p = 2; p <= n; ++p) {
        if (n % p) continue;
        n /= p;
        if (n % p == 0) return 0;
        sign = -sign;
    }
    return sign;
}

inline bool is_prime(std::uint64_t n)
{
    if (n < 2) return false;
    for (std::uint64_t k = 2; k * k <= n; ++k)
        if (n % k == 0) return false;
    return true;
}

/// Richardson-extrapolated central difference (Ridders' tableau).
inline complex derivative(const std::function<complex(double)>& f, double x, double h = 1e-2)
{
    constexpr int n = 8;
    complex a[n][n];
    double hh = h;
    a[0][0] = (f(x + hh) - f(x - hh)) / (2.0 * hh);
    complex best = a[0][0];
    double err = INFINITY;
    for (int i = 1; i < n; ++i) {
        hh /= 1.4;
        a[0][i] = (f(x + hh) - f(x - hh)) / (2.0 * hh);
        double fac = 1.96;
        for (int j = 1; j <= i; ++j) {
            a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
            fac *= 1.96;
            const double e = std::max(std::abs(a[j][i] - a[j - 1][i]), std::abs(a[j][i] - a[j - 1][i - 1]));
            if (e <= err) {
                err = e;
                best = a[j][i];
            }
        }
        if (std::abs(a[i][i] - a[i - 1][i - 1]) >= 2.0 * err) break;
    }
    return best;
}

/// k-th derivative by nesting the Ridders estimate (k <= 3 in practice).
inline complex derivative_n(const std::function<complex(double)>& f, double x, unsigned k, double h = 5e-2)
{
    if (k == 0) return f(x);
    if (k == 1) return derivative(f, x, h);
    return derivative([&](double t) { return derivative_n(f, t, k - 1, h); }, x, h);
}

/// Fixed-step central differences with a 5-point stencil: d/dx and d^2/dx^2.
inline complex d1_5pt(const std::function<complex(double)>& f, double x, double h)
{
    return (-f(x + 2 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2 * h)) / (12.0 * h);
}

inline complex d2_5pt(const std::function<complex(double)>& f, double x, double h)
{
    return (-f(x + 2 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2 * h)) / (12.0 * h * h);
}

/// sum_{n=1}^{N} c(n) q^n in 50-digit arithmetic (real coefficients).
inline double power_sum_50(const std::function<double(std::uint64_t)>& c, double x, std::uint64_t N)
{
    const big q = boost::multiprecision::exp(-big(x));
    big acc = 0, pw = 1;
    for (std::uint64_t n = 1; n <= N; ++n) {
        pw *= q;
        acc += big(c(n)) * pw;
    }
    return static_cast<double>(acc);
}

/// sum_{n=1}^{N} w(n) / (e^{nx} - 1) in 50-digit arithmetic.
inline double lambert_sum_50(const std::function<double(std::uint64_t)>& w, double x, std::uint64_t N)
{
    big acc = 0;
    for (std::uint64_t n = 1; n <= N; ++n) acc += big(w(n)) / boost::multiprecision::expm1(big(x) * n);
    return static_cast<double>(acc);
}

inline double sigma0(std::uint64_t n) { return static_cast<double>(divisors_brute(n).size()); }

}  // namespace oracle
