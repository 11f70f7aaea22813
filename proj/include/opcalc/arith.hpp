#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace opcalc {

using complex = std::complex<double>;

/// Prime-power decomposition n = prod p^e with strictly increasing primes.
struct Factorization {
    std::uint64_t n = 1;
    std::vector<std::pair<std::uint64_t, unsigned>> factors;
};

/// Deterministic trial division. Throws DomainError for n = 0.
Factorization factorize(std::uint64_t n);

/// Moebius function; DomainError for n = 0.
int mobius(std::uint64_t n);

/// Ascending divisor list of n; DomainError for n = 0.
std::vector<std::uint64_t> divisors(std::uint64_t n);

/// Euler totient from the factorization.
std::uint64_t totient(std::uint64_t n);

/// |a(n)| <= constant * n^degree for every n >= 1.
struct GrowthBound {
    double constant = 1.0;
    double degree = 0.0;

    double at(double n) const;
};

/// Bound on the divisor sum (or Moebius inverse) of a sequence with bound `b`,
/// using sigma_0(n) <= 2 sqrt(n).
GrowthBound divisor_sum_bound(const GrowthBound& b);

/// A deterministic map n -> complex value, n >= 1, with a growth bound.
///
/// Copies share the evaluation function. `memoized()` wraps it in a
/// thread-safe cache; caching never changes the returned values.
class CoefficientSequence {
public:
    using Fn = std::function<complex(std::uint64_t)>;

    CoefficientSequence() = default;
    CoefficientSequence(Fn fn, std::string description, GrowthBound growth = {});

    complex operator()(std::uint64_t n) const;

    const std::string& description() const noexcept { return description_; }
    const GrowthBound& growth() const noexcept { return growth_; }
    void set_growth(GrowthBound g) { growth_ = g; }

    CoefficientSequence memoized() const;

private:
    Fn fn_;
    std::string description_;
    GrowthBound growth_;
};

/// sum_{d|n} W(d)
complex divisor_transform(const CoefficientSequence& w, std::uint64_t n);

/// sum_{d|n} G(d) mu(n/d)
complex mobius_inverse_transform(const CoefficientSequence& g, std::uint64_t n);

/// Sequence-level versions; the growth bound is propagated.
CoefficientSequence divisor_transformed(const CoefficientSequence& w);
CoefficientSequence mobius_inverted(const CoefficientSequence& g);

namespace sequences {

CoefficientSequence one();
CoefficientSequence identity();           // n
CoefficientSequence sigma(unsigned nu);   // sum_{d|n} d^nu
CoefficientSequence sigma0();
CoefficientSequence mobius();
CoefficientSequence phi();
CoefficientSequence inverse_square();     // 1/n^2
CoefficientSequence delta1();             // 1 at n = 1, else 0

/// Finite list (index 1-based). `zero_extend` pads with zeros past the end;
/// otherwise evaluation past the end throws DomainError.
CoefficientSequence custom(std::vector<complex> values, bool zero_extend);

/// Registry lookup by name: one, n, sigma0, mobius, phi, inverse_square, delta1.
/// Throws DomainError for unknown names.
CoefficientSequence named(const std::string& name);
const std::vector<std::string>& registry_names();

}  // namespace sequences

}  // namespace opcalc
