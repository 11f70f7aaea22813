#include "opcalc/ode1d.hpp"

#include "opcalc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace opcalc {

namespace {

constexpr std::uint64_t kScanCap = 10'000'000;

complex at_negative(const CharPoly& p, std::uint64_t n) { return p(-static_cast<double>(n)); }

double term_scale(const CharPoly& p, std::uint64_t n)
{
    double s = 0.0, pw = 1.0;
    for (const auto& a : p.coeffs()) {
        s += std::abs(a) * pw;
        pw *= static_cast<double>(n);
    }
    return s;
}

std::string list_indices(const std::vector<std::int64_t>& v)
{
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size() && i < 20; ++i) os << (i ? ", " : "") << v[i];
    if (v.size() > 20) os << ", ...";
    return os.str();
}

std::vector<std::string> resonance_warnings(const CharPoly& p)
{
    std::vector<std::string> out;
    const double threshold = 1e-6 * p.norm1();
    const auto last = static_cast<std::uint64_t>(std::ceil(p.cauchy_bound())) + 1;
    for (std::uint64_t n = 1; n <= std::min(last, kScanCap); ++n) {
        const double v = std::abs(at_negative(p, n));
        if (v < threshold)
            out.push_back("near-resonant mode n=" + std::to_string(n)
                          + ": |P(-n)| = " + std::to_string(v));
    }
    return out;
}

}  // namespace

CharPoly::CharPoly(std::vector<complex> coeffs) : coeffs_(std::move(coeffs))
{
    while (coeffs_.size() > 1 && coeffs_.back() == 0.0) coeffs_.pop_back();
    if (coeffs_.empty() || coeffs_.back() == 0.0)
        throw DomainError("CharPoly: leading coefficient must be nonzero");
}

complex CharPoly::operator()(complex w) const
{
    complex v = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) v = v * w + *it;
    return v;
}

double CharPoly::norm1() const
{
    double s = 0.0;
    for (const auto& a : coeffs_) s += std::abs(a);
    return s;
}

double CharPoly::cauchy_bound() const
{
    const double lead = std::abs(coeffs_.back());
    double m = 0.0;
    for (std::size_t k = 0; k + 1 < coeffs_.size(); ++k) m = std::max(m, std::abs(coeffs_[k]) / lead);
    return 1.0 + m;
}

double CharPoly::min_abs_on_negative_integers() const
{
    if (degree() == 0) return std::abs(coeffs_[0]);
    // For n >= 2S, S = sum_{k<N} |a_k/a_N|:  |P(-n)| >= |a_N| n^N / 2 >= |a_N| / 2.
    const double lead = std::abs(coeffs_.back());
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < coeffs_.size(); ++k) s += std::abs(coeffs_[k]) / lead;
    double m = lead / 2.0;
    const auto n0 = static_cast<std::uint64_t>(std::ceil(2.0 * s));
    for (std::uint64_t n = 1; n < std::min(n0, kScanCap); ++n)
        m = std::min(m, std::abs(at_negative(*this, n)));
    return m;
}

std::vector<std::int64_t> check_admissible(const CharPoly& p, std::uint64_t n_max)
{
    if (n_max < 1) throw DomainError("check_admissible: n_max must be >= 1");
    std::vector<std::int64_t> bad;
    if (p.degree() == 0) return bad;
    const auto last = static_cast<std::uint64_t>(std::ceil(p.cauchy_bound())) + 1;
    const auto stop = std::min({n_max, last, kScanCap});
    for (std::uint64_t n = 1; n <= stop; ++n)
        if (std::abs(at_negative(p, n)) < 1e-12 * term_scale(p, n))
            bad.push_back(static_cast<std::int64_t>(n));
    return bad;
}

void require_admissible(const CharPoly& p, const std::string& what)
{
    auto bad = check_admissible(p, kScanCap);
    if (!bad.empty()) {
        const auto msg = what + ": P(-n) vanishes for n = " + list_indices(bad);
        throw AdmissibilityError(msg, std::move(bad));
    }
}

namespace {

OdeSolution divide_by_symbol(const CharPoly& p, const CoefficientSequence& c, double domain_min,
                             const std::string& label)
{
    require_admissible(p, label);
    const double m = p.min_abs_on_negative_integers();
    GrowthBound g = c.growth();
    g.constant /= m;
    CoefficientSequence u(
        [p, c](std::uint64_t n) { return c(n) / at_negative(p, n); },
        c.description() + "/P(-n)", g);
    return {{u.memoized(), domain_min}, resonance_warnings(p)};
}

}  // namespace

OdeSolution solve_exp_rhs(const CharPoly& p, const CoefficientSequence& c, double domain_min)
{
    return divide_by_symbol(p, c, domain_min, "solve_exp_rhs");
}

OdeSolution solve_lambert_rhs(const CharPoly& p, const CoefficientSequence& c, double domain_min)
{
    return divide_by_symbol(p, divisor_transformed(c), domain_min, "solve_lambert_rhs");
}

CoefficientSequence solution_lambert_weights(const CharPoly& p, const CoefficientSequence& c)
{
    require_admissible(p, "solution_lambert_weights");
    GrowthBound g = c.growth();
    g.constant /= p.min_abs_on_negative_integers();
    CoefficientSequence a([p, c](std::uint64_t d) { return c(d) / at_negative(p, d); },
                          c.description() + "/P(-d)", g);
    return mobius_inverted(a);
}

double residual_ode(const CharPoly& p, const ExpSeries& u, const SeriesRhs& rhs,
                    std::span<const double> xs, double tol)
{
    GrowthBound g = u.coeffs.growth();
    g.constant *= p.norm1();
    g.degree += static_cast<double>(p.degree());
    const auto uc = u.coeffs;
    const ExpSeries lhs{CoefficientSequence(
                            [p, uc](std::uint64_t n) { return uc(n) * at_negative(p, n); },
                            "P(-n) u_n", g),
                        u.domain_min};
    double worst = 0.0;
    for (double x : xs) {
        const complex l = eval_exp_series(lhs, x, tol).value;
        const complex r = std::visit(
            [&](const auto& s) -> complex {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, ExpSeries>)
                    return eval_exp_series(s, x, tol).value;
                else
                    return eval_lambert_series(s, x, tol).value;
            },
            rhs);
        worst = std::max(worst, std::abs(l - r));
    }
    return worst;
}

}  // namespace opcalc
