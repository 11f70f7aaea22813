#include "opcalc/pde2d.hpp"

#include "opcalc/detail/summation.hpp"
#include "opcalc/errors.hpp"
#include "opcalc/series.hpp"

#include <cmath>

namespace opcalc {

namespace {

struct DivisorTables {
    std::vector<std::vector<std::uint64_t>> divs;   // divs[n] for n in 1..N
    std::vector<int> mu;

    explicit DivisorTables(std::size_t n) : divs(n + 1), mu(n + 1, 0)
    {
        for (std::size_t d = 1; d <= n; ++d) {
            for (std::size_t k = d; k <= n; k += d) divs[k].push_back(d);
            mu[d] = opcalc::mobius(d);
        }
    }
};

// Applies a one-index convolution (with or without the Moebius kernel) along
// one axis of the table.
Table2 convolve_axis(const Table2& t, const DivisorTables& dt, bool mobius_kernel, bool along_x)
{
    const std::size_t N = t.size();
    Table2 out(N);
    for (std::size_t i = 1; i <= N; ++i)
        for (std::size_t j = 1; j <= N; ++j) {
            const std::size_t n = along_x ? i : j;
            complex s = 0.0;
            for (auto d : dt.divs[n]) {
                const int w = mobius_kernel ? dt.mu[n / d] : 1;
                if (w == 0) continue;
                s += static_cast<double>(w) * (along_x ? t(d, j) : t(i, d));
            }
            out(i, j) = s;
        }
    return out;
}

// Bound on sum_{n>=1} n^degree / (e^{nx} - 1): explicit head until the ratio test applies.
double axis_full(double degree, double x)
{
    const GrowthBound unit{1.0, degree};
    double head = 0.0;
    for (std::uint64_t n = 0;; ++n) {
        const double tail = lambert_tail_bound(unit, x, n);
        if (std::isfinite(tail) || n > 100'000) return head + tail;
        head += std::pow(static_cast<double>(n + 1), degree) / std::expm1(static_cast<double>(n + 1) * x);
    }
}

double axis_tail(double degree, double x, std::uint64_t n)
{
    return lambert_tail_bound({1.0, degree}, x, n);
}

void check_point(double x, double y, double domain_min)
{
    if (!(x >= domain_min && y >= domain_min))
        throw DomainError("2-D evaluation below domain_min");
}

}  // namespace

CoefficientSequence2 CoefficientSequence2::separable(const CoefficientSequence& a,
                                                     const CoefficientSequence& b)
{
    return {[a, b](std::uint64_t k, std::uint64_t m) { return a(k) * b(m); },
            a.description() + " x " + b.description(),
            {a.growth().constant * b.growth().constant, a.growth().degree, b.growth().degree}};
}

Table2 divisor_transform2(const Table2& t)
{
    DivisorTables dt(t.size());
    return convolve_axis(convolve_axis(t, dt, false, false), dt, false, true);
}

Table2 mobius_inverse_transform2(const Table2& t)
{
    DivisorTables dt(t.size());
    return convolve_axis(convolve_axis(t, dt, true, false), dt, true, true);
}

Grid2Coefficients solve_2d(const CharPoly& px, const CharPoly& py, const CoefficientSequence2& c,
                           std::size_t truncation, double domain_min)
{
    if (truncation < 1) throw DomainError("solve_2d: truncation must be >= 1");
    require_admissible(px, "solve_2d (Px)");
    require_admissible(py, "solve_2d (Py)");

    const std::size_t N = truncation;
    Grid2Coefficients sol;
    sol.truncation = N;
    sol.domain_min = domain_min;
    sol.c = Table2(N);
    for (std::size_t k = 1; k <= N; ++k)
        for (std::size_t m = 1; m <= N; ++m) sol.c(k, m) = c(k, m);

    DivisorTables dt(N);
    const Table2 d = convolve_axis(convolve_axis(sol.c, dt, false, false), dt, false, true);
    sol.B = Table2(N);
    for (std::size_t n = 1; n <= N; ++n) {
        const complex fx = px(-static_cast<double>(n));
        for (std::size_t m = 1; m <= N; ++m)
            sol.B(n, m) = d(n, m) / (fx * py(-static_cast<double>(m)));
    }
    sol.S = convolve_axis(convolve_axis(sol.B, dt, true, false), dt, true, true);

    // |c| -> divisor sums -> division by symbols -> Moebius inversion.
    const auto& g = c.growth;
    const double dx = std::max(g.degree_x, 0.0) + 0.5, dy = std::max(g.degree_y, 0.0) + 0.5;
    sol.s_growth = {16.0 * g.constant
                        / (px.min_abs_on_negative_integers() * py.min_abs_on_negative_integers()),
                    dx + 0.5, dy + 0.5};
    return sol;
}

complex eval_2d(const Grid2Coefficients& sol, double x, double y, double tol)
{
    check_point(x, y, sol.domain_min);
    if (!(tol > 0.0)) throw DomainError("eval_2d: tolerance must be positive");
    const auto& g = sol.s_growth;
    const double fx = axis_full(g.degree_x, x), fy = axis_full(g.degree_y, y);
    std::size_t n_used = 0;
    for (std::size_t n = 1; n <= sol.truncation; ++n) {
        const double tail = g.constant
                            * (axis_tail(g.degree_x, x, n) * fy + fx * axis_tail(g.degree_y, y, n));
        if (tail <= tol) {
            n_used = n;
            break;
        }
    }
    if (n_used == 0)
        throw TruncationError("eval_2d: tolerance not reachable with truncation "
                              + std::to_string(sol.truncation));

    detail::CompensatedSum sum;
    for (std::size_t n = 1; n <= n_used; ++n) {
        const double ex = std::expm1(static_cast<double>(n) * x);
        for (std::size_t m = 1; m <= n_used; ++m)
            sum.add(sol.S(n, m) / (ex * std::expm1(static_cast<double>(m) * y)));
    }
    return sum.value();
}

complex eval_double_lambert(const DoubleLambertSeries& gs, double x, double y, double tol)
{
    check_point(x, y, gs.domain_min);
    const auto& g = gs.weights.growth;
    const double fx = axis_full(g.degree_x, x), fy = axis_full(g.degree_y, y);
    std::uint64_t n_used = 0;
    for (std::uint64_t n = 1; n <= 100'000; ++n) {
        const double tail = g.constant
                            * (axis_tail(g.degree_x, x, n) * fy + fx * axis_tail(g.degree_y, y, n));
        if (tail <= tol) {
            n_used = n;
            break;
        }
    }
    if (n_used == 0) throw TruncationError("eval_double_lambert: tolerance not reachable");
    detail::CompensatedSum sum;
    for (std::uint64_t n = 1; n <= n_used; ++n) {
        const double ex = std::expm1(static_cast<double>(n) * x);
        for (std::uint64_t m = 1; m <= n_used; ++m)
            sum.add(gs.weights(n, m) / (ex * std::expm1(static_cast<double>(m) * y)));
    }
    return sum.value();
}

double residual_2d(const CharPoly& px, const CharPoly& py, const Grid2Coefficients& sol,
                   const DoubleLambertSeries& g, std::span<const std::pair<double, double>> samples,
                   double tol)
{
    const std::size_t N = sol.truncation;
    DivisorTables dt(N);
    // Inner data of u, then the operator symbol per axis, then back to Lambert weights.
    Table2 inner = convolve_axis(convolve_axis(sol.S, dt, false, false), dt, false, true);
    for (std::size_t n = 1; n <= N; ++n) {
        const complex fx = px(-static_cast<double>(n));
        for (std::size_t m = 1; m <= N; ++m) inner(n, m) *= fx * py(-static_cast<double>(m));
    }
    const Table2 lhs = convolve_axis(convolve_axis(inner, dt, true, false), dt, true, true);

    double worst = 0.0;
    for (const auto& [x, y] : samples) {
        check_point(x, y, sol.domain_min);
        detail::CompensatedSum sum;
        for (std::size_t n = 1; n <= N; ++n) {
            const double ex = std::expm1(static_cast<double>(n) * x);
            for (std::size_t m = 1; m <= N; ++m)
                sum.add(lhs(n, m) / (ex * std::expm1(static_cast<double>(m) * y)));
        }
        worst = std::max(worst, std::abs(sum.value() - eval_double_lambert(g, x, y, tol)));
    }
    return worst;
}

}  // namespace opcalc
