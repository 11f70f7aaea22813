#include "opcalc/evolution.hpp"

#include "opcalc/detail/summation.hpp"
#include "opcalc/errors.hpp"
#include "opcalc/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace opcalc {

using std::numbers::pi;

// ---------------------------------------------------------------------------
// OperatorSpec

complex OperatorSpec::symbol(complex lambda) const
{
    complex s = 0.0;
    for (const auto& t : terms) s += t.weight * std::pow(lambda, static_cast<int>(t.order)) * std::exp(lambda * t.shift);
    return s;
}

bool OperatorSpec::has_real_coefficients() const
{
    for (const auto& t : terms)
        if (t.weight.imag() != 0.0 || t.shift.imag() != 0.0) return false;
    return true;
}

OperatorSpec& OperatorSpec::add(complex weight, unsigned order, complex shift)
{
    terms.push_back({weight, order, shift});
    return *this;
}

OperatorSpec OperatorSpec::operator+(const OperatorSpec& other) const
{
    OperatorSpec out = *this;
    out.terms.insert(out.terms.end(), other.terms.begin(), other.terms.end());
    out.description = description + " + " + other.description;
    return out;
}

OperatorSpec OperatorSpec::from_generator(const std::function<OperatorTerm(std::uint64_t)>& generator,
                                          std::string description, double cutoff,
                                          std::uint64_t max_terms)
{
    OperatorSpec out;
    out.description = std::move(description);
    for (std::uint64_t l = 0; l < max_terms; ++l) {
        const auto t = generator(l);
        if (std::abs(t.weight) < cutoff) return out;
        out.terms.push_back(t);
    }
    throw TruncationError("OperatorSpec generator did not fall below cutoff within "
                          + std::to_string(max_terms) + " terms");
}

OperatorSpec OperatorSpec::from_poly(const CharPoly& p)
{
    OperatorSpec out;
    out.description = "P(d/dx)";
    for (std::size_t k = 0; k < p.coeffs().size(); ++k)
        if (p.coeffs()[k] != 0.0) out.add(p.coeffs()[k], static_cast<unsigned>(k));
    return out;
}

OperatorSpec OperatorSpec::derivative()
{
    OperatorSpec out;
    out.description = "d/dx";
    return out.add(1.0, 1);
}

OperatorSpec OperatorSpec::shift(complex s)
{
    OperatorSpec out;
    std::ostringstream os;
    os << "shift(" << s << ")";
    out.description = os.str();
    return out.add(1.0, 0, s);
}

OperatorSpec OperatorSpec::cosh_shift(complex s)
{
    OperatorSpec out;
    std::ostringstream os;
    os << "cosh_shift(" << s << ")";
    out.description = os.str();
    return out.add(0.5, 0, s).add(0.5, 0, -s);
}

OperatorSpec OperatorSpec::exp_exp_series()
{
    return from_generator(
        [](std::uint64_t l) {
            const double w = (l % 2 == 0 ? 1.0 : -1.0) / std::tgamma(static_cast<double>(l) + 1.0);
            return OperatorTerm{w, 0, static_cast<double>(l + 1)};
        },
        "exp(lambda - e^lambda)");
}

// ---------------------------------------------------------------------------
// Evolution solutions

namespace {

SeriesValue modal_sum(const EvolutionSolution& s, double x, double t, double tol,
                      const std::function<complex(std::uint64_t)>& factor, double extra_degree)
{
    if (!(tol > 0.0)) throw DomainError("evolution: tolerance must be positive");
    const double floor = s.rate_floor(t);
    const double x_eff = x + floor;
    if (!(x_eff >= s.domain_min))
        throw DomainError("evolution: effective decay x + floor(t) = " + std::to_string(x_eff)
                          + " is below domain_min");
    const complex offset = s.time_offset ? s.time_offset(t) : complex(0.0);
    GrowthBound g = s.coeffs.growth();
    g.constant *= std::exp(offset.real());
    g.degree += extra_degree;
    const double q = std::exp(-x_eff);

    detail::CompensatedSum sum;
    for (std::uint64_t n = 1; n <= kMaxTerms; ++n) {
        const complex c = s.coeffs(n);
        if (c != 0.0) {
            const complex e = -s.mode_rate(n) * t + offset - static_cast<double>(n) * x;
            sum.add(c * factor(n) * std::exp(e));
        }
        const double tail = power_geometric_tail(g, q, n);
        if (tail <= tol) return {sum.value(), n, tail};
    }
    throw TruncationError("evolution: tolerance not reached");
}

}  // namespace

SeriesValue EvolutionSolution::eval(double x, double t, double tol) const
{
    return modal_sum(*this, x, t, tol, [](std::uint64_t) { return complex(1.0); }, 0.0);
}

SeriesValue EvolutionSolution::eval_derivative(double x, double t, unsigned jx, unsigned jt,
                                               double tol) const
{
    if (jt > 0 && time_offset)
        throw DomainError("eval_derivative: time derivatives need a zero time offset");
    const auto& rate = mode_rate;
    return modal_sum(
        *this, x, t, tol,
        [&](std::uint64_t n) {
            return std::pow(-rate(n), static_cast<int>(jt))
                   * std::pow(-static_cast<double>(n), static_cast<int>(jx));
        },
        jx + jt * rate_degree);
}

EvolutionSolution evolution_solution(unsigned nu, const CoefficientSequence& c, double domain_min)
{
    if (nu < 1) throw DomainError("evolution_solution: nu must be >= 1");
    const complex omega = std::polar(1.0, pi / nu);
    EvolutionSolution s;
    s.coeffs = c;
    s.mode_rate = [omega](std::uint64_t n) { return omega * static_cast<double>(n); };
    s.rate_floor = [omega](double t) { return omega.real() * t; };
    s.rate_degree = 1.0;
    s.domain_min = domain_min;
    s.description = "d^" + std::to_string(nu) + "_t u + d^" + std::to_string(nu) + "_x u = 0";
    return s;
}

EvolutionSolution schrodinger_solution(unsigned m, std::function<double(double)> potential,
                                       const CoefficientSequence& c, double lower_limit,
                                       double domain_min)
{
    if (m < 1) throw DomainError("schrodinger_solution: m must be >= 1");
    EvolutionSolution s;
    s.coeffs = c;
    s.mode_rate = [m](std::uint64_t n) { return complex(std::pow(-static_cast<double>(n), m)); };
    s.rate_degree = m;
    s.rate_floor = [m](double t) {
        const bool even = m % 2 == 0;
        // Re((-n)^m) t = (+/-) n^m t.
        if (even) {
            if (t >= 0.0) return t;
        } else {
            if (t <= 0.0) return -t;
            if (m == 1) return -t;
        }
        throw DomainError("schrodinger_solution: modal series diverges at t = " + std::to_string(t));
    };
    s.time_offset = [potential, lower_limit](double t) {
        if (t == lower_limit) return complex(0.0);
        const auto r = quad::gauss_kronrod([&](double w) { return complex(potential(w)); },
                                           lower_limit, t, 1e-13);
        if (r.error > 1e-10 * std::max(1.0, std::abs(r.value)))
            throw QuadratureError("schrodinger_solution: potential integral did not converge");
        return r.value;
    };
    s.domain_min = domain_min;
    s.description = "u_t = -d^" + std::to_string(m) + "_x u + V(t) u";
    return s;
}

// ---------------------------------------------------------------------------
// Fourier solutions of F(d/dx) y = x - pi

complex TrigSeries::operator()(complex x) const { return derivative(x, 0); }

complex TrigSeries::derivative(complex x, unsigned order) const
{
    detail::CompensatedSum sum;
    for (std::int64_t n = -M; n <= M; ++n) {
        if (n == 0) continue;
        const complex in(0.0, static_cast<double>(n));
        sum.add(coeff(n) * std::pow(in, static_cast<int>(order)) * std::exp(in * x));
    }
    return sum.value();
}

complex sawtooth_coefficient(std::int64_t n)
{
    return complex(0.0, 1.0 / static_cast<double>(n));
}

TrigSeries fourier_fde_solve(const OperatorSpec& f, std::int64_t M)
{
    return fourier_fde_solve(f, M, sawtooth_coefficient);
}

TrigSeries fourier_fde_solve(const OperatorSpec& f, std::int64_t M,
                             const std::function<complex(std::int64_t)>& rhs_coefficient)
{
    if (M < 1) throw DomainError("fourier_fde_solve: M must be >= 1");
    TrigSeries y;
    y.M = M;
    y.coeffs.assign(static_cast<std::size_t>(2 * M + 1), 0.0);
    std::vector<std::int64_t> bad;
    for (std::int64_t n = -M; n <= M; ++n) {
        if (n == 0) continue;
        const complex lambda(0.0, static_cast<double>(n));
        double scale = 0.0;
        for (const auto& t : f.terms)
            scale += std::abs(t.weight) * std::pow(std::abs(lambda), t.order)
                     * std::exp((lambda * t.shift).real());
        const complex F = f.symbol(lambda);
        if (!std::isfinite(F.real()) || !std::isfinite(F.imag()) || std::abs(F) < 1e-12 * scale) {
            bad.push_back(n);
            continue;
        }
        y.coeffs[static_cast<std::size_t>(n + M)] = rhs_coefficient(n) / F;
    }
    if (!bad.empty()) {
        std::ostringstream os;
        os << "fourier_fde_solve: F(i n) vanishes or overflows for n =";
        for (std::size_t i = 0; i < bad.size() && i < 20; ++i) os << ' ' << bad[i];
        throw AdmissibilityError(os.str(), std::move(bad));
    }
    return y;
}

double fde_residual(const OperatorSpec& f, const TrigSeries& y, std::span<const double> samples)
{
    std::vector<complex> applied(y.coeffs.size(), 0.0);
    for (std::int64_t n = -y.M; n <= y.M; ++n)
        if (n != 0) applied[static_cast<std::size_t>(n + y.M)] = y.coeff(n) * f.mode_factor(n);
    double worst = 0.0;
    for (double x : samples) {
        if (x < 0.1 || x > 2.0 * pi - 0.1)
            throw DomainError("fde_residual: samples must stay 0.1 away from 0 and 2 pi");
        detail::CompensatedSum sum;
        for (std::int64_t n = -y.M; n <= y.M; ++n)
            if (n != 0)
                sum.add(applied[static_cast<std::size_t>(n + y.M)]
                        * std::exp(complex(0.0, static_cast<double>(n) * x)));
        worst = std::max(worst, std::abs(sum.value() - (x - pi)));
    }
    return worst;
}

ClosedFormReport closed_form_compare(const CharPoly& p, std::span<const complex> roots,
                                     std::int64_t M)
{
    const auto& a = p.coeffs();
    const complex a0 = a[0];
    if (a0 == 0.0) throw DomainError("closed_form_compare: a0 must be nonzero");
    const complex a1 = a.size() > 1 ? a[1] : complex(0.0);

    ClosedFormReport rep;
    rep.M = M;
    rep.slope = 1.0 / a0;
    rep.intercept = (-a0 * pi - a1) / (a0 * a0);

    const auto y = fourier_fde_solve(OperatorSpec::from_poly(p), M);

    // Composite Simpson on (0, 2 pi), resolving the highest mode.
    const std::size_t K = std::max<std::size_t>(4096, static_cast<std::size_t>(32 * M)) & ~std::size_t{1};
    const double h = 2.0 * pi / static_cast<double>(K);
    std::vector<double> w(K + 1);
    for (std::size_t j = 0; j <= K; ++j) w[j] = h / 3.0 * (j == 0 || j == K ? 1.0 : (j % 2 ? 4.0 : 2.0));
    std::vector<complex> d(K + 1);
    for (std::size_t j = 0; j <= K; ++j) {
        const double x = h * static_cast<double>(j);
        d[j] = y(x) - (rep.slope * x + rep.intercept);
    }
    const auto inner = [&](const std::vector<complex>& u, const std::vector<complex>& v) {
        complex s = 0.0;
        for (std::size_t j = 0; j <= K; ++j) s += w[j] * std::conj(u[j]) * v[j];
        return s;
    };
    rep.l2_raw = std::sqrt(std::abs(inner(d, d)));

    // Gram-Schmidt on the homogeneous modes, then least-squares coefficients.
    std::vector<std::vector<complex>> basis;
    for (const auto& rho : roots) {
        std::vector<complex> e(K + 1);
        for (std::size_t j = 0; j <= K; ++j) e[j] = std::exp(rho * (h * static_cast<double>(j)));
        basis.push_back(std::move(e));
    }
    std::vector<std::vector<complex>> ortho;
    for (const auto& b : basis) {
        auto v = b;
        for (const auto& q : ortho) {
            const complex c = inner(q, v);
            for (std::size_t j = 0; j <= K; ++j) v[j] -= c * q[j];
        }
        const double nrm = std::sqrt(std::abs(inner(v, v)));
        if (nrm < 1e-12) continue;
        for (auto& z : v) z /= nrm;
        ortho.push_back(std::move(v));
    }
    auto r = d;
    for (const auto& q : ortho) {
        const complex c = inner(q, r);
        for (std::size_t j = 0; j <= K; ++j) r[j] -= c * q[j];
    }
    rep.l2_distance = std::sqrt(std::abs(inner(r, r)));

    // Coefficients of the fitted homogeneous part in the original mode basis:
    // solve the normal equations of d - r = sum C_k e_k.
    const std::size_t nb = basis.size();
    if (nb > 0) {
        std::vector<complex> G(nb * nb), rhs(nb);
        std::vector<complex> fit(K + 1);
        for (std::size_t j = 0; j <= K; ++j) fit[j] = d[j] - r[j];
        for (std::size_t i = 0; i < nb; ++i) {
            rhs[i] = inner(basis[i], fit);
            for (std::size_t k = 0; k < nb; ++k) G[i * nb + k] = inner(basis[i], basis[k]);
        }
        // Gaussian elimination with partial pivoting.
        for (std::size_t col = 0; col < nb; ++col) {
            std::size_t piv = col;
            for (std::size_t i = col + 1; i < nb; ++i)
                if (std::abs(G[i * nb + col]) > std::abs(G[piv * nb + col])) piv = i;
            if (std::abs(G[piv * nb + col]) < 1e-300) continue;
            if (piv != col) {
                for (std::size_t k = 0; k < nb; ++k) std::swap(G[col * nb + k], G[piv * nb + k]);
                std::swap(rhs[col], rhs[piv]);
            }
            for (std::size_t i = col + 1; i < nb; ++i) {
                const complex f = G[i * nb + col] / G[col * nb + col];
                for (std::size_t k = col; k < nb; ++k) G[i * nb + k] -= f * G[col * nb + k];
                rhs[i] -= f * rhs[col];
            }
        }
        rep.homogeneous.assign(nb, 0.0);
        for (std::size_t i = nb; i-- > 0;) {
            complex s = rhs[i];
            for (std::size_t k = i + 1; k < nb; ++k) s -= G[i * nb + k] * rep.homogeneous[k];
            rep.homogeneous[i] = std::abs(G[i * nb + i]) < 1e-300 ? complex(0.0) : s / G[i * nb + i];
        }
    }
    return rep;
}

}  // namespace opcalc
