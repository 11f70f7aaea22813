#include "opcalc/laplace_ops.hpp"

#include "opcalc/errors.hpp"
#include "opcalc/quadrature.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace opcalc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxPath = 1048576.0;   // 2^20

double factorial(unsigned k)
{
    return std::tgamma(static_cast<double>(k) + 1.0);
}

// (k)_n = k (k+1) ... (k+n-1)
double rising(unsigned k, unsigned n)
{
    double r = 1.0;
    for (unsigned j = 0; j < n; ++j) r *= static_cast<double>(k + j);
    return r;
}

// n-th derivative of z^{-k}.
complex power_derivative(complex z, unsigned k, unsigned n)
{
    const double sign = (n % 2) ? -1.0 : 1.0;
    return sign * rising(k, n) * std::pow(z, -static_cast<int>(k + n));
}

double binomial(unsigned n, unsigned j)
{
    double r = 1.0;
    for (unsigned i = 1; i <= j; ++i) r = r * static_cast<double>(n - j + i) / static_cast<double>(i);
    return r;
}

double magnitude(complex z)
{
    const double a = std::abs(z);
    return std::isfinite(a) ? a : kInf;
}

// Largest |integrand| over a small cluster of points at w.
double envelope(const std::function<complex(double)>& f, double w)
{
    double m = 0.0;
    for (int j = 0; j < 5; ++j) m = std::max(m, magnitude(f(w * (1.0 + 0.07 * j))));
    return m;
}

struct PathEnd {
    double end = 0.0;
    double tail = 0.0;
    bool restricted = false;
};

PathEnd choose_path_end(const std::function<complex(double)>& f, double decay,
                        std::optional<double> singularity, double tol)
{
    const double rate = std::clamp(decay, 1e-3, 1.0);
    double prev2 = kInf, prev = kInf;
    double found = 0.0, found_env = 0.0;
    // Accept w_k once the envelope is small and has decreased over two doublings.
    std::vector<std::pair<double, double>> env;
    for (double w = 1.0; w <= kMaxPath; w *= 2.0) env.emplace_back(w, envelope(f, w));
    for (std::size_t k = 2; k < env.size(); ++k) {
        prev2 = env[k - 2].second;
        prev = env[k - 1].second;
        const double cur = env[k].second;
        if (prev2 <= 1e-3 * tol * rate && prev <= prev2 && cur <= prev) {
            found = env[k - 2].first;
            found_env = prev2;
            break;
        }
    }

    if (singularity) {
        const double stop = 0.9 * *singularity;
        if (found > 0.0 && found <= stop) return {found, found_env / rate, false};
        // The neglected part starts at the cut; bound it by the envelope there.
        double worst = 0.0;
        for (int j = 0; j <= 16; ++j) worst = std::max(worst, magnitude(f(stop * (0.9 + j / 160.0))));
        const double tail = worst / rate;
        if (!(tail <= tol))
            throw SingularPathError("integration path reaches a symbol singularity before the "
                                    "integrand has decayed",
                                    *singularity);
        return {stop, tail, true};
    }
    if (found == 0.0)
        throw DivergenceError("inverse-transform integral does not decay along the path");
    return {found, found_env / rate, false};
}

// int_0^end f over pieces split at the breakpoints and at powers of two.
IntegralValue integrate_path(const std::function<complex(double)>& f, double decay,
                             std::vector<double> breaks, std::optional<double> singularity,
                             double tol)
{
    const PathEnd path = choose_path_end(f, decay, singularity, tol);
    std::vector<double> cuts{0.0, path.end};
    for (double w = 0.5; w < path.end; w *= 2.0) cuts.push_back(w);
    for (double b : breaks)
        if (b > 0.0 && b < path.end) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-14; }),
               cuts.end());

    IntegralValue out;
    out.path_end = path.end;
    out.restricted = path.restricted;
    const double piece_tol = 1e-12;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        auto r = quad::gauss_kronrod(f, cuts[i], cuts[i + 1], piece_tol);
        if (!(r.error <= 1e-3 * tol)) {
            try {
                const auto t = quad::tanh_sinh(f, cuts[i], cuts[i + 1], piece_tol);
                if (t.error < r.error) r = t;
            } catch (const QuadratureError&) {
            }
        }
        out.value += r.value;
        out.error += r.error;
    }
    out.error += path.tail;
    if (!(out.error <= tol * std::max(1.0, std::abs(out.value))))
        throw QuadratureError("operator integral error estimate " + std::to_string(out.error)
                              + " exceeds tolerance");
    return out;
}

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

double GrowthCertificate::at(double w) const
{
    return constant * std::pow(std::max(w, 1.0), power) * std::exp(exponent * w);
}

LaplaceSpec LaplaceSpec::parse(const std::string& text)
{
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
    const auto as_k = [&](const std::string& s) {
        std::size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos != s.size() || v < 1) throw UnsupportedError("inverse-Laplace power must be >= 1: " + s);
        return static_cast<unsigned>(v);
    };
    const auto as_real = [&](const std::string& s) {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw UnsupportedError("bad number in Laplace spec: " + s);
        return v;
    };
    try {
        if (parts.size() == 2 && parts[0] == "power") return inverse_power(as_k(parts[1]));
        if (parts.size() == 3 && parts[0] == "pole") return shifted_pole(as_real(parts[1]), as_k(parts[2]));
        if (parts.size() == 3 && parts[0] == "delayed")
            return delayed_power(as_real(parts[1]), as_k(parts[2]));
    } catch (const std::logic_error&) {
        throw UnsupportedError("malformed Laplace spec: " + text);
    }
    throw UnsupportedError("unsupported Laplace spec: " + text);
}

std::string LaplaceSpec::to_string() const
{
    switch (kind) {
    case Kind::inverse_power: return "power:" + std::to_string(k);
    case Kind::shifted_pole: return "pole:" + fmt(a.real()) + ":" + std::to_string(k);
    case Kind::delayed_power: return "delayed:" + fmt(b) + ":" + std::to_string(k);
    }
    return {};
}

InverseLaplaceEntry inverse_laplace(const LaplaceSpec& spec)
{
    const unsigned k = spec.k;
    if (k < 1) throw UnsupportedError("inverse Laplace transform needs a power k >= 1");
    const double norm = 1.0 / factorial(k - 1);
    InverseLaplaceEntry e;
    e.growth = {norm, static_cast<double>(k - 1), 0.0};
    switch (spec.kind) {
    case LaplaceSpec::Kind::inverse_power:
        e.description = "s^-" + std::to_string(k);
        e.phi = [k, norm](double w) { return complex(norm * std::pow(w, k - 1)); };
        e.transform_derivative = [k](complex s, unsigned n) { return power_derivative(s, k, n); };
        break;
    case LaplaceSpec::Kind::shifted_pole: {
        const complex a = spec.a;
        e.description = "(s - " + fmt(a.real()) + ")^-" + std::to_string(k);
        e.phi = [k, a, norm](double w) { return norm * std::pow(w, k - 1) * std::exp(a * w); };
        e.transform_derivative = [k, a](complex s, unsigned n) {
            return power_derivative(s - a, k, n);
        };
        e.growth.exponent = a.real();
        e.abscissa = a.real();
        break;
    }
    case LaplaceSpec::Kind::delayed_power: {
        const double b = spec.b;
        if (!(b >= 0.0)) throw UnsupportedError("delay must be non-negative");
        e.description = "e^(-" + fmt(b) + " s) s^-" + std::to_string(k);
        e.phi = [k, b, norm](double w) {
            return w < b ? complex(0.0) : complex(norm * std::pow(w - b, k - 1));
        };
        // Leibniz rule on e^{-bs} * s^{-k}.
        e.transform_derivative = [k, b](complex s, unsigned n) {
            complex sum = 0.0;
            for (unsigned j = 0; j <= n; ++j)
                sum += binomial(n, j) * std::pow(-b, static_cast<int>(n - j))
                       * power_derivative(s, k, j);
            return sum * std::exp(-b * s);
        };
        if (b > 0.0) e.breakpoints.push_back(b);
        break;
    }
    }
    return e;
}

InverseLaplaceEntry combine(std::span<const InverseLaplaceEntry> entries,
                            std::span<const complex> weights)
{
    if (entries.size() != weights.size() || entries.empty())
        throw DomainError("combine: need one weight per entry");
    std::vector<InverseLaplaceEntry> es(entries.begin(), entries.end());
    std::vector<complex> ws(weights.begin(), weights.end());
    InverseLaplaceEntry out;
    out.growth = {0.0, 0.0, -kInf};
    out.abscissa = -kInf;
    for (std::size_t j = 0; j < es.size(); ++j) {
        if (j) out.description += " + ";
        out.description += "(" + fmt(ws[j].real()) + ")*" + es[j].description;
        out.growth.constant += std::abs(ws[j]) * es[j].growth.constant;
        out.growth.power = std::max(out.growth.power, es[j].growth.power);
        out.growth.exponent = std::max(out.growth.exponent, es[j].growth.exponent);
        out.abscissa = std::max(out.abscissa, es[j].abscissa);
        out.breakpoints.insert(out.breakpoints.end(), es[j].breakpoints.begin(), es[j].breakpoints.end());
    }
    out.phi = [es, ws](double w) {
        complex s = 0.0;
        for (std::size_t j = 0; j < es.size(); ++j) s += ws[j] * es[j].phi(w);
        return s;
    };
    out.transform_derivative = [es, ws](complex z, unsigned n) {
        complex s = 0.0;
        for (std::size_t j = 0; j < es.size(); ++j) s += ws[j] * es[j].transform_derivative(z, n);
        return s;
    };
    return out;
}

SymbolFunction SymbolFunction::from_operator(const OperatorSpec& op)
{
    return {[op](complex l) { return op.symbol(l); }, op.description, std::nullopt, op};
}

SymbolFunction SymbolFunction::from_poly(const CharPoly& p)
{
    auto s = from_operator(OperatorSpec::from_poly(p));
    s.h = [p](complex l) { return p(l); };
    return s;
}

SymbolFunction SymbolFunction::constant(complex c)
{
    OperatorSpec op;
    op.description = fmt(c.real());
    op.add(c, 0);
    return from_operator(op);
}

IntegralValue apply_operator(const SymbolFunction& h, const InverseLaplaceEntry& f, complex x,
                             double tol)
{
    const auto integrand = [&](double w) {
        if (w == 0.0 && f.phi(0.0) == 0.0) return complex(0.0);
        return f.phi(w) * h.reflected(w) * std::exp(-x * w);
    };
    return integrate_path(integrand, x.real(), f.breakpoints, h.reflected_singularity, tol);
}

namespace {

// Zeros of f(-w) on [0, w_max]. A zero is tolerated when numerator(w) / f(-w)
// stays bounded next to it.
void check_path(const SymbolFunction& f, const std::function<complex(double)>* numerator,
                double w_max)
{
    std::vector<double> ws{0.0};
    for (double w = 1e-6; w < w_max / 2048.0; w *= 2.0) ws.push_back(w);
    for (int j = 1; j <= 2048; ++j) ws.push_back(w_max * j / 2048.0);
    std::sort(ws.begin(), ws.end());

    std::vector<double> a(ws.size());
    for (std::size_t j = 0; j < ws.size(); ++j) {
        const complex v = f.reflected(ws[j]);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw SingularPathError("reflected symbol is singular on the integration path", ws[j]);
        a[j] = std::abs(v);
    }

    const auto removable = [&](double w0, bool one_sided) {
        if (!numerator) return false;
        const auto ratio = [&](double d) {
            double m = std::abs((*numerator)(w0 + d) / f.reflected(w0 + d));
            if (!one_sided) m = std::max(m, std::abs((*numerator)(w0 - d) / f.reflected(w0 - d)));
            return m;
        };
        const double far = ratio(1e-3), near = ratio(1e-7);
        return std::isfinite(near) && near <= 100.0 * std::max(far, 1e-300);
    };

    double local = 0.0;
    for (std::size_t j = 1; j < ws.size() && ws[j] <= std::min(1.0, w_max); ++j) local = std::max(local, a[j]);
    if (a[0] <= 1e-12 * std::max(local, 1e-300) && !removable(0.0, true))
        throw SingularPathError("reflected symbol vanishes at w = 0", 0.0);

    for (std::size_t j = 1; j + 1 < ws.size(); ++j) {
        if (!(a[j] <= a[j - 1] && a[j] <= a[j + 1])) continue;
        const auto [wmin, fmin] = boost::math::tools::brent_find_minima(
            [&](double w) { return std::abs(f.reflected(w)); }, ws[j - 1], ws[j + 1], 26);
        const double ref = std::max({a[j - 1], a[j + 1], 1e-300});
        const double at = fmin <= a[j] ? wmin : ws[j];
        // Brent locates the minimum to about 1.5e-8 relative, so a true zero only
        // shows up as |f| ~ 1e-8 |f'| w; neighbours sit at ~ |f'| * grid step.
        if (std::min(fmin, a[j]) <= 1e-3 * ref && !removable(at, false))
            throw SingularPathError("reflected symbol vanishes on the integration path at w = "
                                        + fmt(at),
                                    at);
    }
}

}  // namespace

void require_zero_free(const SymbolFunction& f, double w_max)
{
    check_path(f, nullptr, w_max);
}

void require_integrable_quotient(const SymbolFunction& f, const InverseLaplaceEntry& g, double w_max)
{
    check_path(f, &g.phi, w_max);
}

OperatorSolution::OperatorSolution(SymbolFunction f, InverseLaplaceEntry g)
    : f_(std::move(f)), g_(std::move(g))
{
}

complex OperatorSolution::inverse_transform(double w) const
{
    const complex p = g_.phi(w);
    return p == 0.0 ? p : p / f_.reflected(w);
}

IntegralValue OperatorSolution::evaluate(complex s, double tol) const
{
    return evaluate_derivative(s, 0, tol);
}

complex OperatorSolution::derivative(complex s, unsigned k, double tol) const
{
    return evaluate_derivative(s, k, tol).value;
}

IntegralValue OperatorSolution::evaluate_derivative(complex s, unsigned k, double tol) const
{
    const auto integrand = [&](double w) {
        const complex p = g_.phi(w);
        if (p == 0.0) return complex(0.0);
        return p / f_.reflected(w) * std::pow(-w, static_cast<int>(k)) * std::exp(-s * w);
    };
    // Locate the path first so the zero check covers exactly what is integrated.
    const PathEnd path = choose_path_end(integrand, s.real(), std::nullopt, tol);
    require_integrable_quotient(f_, g_, path.end);
    return integrate_path(integrand, s.real(), g_.breakpoints, std::nullopt, tol);
}

InverseLaplaceEntry OperatorSolution::as_entry() const
{
    InverseLaplaceEntry e;
    e.description = "L^-1[" + g_.description + "] / " + f_.description + "(-w)";
    const OperatorSolution self = *this;
    e.phi = [self](double w) { return self.inverse_transform(w); };
    e.transform_derivative = [self](complex s, unsigned n) { return self.derivative(s, n); };
    // Sampled on [0, 64]: a practical certificate rather than a proof.
    double lo = kInf;
    for (int j = 0; j <= 4096; ++j) lo = std::min(lo, std::abs(f_.reflected(64.0 * j / 4096.0)));
    e.growth = g_.growth;
    e.growth.constant /= lo;
    e.abscissa = g_.abscissa;
    e.breakpoints = g_.breakpoints;
    return e;
}

OperatorSolution solve_operator_eq(const SymbolFunction& f, const InverseLaplaceEntry& g)
{
    require_integrable_quotient(f, g, 64.0);
    return OperatorSolution(f, g);
}

double pointwise_residual(const OperatorSpec& op, const OperatorSolution& y,
                          const std::function<complex(complex)>& g, std::span<const double> samples)
{
    double worst = 0.0;
    for (double s : samples) {
        complex lhs = 0.0;
        for (const auto& t : op.terms) lhs += t.weight * y.derivative(s + t.shift, t.order);
        worst = std::max(worst, std::abs(lhs - g(s)));
    }
    return worst;
}

RoundTripReport invert_round_trip(const SymbolFunction& h, const InverseLaplaceEntry& g,
                                  std::span<const double> samples)
{
    const auto y = solve_operator_eq(h, g);
    const auto ye = y.as_entry();
    RoundTripReport rep;
    for (double s : samples) {
        const complex expect = g.transform(s);
        rep.samples.push_back(s);
        rep.expected.push_back(expect);
        const complex via = apply_operator(h, ye, s).value;
        rep.via_integrals.push_back(via);
        rep.max_integral_error = std::max(rep.max_integral_error, std::abs(via - expect));
        if (h.terms) {
            complex lhs = 0.0;
            for (const auto& t : h.terms->terms) lhs += t.weight * y.derivative(s + t.shift, t.order);
            rep.via_terms.push_back(lhs);
            rep.max_term_error = std::max(rep.max_term_error, std::abs(lhs - expect));
        }
    }
    return rep;
}

EvenOddCheck even_odd_check(const CharPoly& p, const InverseLaplaceEntry& g, double s)
{
    const auto integrand = [&](double w) { return p(w) * g.phi(w) * std::exp(-s * w); };
    EvenOddCheck out;
    out.integral = integrate_path(integrand, s, g.breakpoints, std::nullopt, kOperatorTolerance).value;
    for (std::size_t k = 0; k < p.coeffs().size(); ++k) {
        const double sign = (k % 2) ? -1.0 : 1.0;
        out.derivative_sum += p.coeffs()[k] * sign * g.transform_derivative(s, static_cast<unsigned>(k));
    }
    return out;
}

}  // namespace opcalc
