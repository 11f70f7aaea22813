#include "opcalc/fourier_reduce.hpp"

#include "opcalc/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>

namespace opcalc {

namespace {

using std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
const complex I(0.0, 1.0);

bool is_power_of_two(std::size_t n) { return n && !(n & (n - 1)); }

// FFTW planning is not thread-safe; execution on distinct arrays is.
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

// In-place DFT, sign -1 (forward) or +1 (backward), unnormalized.
void dft(std::vector<complex>& v, int sign)
{
    const int n = static_cast<int>(v.size());
    auto* data = reinterpret_cast<fftw_complex*>(v.data());
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_1d(n, data, data, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
}

double alt(std::size_t j) { return (j % 2) ? -1.0 : 1.0; }

// Transform of zero-padded space samples: values at gamma = (k - M/2) pi / (R L),
// M = R N.
std::vector<complex> padded_transform(const SampledFunction& g, std::size_t R)
{
    const std::size_t N = g.size(), M = N * R;
    const double h = g.spacing();
    std::vector<complex> v(M, 0.0);
    const std::size_t offset = (R - 1) * N / 2;
    for (std::size_t j = 0; j < N; ++j) v[j + offset] = g.values[j] * alt(j + offset);
    dft(v, -1);
    for (std::size_t k = 0; k < M; ++k) v[k] *= h * alt(k);
    return v;
}

// k-th gamma-derivative of g_hat at an arbitrary point, by direct summation.
complex ghat_derivative(const SampledFunction& g, complex gamma, unsigned k)
{
    const double h = g.spacing();
    complex s = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double x = g.coordinate(j);
        s += std::pow(-I * x, static_cast<int>(k)) * g.values[j] * std::exp(-I * gamma * x);
    }
    return h * s;
}

// Scale against which the k-th moment is judged zero.
double moment_scale(const SampledFunction& g, unsigned k)
{
    double s = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j)
        s += std::pow(std::abs(g.coordinate(j)), static_cast<int>(k)) * std::abs(g.values[j]);
    return g.spacing() * s;
}

bool moment_vanishes(const SampledFunction& g, complex z, unsigned k)
{
    return std::abs(ghat_derivative(g, z, k)) <= 1e-8 * std::max(moment_scale(g, k), 1e-300);
}

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

bool is_real_root(complex z, double scale)
{
    return std::abs(z.imag()) <= 1e-10 * (1.0 + std::abs(z.real()) + scale);
}

// Phi(t) = poly(t) + sum alpha log(t - z) + beta / (t - z_d), a primitive of -q/p.
struct Phase {
    std::array<complex, 4> poly{};   // coefficients of t, t^2, t^3 in slots 1..3
    std::vector<std::pair<complex, complex>> logs;
    complex pole_coef = 0.0, pole_at = 0.0;

    complex operator()(double t) const
    {
        complex v = t * (poly[1] + t * (poly[2] + t * poly[3]));
        for (const auto& [alpha, z] : logs)
            if (alpha != 0.0) v += alpha * std::log(complex(t) - z);
        if (pole_coef != 0.0) v += pole_coef / (complex(t) - pole_at);
        return v;
    }
};

struct RealZero {
    enum class Kind { source, sink, neutral };
    double z = 0.0;
    unsigned order = 1;
    complex rho = 0.0;
    Kind kind = Kind::neutral;
};

double quad_scale(const ComplexQuadratic& p, double gmax)
{
    return std::abs(p.c[0]) + std::abs(p.c[1]) * gmax + std::abs(p.c[2]) * gmax * gmax;
}

Phase make_phase(const ComplexQuadratic& p, const ComplexQuadratic& q, const std::vector<RealZero>& real_zeros,
                 double gmax)
{
    Phase ph;
    const auto& d = q.c;
    const double qs = std::max(quad_scale(q, gmax), 1e-300);
    // Snap roots that were classified as real to the exact real value.
    auto snap = [&](complex z) {
        for (const auto& rz : real_zeros)
            if (std::abs(z - rz.z) <= 1e-7 * (1.0 + std::abs(rz.z))) return complex(rz.z, 0.0);
        return z;
    };
    auto neutral_at = [&](complex z) {
        for (const auto& rz : real_zeros)
            if (rz.kind == RealZero::Kind::neutral && std::abs(z - rz.z) <= 1e-7 * (1.0 + std::abs(rz.z)))
                return true;
        return false;
    };

    switch (p.degree()) {
    case 0: {
        const complex c0 = p.c[0];
        ph.poly[1] = -d[0] / c0;
        ph.poly[2] = -d[1] / (2.0 * c0);
        ph.poly[3] = -d[2] / (3.0 * c0);
        break;
    }
    case 1: {
        const complex c1 = p.c[1];
        const complex z = snap(-p.c[0] / c1);
        // q = (t - z)(d2 t + d2 z + d1) + q(z)
        ph.poly[1] = -(d[2] * z + d[1]) / c1;
        ph.poly[2] = -d[2] / (2.0 * c1);
        complex alpha = -q(z) / c1;
        if (neutral_at(z) || std::abs(q(z)) <= 1e-13 * qs) alpha = 0.0;
        ph.logs.emplace_back(alpha, z);
        break;
    }
    default: {
        const complex c2 = p.c[2];
        const auto r = p.roots();
        // remainder of q after removing (d2/c2) p: e1 t + e0
        const complex e1 = d[1] - d[2] / c2 * p.c[1];
        const complex e0 = d[0] - d[2] / c2 * p.c[0];
        ph.poly[1] = -d[2] / c2;
        const complex z1 = snap(r[0]), z2 = snap(r[1]);
        if (std::abs(z1 - z2) <= 1e-7 * (1.0 + std::abs(z1))) {
            const complex z = 0.5 * (z1 + z2);
            ph.logs.emplace_back(-e1 / c2, z);
            complex beta = (e1 * z + e0) / c2;
            if (std::abs(e1 * z + e0) <= 1e-13 * qs) beta = 0.0;
            ph.pole_coef = beta;
            ph.pole_at = z;
        } else {
            complex A = -(e1 * z1 + e0) / (c2 * (z1 - z2));
            complex B = -(e1 * z2 + e0) / (c2 * (z2 - z1));
            if (neutral_at(z1)) A = 0.0;
            if (neutral_at(z2)) B = 0.0;
            ph.logs.emplace_back(A, z1);
            ph.logs.emplace_back(B, z2);
        }
    }
    }
    return ph;
}

struct Engine {
    const ReducedEquation& eq;
    Phase phase;
    std::vector<complex> ghat;   // fine grid
    double delta = 0.0;
    std::size_t M = 0;
    std::vector<double> avoid;   // source and sink locations

    double node(std::size_t i) const
    {
        return (static_cast<double>(i) - static_cast<double>(M / 2)) * delta;
    }

    // 10-point Lagrange interpolation of the fine-grid transform.
    complex ghat_at(double t) const
    {
        constexpr int W = 10;
        const double u = t / delta + static_cast<double>(M / 2);
        long i0 = static_cast<long>(std::floor(u)) - W / 2 + 1;
        i0 = std::clamp(i0, 0L, static_cast<long>(M) - W);
        complex s = 0.0;
        for (int a = 0; a < W; ++a) {
            double w = 1.0;
            const double ua = static_cast<double>(i0 + a);
            if (u == ua) return ghat[static_cast<std::size_t>(i0 + a)];
            for (int b = 0; b < W; ++b)
                if (b != a) w *= (u - static_cast<double>(i0 + b)) / (ua - static_cast<double>(i0 + b));
            s += w * ghat[static_cast<std::size_t>(i0 + a)];
        }
        return s;
    }

    double distance_to_avoid(double a, double b) const
    {
        const double lo = std::min(a, b), hi = std::max(a, b);
        double d = kInf;
        for (double z : avoid) {
            if (z >= lo && z <= hi) return 0.0;
            d = std::min(d, std::min(std::abs(z - lo), std::abs(z - hi)));
        }
        return d;
    }

    // Propagates f from a to b: e^{Phi(b)-Phi(a)} f(a) + int_a^b e^{Phi(b)-Phi(t)} ghat(t)/p(t) dt.
    complex step(complex fa, double a, double b, int depth = 0) const
    {
        if (depth < 60 && std::abs(b - a) > distance_to_avoid(a, b)) {
            const double m = 0.5 * (a + b);
            return step(step(fa, a, m, depth + 1), m, b, depth + 1);
        }
        using G = boost::math::quadrature::gauss<double, 8>;
        const complex pb = phase(b);
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        complex integral = 0.0;
        const auto& xs = G::abscissa();
        const auto& ws = G::weights();
        for (std::size_t k = 0; k < xs.size(); ++k) {
            for (int sgn : {-1, 1}) {
                if (xs[k] == 0.0 && sgn < 0) continue;
                const double t = mid + sgn * xs[k] * half;
                integral += ws[k] * std::exp(pb - phase(t)) * ghat_at(t) / eq.p(t);
            }
        }
        return std::exp(pb - phase(a)) * fa + half * integral;
    }
};

// Taylor coefficients of the regular solution at a zero of p.
std::vector<complex> regular_taylor(const ReducedEquation& eq, const RealZero& rz, unsigned terms)
{
    const complex z = rz.z;
    // Shift p, q to u = gamma - z.
    const complex p1 = eq.p.derivative(z), p2 = eq.p.c[2];
    const complex q0 = eq.q(z), q1 = eq.q.derivative(z), q2 = eq.q.c[2];
    std::vector<complex> g(terms + 2);
    double fact = 1.0;
    for (unsigned k = 0; k < terms + 2; ++k) {
        if (k) fact *= k;
        g[k] = ghat_derivative(eq.g, z, k) / fact;
    }
    std::vector<complex> f(terms, 0.0);
    if (rz.order == 1) {
        // (p1 k + q0) f_k + (p2 (k-1) + q1) f_{k-1} + q2 f_{k-2} = g_k
        for (unsigned k = 0; k < terms; ++k) {
            complex rhs = g[k];
            if (k >= 1) rhs -= (p2 * static_cast<double>(k - 1) + q1) * f[k - 1];
            if (k >= 2) rhs -= q2 * f[k - 2];
            f[k] = rhs / (p1 * static_cast<double>(k) + q0);
        }
    } else {
        // p = p2 u^2, q = q1 u + q2 u^2: (p2 m + q1) f_m = g_{m+1} - q2 f_{m-1}
        for (unsigned m = 0; m < terms; ++m) {
            complex rhs = g[m + 1];
            if (m >= 1) rhs -= q2 * f[m - 1];
            f[m] = rhs / (p2 * static_cast<double>(m) + q1);
        }
    }
    return f;
}

complex eval_taylor(const std::vector<complex>& f, double u)
{
    complex s = 0.0;
    for (auto it = f.rbegin(); it != f.rend(); ++it) s = s * u + *it;
    return s;
}

// Value of every regular solution at a sink.
complex sink_value(const ReducedEquation& eq, const RealZero& rz)
{
    const complex z = rz.z;
    if (rz.order == 1) return ghat_derivative(eq.g, z, 0) / eq.q(z);
    return ghat_derivative(eq.g, z, 1) / eq.q.derivative(z);
}

std::vector<RealZero> classify_zeros(const ReducedEquation& eq, double gmin, double gmax)
{
    std::vector<RealZero> out;
    if (eq.p.degree() == 0) return out;
    const double gabs = std::max(std::abs(gmin), std::abs(gmax));
    const double qs = std::max(quad_scale(eq.q, gabs), 1e-300);
    auto roots = eq.p.roots();
    std::vector<std::pair<double, unsigned>> real;
    for (auto r : roots)
        if (is_real_root(r, 0.0) && r.real() > gmin && r.real() < gmax) real.emplace_back(r.real(), 1u);
    if (real.size() == 2 && std::abs(real[0].first - real[1].first) <= 1e-7 * (1.0 + std::abs(real[0].first)))
        real = {{0.5 * (real[0].first + real[1].first), 2u}};
    for (auto [z, order] : real) {
        RealZero rz;
        rz.z = z;
        rz.order = order;
        const bool q_zero = std::abs(eq.q(z)) <= 1e-12 * qs;
        if (order == 1) {
            if (q_zero) {
                if (!moment_vanishes(eq.g, z, 0))
                    throw SingularReductionError("p and q vanish together at gamma = " + fmt(z)
                                                 + " but g_hat does not: no L2 solution");
                rz.kind = RealZero::Kind::neutral;
                out.push_back(rz);
                continue;
            }
            rz.rho = -eq.q(z) / eq.p.derivative(z);
        } else {
            if (!q_zero)
                throw SingularReductionError("double zero of p at gamma = " + fmt(z)
                                             + " with q != 0: essential singularity");
            if (!moment_vanishes(eq.g, z, 0))
                throw SingularReductionError("g_hat must vanish at the double zero gamma = " + fmt(z));
            const complex q1 = eq.q.derivative(z);
            if (std::abs(q1) <= 1e-12 * qs) {
                if (!moment_vanishes(eq.g, z, 1))
                    throw SingularReductionError("g_hat' must vanish at the double zero gamma = " + fmt(z));
                rz.kind = RealZero::Kind::neutral;
                out.push_back(rz);
                continue;
            }
            rz.rho = -q1 / eq.p.c[2];
        }
        if (rz.rho.real() < -1e-12)
            rz.kind = RealZero::Kind::source;
        else if (rz.rho.real() > 1e-12)
            rz.kind = RealZero::Kind::sink;
        else
            throw SingularReductionError("zero of p at gamma = " + fmt(z)
                                         + " has an oscillatory, non-integrable local solution");
        out.push_back(rz);
    }
    std::sort(out.begin(), out.end(), [](const RealZero& a, const RealZero& b) { return a.z < b.z; });
    return out;
}

SampledFunction frequency_like(const SampledFunction& g)
{
    SampledFunction out;
    out.half_width = g.half_width;
    out.domain = SampledFunction::Domain::frequency;
    out.values.assign(g.size(), 0.0);
    return out;
}

SampledFunction solve_algebraic(const ReducedEquation& eq)
{
    const auto& gh = eq.g_hat;
    SampledFunction out = frequency_like(gh);
    const std::size_t N = gh.size();
    const double dg = gh.spacing();
    const double gmax = gh.coordinate(N - 1), qs = quad_scale(eq.q, std::abs(gh.coordinate(0)));

    std::size_t small = 0;
    for (std::size_t k = 0; k < N; ++k)
        if (std::abs(eq.q(gh.coordinate(k))) < 1e-12 * qs) ++small;
    if (eq.q.is_zero() || small * 10 > N)
        throw SingularReductionError("q vanishes on more than 10% of the grid: ill-posed");

    // Real zeros of q inside the grid need vanishing moments of g.
    std::vector<std::pair<double, unsigned>> zeros;
    if (eq.q.degree() > 0) {
        auto r = eq.q.roots();
        std::vector<double> real;
        for (auto z : r)
            if (is_real_root(z, 0.0) && z.real() >= gh.coordinate(0) - dg && z.real() <= gmax + dg)
                real.push_back(z.real());
        if (real.size() == 2 && std::abs(real[0] - real[1]) <= 1e-7 * (1.0 + std::abs(real[0])))
            zeros.emplace_back(0.5 * (real[0] + real[1]), 2u);
        else
            for (double z : real) zeros.emplace_back(z, 1u);
    }
    for (auto [z, m] : zeros)
        for (unsigned j = 0; j < m; ++j)
            if (!moment_vanishes(eq.g, z, j))
                throw SingularReductionError("q vanishes at gamma = " + fmt(z) + " but moment "
                                             + std::to_string(j) + " of g does not: f_hat has a pole");

    for (std::size_t k = 0; k < N; ++k) {
        const double t = gh.coordinate(k);
        bool done = false;
        for (auto [z, m] : zeros) {
            if (std::abs(t - z) <= 1e-8 * dg) {
                // Limit g_hat / q by l'Hopital.
                const complex qm = m == 1 ? eq.q.derivative(z) : 2.0 * eq.q.c[2];
                out.values[k] = ghat_derivative(eq.g, z, m) / qm;
                done = true;
            }
        }
        if (!done) out.values[k] = gh.values[k] / eq.q(t);
    }
    return out;
}

struct SweepResult {
    std::vector<complex> value;
    std::vector<double> log_amp;
    std::vector<bool> set;
};

}  // namespace

double SampledFunction::spacing() const
{
    const double n = static_cast<double>(values.size());
    return domain == Domain::space ? 2.0 * half_width / n : pi / half_width;
}

double SampledFunction::coordinate(std::size_t j) const
{
    const double jj = static_cast<double>(j);
    if (domain == Domain::space) return -half_width + jj * spacing();
    return (jj - static_cast<double>(values.size() / 2)) * spacing();
}

void SampledFunction::validate() const
{
    if (!(half_width > 0.0) || !std::isfinite(half_width))
        throw DomainError("sampled function: half-width must be positive");
    if (values.size() < 8 || !is_power_of_two(values.size()))
        throw DomainError("sampled function: N must be a power of two >= 8, got "
                          + std::to_string(values.size()));
}

SampledFunction SampledFunction::sample(double L, std::size_t N,
                                        const std::function<complex(double)>& f)
{
    SampledFunction u;
    u.half_width = L;
    u.values.resize(N);
    u.validate();
    for (std::size_t j = 0; j < N; ++j) u.values[j] = f(u.coordinate(j));
    return u;
}

SampledFunction forward_transform(const SampledFunction& u)
{
    u.validate();
    if (u.domain != SampledFunction::Domain::space)
        throw DomainError("forward_transform expects space-domain samples");
    SampledFunction out = frequency_like(u);
    out.values = padded_transform(u, 1);
    return out;
}

SampledFunction inverse_transform(const SampledFunction& u_hat)
{
    u_hat.validate();
    if (u_hat.domain != SampledFunction::Domain::frequency)
        throw DomainError("inverse_transform expects frequency-domain samples");
    const std::size_t N = u_hat.size();
    std::vector<complex> v(N);
    for (std::size_t k = 0; k < N; ++k) v[k] = u_hat.values[k] * alt(k);
    dft(v, +1);
    SampledFunction out;
    out.half_width = u_hat.half_width;
    out.values.resize(N);
    for (std::size_t j = 0; j < N; ++j) out.values[j] = v[j] * alt(j) / (2.0 * u_hat.half_width);
    return out;
}

SampledFunction spectral_derivative(const SampledFunction& u)
{
    auto uh = forward_transform(u);
    for (std::size_t k = 0; k < uh.size(); ++k) uh.values[k] *= I * uh.coordinate(k);
    // The Nyquist mode has no symmetric partner; drop it.
    uh.values[0] = 0.0;
    return inverse_transform(uh);
}

SampledFunction frequency_derivative(const SampledFunction& u_hat)
{
    auto u = inverse_transform(u_hat);
    for (std::size_t j = 0; j < u.size(); ++j) u.values[j] *= -I * u.coordinate(j);
    return forward_transform(u);
}

void write_csv(std::ostream& os, const SampledFunction& u)
{
    os << (u.domain == SampledFunction::Domain::space ? "x,re,im\n" : "gamma,re,im\n");
    for (std::size_t j = 0; j < u.size(); ++j)
        os << fmt(u.coordinate(j)) << ',' << fmt(u.values[j].real()) << ',' << fmt(u.values[j].imag())
           << '\n';
}

std::size_t ComplexQuadratic::degree() const
{
    if (c[2] != 0.0) return 2;
    if (c[1] != 0.0) return 1;
    return 0;
}

std::vector<complex> ComplexQuadratic::roots() const
{
    switch (degree()) {
    case 0: return {};
    case 1: return {-c[0] / c[1]};
    default: {
        const complex disc = std::sqrt(c[1] * c[1] - 4.0 * c[2] * c[0]);
        // Avoid cancellation: pick the sign that adds magnitudes.
        const complex s = (std::real(std::conj(c[1]) * disc) >= 0.0) ? disc : -disc;
        const complex qq = -0.5 * (c[1] + s);
        if (qq == 0.0) return {0.0, 0.0};
        return {qq / c[2], c[0] / qq};
    }
    }
}

ReducedEquation reduce(const LinearCoeffODE& ode)
{
    ode.g.validate();
    if (ode.g.domain != SampledFunction::Domain::space)
        throw DomainError("reduce: g must be given in space");
    if (ode.a1 == 0 && ode.a2 == 0 && ode.a3 == 0 && ode.b1 == 0 && ode.b2 == 0)
        throw DomainError("reduce: no derivative or x-dependent term; the equation is algebraic");

    // Decay proxy: the outer 5% of the grid must be negligible.
    const std::size_t N = ode.g.size();
    double peak = 0.0, edge = 0.0;
    const std::size_t band = std::max<std::size_t>(1, N / 20);
    for (std::size_t j = 0; j < N; ++j) {
        const double a = std::abs(ode.g.values[j]);
        if (!std::isfinite(a)) throw DomainError("reduce: g has non-finite samples");
        peak = std::max(peak, a);
        if (j < band || j >= N - band) edge = std::max(edge, a);
    }
    if (edge > 1e-8 * peak)
        throw TruncationError("reduce: g does not decay inside [-L, L] (edge/peak = "
                              + fmt(edge / peak) + "); increase L");

    ReducedEquation eq;
    eq.p.c = {I * ode.a3, complex(-ode.a2), -I * ode.a1};
    eq.q.c = {complex(ode.b3 - ode.a2), I * ode.b2 - 2.0 * I * ode.a1, complex(-ode.b1)};
    eq.g = ode.g;
    eq.g_hat = forward_transform(ode.g);
    return eq;
}

SampledFunction solve_reduced(const ReducedEquation& eq, ReducedStats* stats)
{
    const auto& gh = eq.g_hat;
    gh.validate();
    ReducedStats local;
    ReducedStats& st = stats ? *stats : local;
    st.refinement = 1;

    double gpeak = 0.0;
    for (auto v : gh.values) gpeak = std::max(gpeak, std::abs(v));
    if (gpeak == 0.0) return frequency_like(gh);

    if (eq.p.is_zero()) return solve_algebraic(eq);

    const std::size_t N = gh.size();
    const double dg = gh.spacing();
    const double gmin = gh.coordinate(0), gmax = gh.coordinate(N - 1);
    const double ps = quad_scale(eq.p, std::abs(gmin));
    std::size_t small = 0;
    for (std::size_t k = 0; k < N; ++k)
        if (std::abs(eq.p(gh.coordinate(k))) < 1e-12 * ps) ++small;
    if (small * 10 > N) throw SingularReductionError("p vanishes on more than 10% of the grid: ill-posed");

    const auto zeros = classify_zeros(eq, gmin, gmax);

    // Refinement: resolve the phase of e^{Phi} where g_hat is not negligible.
    std::size_t klo = N, khi = 0;
    for (std::size_t k = 0; k < N; ++k)
        if (std::abs(gh.values[k]) > 1e-14 * gpeak) {
            klo = std::min(klo, k);
            khi = k;
        }
    double rmax = 0.0;
    for (std::size_t k = (klo > 2 ? klo - 2 : 0); k <= std::min(N - 1, khi + 2); ++k) {
        const double t = gh.coordinate(k);
        bool near = false;
        for (const auto& z : zeros) near |= std::abs(t - z.z) < 2.0 * dg;
        if (near) continue;
        rmax = std::max(rmax, std::abs(eq.q(t) / eq.p(t)));
    }
    std::size_t R = 4;
    while (R < 1024 && rmax * dg / static_cast<double>(R) > 1.0) R *= 2;
    if (rmax * dg / static_cast<double>(R) > 1.0)
        st.warnings.push_back("frequency grid refinement capped at 1024");
    st.refinement = R;

    Engine eng{eq, make_phase(eq.p, eq.q, zeros, std::max(std::abs(gmin), gmax)), padded_transform(eq.g, R),
               dg / static_cast<double>(R), N * R, {}};
    for (const auto& z : zeros)
        if (z.kind != RealZero::Kind::neutral) eng.avoid.push_back(z.z);

    const std::size_t M = eng.M;
    const double delta = eng.delta;
    std::vector<complex> fhat(M, 0.0);

    // Real part of Phi on the nodes, for amplification estimates.
    std::vector<double> rephi(M);
    for (std::size_t i = 0; i < M; ++i) {
        const double v = eng.phase(eng.node(i)).real();
        rephi[i] = std::isfinite(v) ? v : (v > 0 ? kInf : -kInf);
    }

    // Segments between sources and sinks.
    struct Boundary {
        enum class Kind { end, source, sink } kind;
        std::size_t zero = 0;
    };
    std::vector<const RealZero*> splits;
    for (const auto& z : zeros)
        if (z.kind != RealZero::Kind::neutral) splits.push_back(&z);

    std::vector<std::size_t> fixed(M, 0);   // 1 once a node holds a final value
    for (std::size_t seg = 0; seg <= splits.size(); ++seg) {
        const RealZero* left = seg == 0 ? nullptr : splits[seg - 1];
        const RealZero* right = seg == splits.size() ? nullptr : splits[seg];

        // Node index range [lo, hi] strictly between the boundaries (ends inclusive).
        std::size_t lo = 0, hi = M - 1;
        if (left) lo = static_cast<std::size_t>(std::floor(left->z / delta + static_cast<double>(M / 2))) + 1;
        if (right) {
            const double u = right->z / delta + static_cast<double>(M / 2);
            hi = static_cast<std::size_t>(std::ceil(u)) - 1;
        }
        // Nodes sitting on a zero.
        auto on_zero = [&](const RealZero* z, std::size_t i) {
            return z && std::abs(eng.node(i) - z->z) <= 1e-9 * delta;
        };
        if (left && lo > 0 && on_zero(left, lo - 1)) {
            const auto i = lo - 1;
            if (left->kind == RealZero::Kind::sink) fhat[i] = sink_value(eq, *left);
            else fhat[i] = regular_taylor(eq, *left, 1)[0];
            fixed[i] = 1;
        }
        if (right && hi + 1 < M && on_zero(right, hi + 1)) {
            const auto i = hi + 1;
            if (right->kind == RealZero::Kind::sink) fhat[i] = sink_value(eq, *right);
            else fhat[i] = regular_taylor(eq, *right, 1)[0];
            fixed[i] = 1;
        }
        if (lo > hi) continue;

        const bool left_anchor = !left || left->kind == RealZero::Kind::source;
        const bool right_anchor = !right || right->kind == RealZero::Kind::source;
        if (!left_anchor && !right_anchor)
            throw SingularReductionError("two sinks at gamma = " + fmt(left->z) + " and " + fmt(right->z)
                                         + " bound a segment: the bounded solution is not unique");

        // Taylor start regions next to sources.
        auto taylor_region = [&](const RealZero* z, bool at_left) {
            std::size_t first = at_left ? lo : hi;   // nodes within 0.5 delta plus one more
            std::vector<std::size_t> idx;
            for (std::size_t i = first;; at_left ? ++i : --i) {
                if (i < lo || i > hi) break;
                idx.push_back(i);
                if (std::abs(eng.node(i) - z->z) >= 0.5 * delta) break;
            }
            return idx;
        };

        SweepResult fwd{std::vector<complex>(hi - lo + 1), std::vector<double>(hi - lo + 1, kInf),
                        std::vector<bool>(hi - lo + 1, false)};
        SweepResult bwd = fwd;
        std::size_t fwd_start = lo, bwd_start = hi;
        std::vector<std::size_t> left_taylor, right_taylor;
        if (left && left->kind == RealZero::Kind::source) {
            left_taylor = taylor_region(left, true);
            const auto coeffs = regular_taylor(eq, *left, 24);
            for (auto i : left_taylor) {
                fhat[i] = eval_taylor(coeffs, eng.node(i) - left->z);
                fixed[i] = 1;
            }
            fwd_start = left_taylor.back();
        }
        if (right && right->kind == RealZero::Kind::source) {
            right_taylor = taylor_region(right, false);
            const auto coeffs = regular_taylor(eq, *right, 24);
            for (auto i : right_taylor) {
                fhat[i] = eval_taylor(coeffs, eng.node(i) - right->z);
                fixed[i] = 1;
            }
            bwd_start = right_taylor.back();
        }
        const std::size_t fwd_stop = right_taylor.empty() ? hi : right_taylor.back();
        const std::size_t bwd_stop = left_taylor.empty() ? lo : left_taylor.back();

        if (left_anchor && fwd_start <= fwd_stop) {
            complex v = left ? fhat[fwd_start] : complex(0.0);
            double run_min = rephi[fwd_start];
            fwd.value[fwd_start - lo] = v;
            fwd.log_amp[fwd_start - lo] = 0.0;
            fwd.set[fwd_start - lo] = true;
            for (std::size_t i = fwd_start + 1; i <= fwd_stop; ++i) {
                v = eng.step(v, eng.node(i - 1), eng.node(i));
                run_min = std::min(run_min, rephi[i]);
                fwd.value[i - lo] = v;
                fwd.log_amp[i - lo] = rephi[i] - run_min;
                fwd.set[i - lo] = true;
            }
        }
        if (right_anchor && bwd_start >= bwd_stop) {
            complex v = right ? fhat[bwd_start] : complex(0.0);
            double run_min = rephi[bwd_start];
            bwd.value[bwd_start - lo] = v;
            bwd.log_amp[bwd_start - lo] = 0.0;
            bwd.set[bwd_start - lo] = true;
            for (std::size_t i = bwd_start; i-- > bwd_stop;) {
                v = eng.step(v, eng.node(i + 1), eng.node(i));
                run_min = std::min(run_min, rephi[i]);
                bwd.value[i - lo] = v;
                bwd.log_amp[i - lo] = rephi[i] - run_min;
                bwd.set[i - lo] = true;
            }
        }

        for (std::size_t i = lo; i <= hi; ++i) {
            if (fixed[i]) continue;
            const std::size_t j = i - lo;
            const bool okf = fwd.set[j] && std::isfinite(std::abs(fwd.value[j])) && std::isfinite(fwd.log_amp[j]);
            const bool okb = bwd.set[j] && std::isfinite(std::abs(bwd.value[j])) && std::isfinite(bwd.log_amp[j]);
            if (!okf && !okb)
                throw SingularReductionError("no stable anchor reaches gamma = " + fmt(eng.node(i)));
            if (okf && okb) {
                const double m = std::min(fwd.log_amp[j], bwd.log_amp[j]);
                if (m > 36.0)
                    throw SingularReductionError("every sweep is amplified beyond 1e15 near gamma = "
                                                 + fmt(eng.node(i)));
                const double wf = std::exp(m - fwd.log_amp[j]), wb = std::exp(m - bwd.log_amp[j]);
                fhat[i] = (wf * fwd.value[j] + wb * bwd.value[j]) / (wf + wb);
            } else {
                const double la = okf ? fwd.log_amp[j] : bwd.log_amp[j];
                if (la > 36.0)
                    throw SingularReductionError("the only sweep is amplified beyond 1e15 near gamma = "
                                                 + fmt(eng.node(i)));
                fhat[i] = okf ? fwd.value[j] : bwd.value[j];
            }
        }
    }

    SampledFunction out = frequency_like(gh);
    for (std::size_t k = 0; k < N; ++k) out.values[k] = fhat[k * R];
    return out;
}

std::pair<double, double> fd_residual(const LinearCoeffODE& ode, const SampledFunction& f)
{
    const std::size_t N = f.size();
    if (N != ode.g.size() || f.half_width != ode.g.half_width)
        throw DomainError("fd_residual: f and g grids differ");
    const double h = f.spacing();
    double worst = 0.0, sum = 0.0;
    const auto& v = f.values;
    for (std::size_t j = 2; j + 2 < N; ++j) {
        const double x = f.coordinate(j);
        const complex d1 = (-v[j + 2] + 8.0 * v[j + 1] - 8.0 * v[j - 1] + v[j - 2]) / (12.0 * h);
        const complex d2 =
            (-v[j + 2] + 16.0 * v[j + 1] - 30.0 * v[j] + 16.0 * v[j - 1] - v[j - 2]) / (12.0 * h * h);
        const complex r = (ode.a1 * x + ode.b1) * d2 + (ode.a2 * x + ode.b2) * d1
                          + (ode.a3 * x + ode.b3) * v[j] - ode.g.values[j];
        worst = std::max(worst, std::abs(r));
        sum += std::norm(r);
    }
    return {worst, std::sqrt(h * sum)};
}

LinearCoeffSolution solve_linear_coeff(const LinearCoeffODE& ode)
{
    const auto eq = reduce(ode);
    ReducedStats stats;
    LinearCoeffSolution out;
    out.f_hat = solve_reduced(eq, &stats);
    out.f = inverse_transform(out.f_hat);
    out.refinement = stats.refinement;
    out.warnings = stats.warnings;
    std::tie(out.residual_max, out.residual_l2) = fd_residual(ode, out.f);
    return out;
}

}  // namespace opcalc
