#include "opcalc/arith.hpp"

#include "opcalc/errors.hpp"

#include <cmath>
#include <limits>
#include <mutex>
#include <unordered_map>

namespace opcalc {

namespace {

void require_positive(std::uint64_t n, const char* op)
{
    if (n == 0) throw DomainError(std::string(op) + ": argument must be a positive integer");
}

}  // namespace

Factorization factorize(std::uint64_t n)
{
    require_positive(n, "factorize");
    Factorization f;
    f.n = n;
    std::uint64_t rest = n;
    for (std::uint64_t p = 2; p <= rest / p; p += (p == 2 ? 1 : 2)) {
        if (rest % p != 0) continue;
        unsigned e = 0;
        while (rest % p == 0) {
            rest /= p;
            ++e;
        }
        f.factors.emplace_back(p, e);
    }
    if (rest > 1) f.factors.emplace_back(rest, 1u);
    return f;
}

int mobius(std::uint64_t n)
{
    require_positive(n, "mobius");
    int sign = 1;
    for (const auto& [p, e] : factorize(n).factors) {
        if (e > 1) return 0;
        sign = -sign;
    }
    return sign;
}

std::vector<std::uint64_t> divisors(std::uint64_t n)
{
    require_positive(n, "divisors");
    std::vector<std::uint64_t> small, large;
    for (std::uint64_t d = 1; d <= n / d; ++d) {
        if (n % d != 0) continue;
        small.push_back(d);
        if (d != n / d) large.push_back(n / d);
    }
    small.insert(small.end(), large.rbegin(), large.rend());
    return small;
}

std::uint64_t totient(std::uint64_t n)
{
    std::uint64_t result = n;
    for (const auto& [p, e] : factorize(n).factors) result = result / p * (p - 1);
    return result;
}

double GrowthBound::at(double n) const { return constant * std::pow(n, degree); }

GrowthBound divisor_sum_bound(const GrowthBound& b)
{
    return {2.0 * b.constant, std::max(b.degree, 0.0) + 0.5};
}

CoefficientSequence::CoefficientSequence(Fn fn, std::string description, GrowthBound growth)
    : fn_(std::move(fn)), description_(std::move(description)), growth_(growth)
{
}

complex CoefficientSequence::operator()(std::uint64_t n) const
{
    require_positive(n, "CoefficientSequence");
    return fn_(n);
}

CoefficientSequence CoefficientSequence::memoized() const
{
    struct Cache {
        std::mutex mutex;
        std::unordered_map<std::uint64_t, complex> values;
    };
    auto cache = std::make_shared<Cache>();
    auto inner = fn_;
    Fn fn = [cache, inner](std::uint64_t n) {
        {
            std::lock_guard lock(cache->mutex);
            if (auto it = cache->values.find(n); it != cache->values.end()) return it->second;
        }
        const complex v = inner(n);
        std::lock_guard lock(cache->mutex);
        cache->values.emplace(n, v);
        return v;
    };
    return {std::move(fn), description_, growth_};
}

complex divisor_transform(const CoefficientSequence& w, std::uint64_t n)
{
    complex sum = 0.0;
    for (auto d : divisors(n)) sum += w(d);
    return sum;
}

complex mobius_inverse_transform(const CoefficientSequence& g, std::uint64_t n)
{
    complex sum = 0.0;
    for (auto d : divisors(n)) {
        const int mu = mobius(n / d);
        if (mu != 0) sum += static_cast<double>(mu) * g(d);
    }
    return sum;
}

CoefficientSequence divisor_transformed(const CoefficientSequence& w)
{
    return CoefficientSequence([w](std::uint64_t n) { return divisor_transform(w, n); },
                               "divisor_sum(" + w.description() + ")",
                               divisor_sum_bound(w.growth()))
        .memoized();
}

CoefficientSequence mobius_inverted(const CoefficientSequence& g)
{
    return CoefficientSequence([g](std::uint64_t n) { return mobius_inverse_transform(g, n); },
                               "mobius_inverse(" + g.description() + ")",
                               divisor_sum_bound(g.growth()))
        .memoized();
}

namespace sequences {

CoefficientSequence one()
{
    return {[](std::uint64_t) { return complex(1.0); }, "one", {1.0, 0.0}};
}

CoefficientSequence identity()
{
    return {[](std::uint64_t n) { return complex(static_cast<double>(n)); }, "n", {1.0, 1.0}};
}

CoefficientSequence sigma(unsigned nu)
{
    return {[nu](std::uint64_t n) {
                double s = 0.0;
                for (auto d : divisors(n)) s += std::pow(static_cast<double>(d), nu);
                return complex(s);
            },
            "sigma" + std::to_string(nu),
            divisor_sum_bound({1.0, static_cast<double>(nu)})};
}

CoefficientSequence sigma0()
{
    auto s = sigma(0);
    return {[s](std::uint64_t n) { return s(n); }, "sigma0", {2.0, 0.5}};
}

CoefficientSequence mobius()
{
    return {[](std::uint64_t n) { return complex(static_cast<double>(opcalc::mobius(n))); },
            "mobius", {1.0, 0.0}};
}

CoefficientSequence phi()
{
    return {[](std::uint64_t n) { return complex(static_cast<double>(totient(n))); },
            "phi", {1.0, 1.0}};
}

CoefficientSequence inverse_square()
{
    return {[](std::uint64_t n) {
                const double x = static_cast<double>(n);
                return complex(1.0 / (x * x));
            },
            "inverse_square", {1.0, 0.0}};
}

CoefficientSequence delta1()
{
    return {[](std::uint64_t n) { return complex(n == 1 ? 1.0 : 0.0); }, "delta1", {1.0, 0.0}};
}

CoefficientSequence custom(std::vector<complex> values, bool zero_extend)
{
    double peak = 0.0;
    for (const auto& v : values) peak = std::max(peak, std::abs(v));
    auto shared = std::make_shared<const std::vector<complex>>(std::move(values));
    return {[shared, zero_extend](std::uint64_t n) {
                if (n <= shared->size()) return (*shared)[n - 1];
                if (zero_extend) return complex(0.0);
                throw DomainError("custom sequence has " + std::to_string(shared->size())
                                  + " entries; index " + std::to_string(n) + " requested");
            },
            "custom", {peak, 0.0}};
}

const std::vector<std::string>& registry_names()
{
    static const std::vector<std::string> names = {"one",  "n",   "sigma0",         "mobius",
                                                   "phi",  "inverse_square", "delta1"};
    return names;
}

CoefficientSequence named(const std::string& name)
{
    if (name == "one") return one();
    if (name == "n") return identity();
    if (name == "sigma0") return sigma0();
    if (name == "mobius") return mobius();
    if (name == "phi") return phi();
    if (name == "inverse_square") return inverse_square();
    if (name == "delta1") return delta1();
    throw DomainError("unknown sequence '" + name + "'");
}

}  // namespace sequences

}  // namespace opcalc
