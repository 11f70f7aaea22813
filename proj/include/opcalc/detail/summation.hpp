#pragma once

#include <cmath>
#include <complex>

namespace opcalc::detail {

// Neumaier compensated summation, applied to each component.
class CompensatedSum {
public:
    void add(std::complex<double> v)
    {
        add_part(re_, cre_, v.real());
        add_part(im_, cim_, v.imag());
    }

    std::complex<double> value() const { return {re_ + cre_, im_ + cim_}; }

private:
    static void add_part(double& sum, double& comp, double v)
    {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }

    double re_ = 0.0, cre_ = 0.0, im_ = 0.0, cim_ = 0.0;
};

}  // namespace opcalc::detail
