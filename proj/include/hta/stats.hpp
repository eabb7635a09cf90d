#pragma once

#include <cmath>
#include <numbers>

#include "hta/error.hpp"

namespace hta::stats {

template <typename Scalar>
Scalar gaussian_pdf(Scalar x, Scalar mean, Scalar variance) {
    if (!std::isfinite(x) || !std::isfinite(mean) || !std::isfinite(variance))
        throw DomainError("gaussian_pdf: non-finite argument");
    if (!(variance > Scalar(0)))
        throw DomainError("gaussian_pdf: variance must be positive");
    const Scalar diff = x - mean;
    return std::exp(-diff * diff / (Scalar(2) * variance)) /
           std::sqrt(Scalar(2) * std::numbers::pi_v<Scalar> * variance);
}

// Standard normal CDF; erfc keeps the lower tail accurate.
template <typename Scalar>
Scalar normal_cdf(Scalar z) {
    return Scalar(0.5) * std::erfc(-z / std::numbers::sqrt2_v<Scalar>);
}

// Inverse standard normal CDF. Rational seed (Acklam) polished by two Halley steps
// against erfc, which brings the relative error to machine precision for p in (0,1).
template <typename Scalar>
Scalar normal_quantile(Scalar p) {
    if (!(p > Scalar(0) && p < Scalar(1)))
        throw DomainError("normal_quantile: probability must lie in (0,1)");

    constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                            1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                            6.680131188771972e+01,  -1.328068155288572e+01};
    constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                            -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                            3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    const double q0 = static_cast<double>(p);
    double x;
    if (q0 < p_low) {
        const double q = std::sqrt(-2.0 * std::log(q0));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (q0 <= 1.0 - p_low) {
        const double q = q0 - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - q0));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    Scalar z = static_cast<Scalar>(x);
    const Scalar sqrt2pi = std::sqrt(Scalar(2) * std::numbers::pi_v<Scalar>);
    for (int i = 0; i < 2; ++i) {
        // upper half works with the complement so the tail keeps its digits
        const Scalar e = p > Scalar(0.5) ? (Scalar(1) - p) - Scalar(0.5) * std::erfc(z / std::numbers::sqrt2_v<Scalar>)
                                         : normal_cdf(z) - p;
        const Scalar u = e * sqrt2pi * std::exp(z * z / Scalar(2));
        z = z - u / (Scalar(1) + z * u / Scalar(2));
    }
    return z;
}

// Quantile of the chi-square distribution with one degree of freedom:
// chi2_{1,p} = (Phi^{-1}((1+p)/2))^2.
template <typename Scalar>
Scalar chi2_quantile_dof1(Scalar p) {
    if (!(p > Scalar(0) && p < Scalar(1)))
        throw DomainError("chi2_quantile_dof1: probability must lie in (0,1)");
    // Evaluate through the upper tail so that p close to 1 keeps its precision.
    const Scalar upper = (Scalar(1) - p) / Scalar(2);
    const Scalar z = -normal_quantile(upper);
    return z * z;
}

}  // namespace hta::stats
