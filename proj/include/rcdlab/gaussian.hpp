#pragma once

namespace rcdlab::gaussian {

inline constexpr double kSqrt2Pi = 2.50662827463100050242;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

/// Standard normal density.
double density(double x);

/// Standard normal CDF sigma(x) = gamma((-inf, x]). Flushes to 0 below about -38.
double cdf(double x);

/// Upper tail 1 - sigma(x), accurate where cdf(x) rounds to 1.
double survival(double x);

/// Inverse of cdf on (0, 1), safeguarded bisection + Newton to 1e-12.
/// Throws InvalidArgument outside (0, 1).
double quantile(double p);

/// Normalized potential of the standard Gaussian: x^2/2 + log sqrt(2 pi).
inline double potential(double x) { return 0.5 * x * x + kLogSqrt2Pi; }

}  // namespace rcdlab::gaussian
