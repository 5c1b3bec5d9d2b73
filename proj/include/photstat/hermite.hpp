#pragma once

#include <span>

namespace photstat {

/// Largest |x| accepted by the Hermite function routines.
inline constexpr double kMaxAbsQuadrature = 200.0;

/// Normalized Hermite function phi_k(x) = (2^k k! sqrt(pi))^{-1/2} H_k(x) e^{-x^2/2}.
double hermite_fn(int k, double x);

/// Fills out[k] = phi_k(x) for k = 0 .. out.size() - 1.
///
/// Uses phi_{k+1} = x sqrt(2/(k+1)) phi_k - sqrt(k/(k+1)) phi_{k-1} starting
/// from phi_0 = pi^{-1/4} e^{-x^2/2}. For |x| large enough that e^{-x^2/2}
/// underflows, the recurrence runs on a rescaled copy with a running log
/// scale, so high orders near their turning points stay accurate.
void hermite_fns(double x, std::span<double> out);

}  // namespace photstat
