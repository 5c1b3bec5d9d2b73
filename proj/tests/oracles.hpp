#pragma once

// Reference computations that share no code with the library.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <boost/math/distributions/negative_binomial.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/hermite.hpp>

namespace oracle {

inline double gaussian_pdf(double x, double variance) {
  return std::exp(-x * x / (2.0 * variance)) / std::sqrt(2.0 * std::numbers::pi * variance);
}

// Negative-binomial pmf with mean mu and shape a, from Boost.
inline double negative_binomial_pmf(double mu, double a, int k) {
  const boost::math::negative_binomial_distribution<double> dist(a, a / (a + mu));
  return boost::math::pdf(dist, static_cast<double>(k));
}

inline double poisson_pmf(double lambda, int k) {
  if (lambda == 0.0) return k == 0 ? 1.0 : 0.0;
  return std::exp(k * std::log(lambda) - lambda - std::lgamma(k + 1.0));
}

// Gamma-mixed Poisson by direct numerical integration over the rate.
inline double gamma_mixture_pmf(double mu, double a, int k) {
  const double scale = mu / a;
  auto integrand = [&](double lambda) {
    if (lambda <= 0.0) return 0.0;
    const double log_gamma_pdf = (a - 1.0) * std::log(lambda) - lambda / scale - std::lgamma(a) - a * std::log(scale);
    return std::exp(log_gamma_pdf + k * std::log(lambda) - lambda - std::lgamma(k + 1.0));
  };
  boost::math::quadrature::tanh_sinh<double> integrator;
  const double upper = mu + 40.0 * std::sqrt(mu * (1.0 + mu / a)) + 40.0 + 4.0 * k;
  return integrator.integrate(integrand, 0.0, upper, 1e-13);
}

// Level-2 hierarchy (mean mu, a_1 = mu b_1, a_2 = mu b_2): the inner mean m
// is Gamma(shape a_2, mean mu) and, given m, counts are negative binomial
// with mean m and shape m b_1.
inline double level2_pmf(double mu, double a1, double a2, int k) {
  const double b1 = a1 / mu;
  const double scale = mu / a2;
  auto integrand = [&](double m) {
    if (m <= 0.0) return 0.0;
    const double log_gamma_pdf = (a2 - 1.0) * std::log(m) - m / scale - std::lgamma(a2) - a2 * std::log(scale);
    return std::exp(log_gamma_pdf) * negative_binomial_pmf(m, m * b1, k);
  };
  boost::math::quadrature::tanh_sinh<double> integrator;
  const double upper = mu + 60.0 * mu / std::sqrt(a2) + 60.0;
  return integrator.integrate(integrand, 0.0, upper, 1e-12);
}

// Normalized Hermite function from Boost's physicists' polynomial, in long
// double; fine for moderate k and |x|.
inline double hermite_function(int k, double x) {
  const long double h = boost::math::hermite(static_cast<unsigned>(k), static_cast<long double>(x));
  const long double log_norm =
      0.5L * (k * std::log(2.0L) + std::lgamma(k + 1.0L) + 0.5L * std::log(std::numbers::pi_v<long double>));
  return static_cast<double>(h * std::exp(-0.5L * x * x - log_norm));
}

// sum_k k (k-1) ... (k-m+1) P(k).
inline double factorial_moment(const std::vector<double>& pmf, int m) {
  double acc = 0.0;
  for (std::size_t k = 0; k < pmf.size(); ++k) {
    double falling = 1.0;
    for (int j = 0; j < m; ++j) falling *= static_cast<double>(k) - j;
    acc += falling * pmf[k];
  }
  return acc;
}

// Adaptive Simpson integration with absolute tolerance.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
  std::function<double(double, double, double, double, double, double, double, int)> recurse =
      [&](double lo, double hi, double flo, double fmid, double fhi, double whole, double eps, int depth) {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid);
        const double rm = 0.5 * (mid + hi);
        const double flm = f(lm);
        const double frm = f(rm);
        const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
        const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
        const double delta = left + right - whole;
        if (depth <= 0 || std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
        return recurse(lo, mid, flo, flm, fmid, left, 0.5 * eps, depth - 1) +
               recurse(mid, hi, fmid, frm, fhi, right, 0.5 * eps, depth - 1);
      };
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return recurse(a, b, fa, fm, fb, whole, tol, 50);
}

// Gauss-Kronrod integral over [a, b] split into pieces of at most `piece`.
inline double integrate(const std::function<double(double)>& f, double a, double b, double piece = 1.0) {
  double total = 0.0;
  const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / piece)));
  const double width = (b - a) / pieces;
  for (int i = 0; i < pieces; ++i) {
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a + i * width, a + (i + 1) * width, 0, 1e-14);
  }
  return total;
}

// Kolmogorov-Smirnov statistic of a sample against a cdf.
inline double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

// Asymptotic Kolmogorov tail with Stephens' small-sample correction.
inline double ks_pvalue(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 == 1 ? 1.0 : -1.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace oracle
