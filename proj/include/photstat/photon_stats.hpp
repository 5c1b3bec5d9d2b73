#pragma once

#include <vector>

#include "photstat/photon_model.hpp"

namespace photstat {

/// Correlation functions g^(m) for orders m >= 2 (g^(1) = 1 is implicit).
struct CorrelationReport {
  std::vector<int> orders;
  std::vector<double> g_values;
  std::vector<double> log_g_values;
  /// Propagated standard deviation of ln g^(m); zero for exact model values.
  std::vector<double> sigma_log_g;
};

/// Tail mass allowed beyond the Fock-space cutoff.
inline constexpr double kTailMass = 1e-10;
/// Hard ceiling on the Fock-space cutoff (and on Hermite function order).
inline constexpr int kFockCeiling = 4096;
/// Largest order for which rising factorials (and hence closed-form
/// correlation functions and PGF derivatives) are provided.
inline constexpr int kMaxRisingOrder = 20;

/// Smallest K such that P(k > K) < kTailMass. Computed from the survival
/// function for the closed-form kinds and from accumulated series
/// coefficients for a hierarchy. Throws TruncationError above kFockCeiling.
int truncation(const PhotonModel& model);

/// P(k). For a hierarchy, k beyond truncation(model) throws TruncationError.
double pmf(const PhotonModel& model, int k);

/// P(0..K) with K = truncation(model).
std::vector<double> pmf_table(const PhotonModel& model);

/// G(z) for |z| <= 1.
double pgf_eval(const PhotonModel& model, double z);

/// G^(order)(z) for |z| <= 1. Closed forms for CompoundPoisson, Poisson and
/// BinomialFock; exact Taylor-coefficient propagation for a hierarchy.
double pgf_derivative(const PhotonModel& model, int order, double z);

/// Taylor coefficients c_0..c_{terms-1} of G around z0, so that
/// G^(j)(z0) = j! c_j. Works for every kind.
std::vector<double> pgf_taylor(const PhotonModel& model, double z0, int terms);

/// ln |(a)_m| for the rising factorial a (a+1) ... (a+m-1), m <= 20.
double log_rising_factorial(double a, int m);
/// Signed rising factorial, m <= 20.
double rising_factorial(double a, int m);

/// g^(m) = (a)_m / a^m for CompoundPoisson and BinomialFock (a = -n),
/// 1 for Poisson, G^(m)(1) / mu^m for a hierarchy. Requires m >= 2.
double autocorrelation(const PhotonModel& model, int m);

/// g^(m) = G^(m)(1) / mu^m evaluated from the PGF derivative for any kind.
double autocorrelation_from_pgf(const PhotonModel& model, int m);

/// g^(2) .. g^(max_order) of a model, with zero uncertainty.
CorrelationReport correlation_report(const PhotonModel& model, int max_order);

/// Transmission t in (0, 1]: mu -> mu t, clusterization unchanged.
PhotonModel apply_loss(const PhotonModel& model, double t);

struct PhotonMoments {
  double mean;
  double variance;
};

/// Mean and variance of the photon number. variance = mu (1 + mu / a) for
/// the negative-binomial family (including a = -n); G''(1) + mu - mu^2 for
/// a hierarchy.
PhotonMoments moments(const PhotonModel& model);

}  // namespace photstat
