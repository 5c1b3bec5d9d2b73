#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "photstat/photon_model.hpp"
#include "photstat/random.hpp"

namespace photstat {

/// Homodyne quadrature readings in the convention where the vacuum has
/// variance 1/2 (x = (a + a^dagger) / sqrt(2)).
struct QuadratureSample {
  std::vector<double> values;
  std::optional<PhotonModel> source;
  std::optional<std::uint64_t> seed;
};

/// P(x) = sum_k P(k) phi_k(x)^2 over the model's Fock-space cutoff.
double quadrature_pdf(const PhotonModel& model, double x);
double quadrature_pdf(std::span<const double> pmf, double x);

/// Cumulative distribution of the quadrature density, in closed form:
/// the integral of phi_k^2 obeys F_k(x) = F_{k-1}(x) - phi_k phi_{k-1} / sqrt(2k)
/// with F_0(x) = erfc(-x) / 2.
double quadrature_cdf(std::span<const double> pmf, double x);
double quadrature_cdf(const PhotonModel& model, double x);

/// Inverse of quadrature_cdf for prob in (0, mass).
double quadrature_quantile(std::span<const double> pmf, double prob);

/// Half-width of the integration window, sqrt(2 K) + 6 for cutoff K.
double integration_limit(int cutoff);

enum class MomentMethod { ClosedForm, NumericQuadrature };

struct QuadratureMoments {
  double variance;
  double skewness;
  double excess_kurtosis;
  MomentMethod method;
};

/// Closed form for the negative-binomial family (a > 0, a = -n) and the
/// Poisson limit; numeric integration of the density for a hierarchy.
QuadratureMoments quadrature_moments(const PhotonModel& model);

struct NumericQuadratureIntegrals {
  double mass;
  double mean;
  double variance;
  double skewness;
  double excess_kurtosis;
};

/// Trapezoid integration of the density on the fixed grid x_i = i h over
/// [-X, X], X = integration_limit(K), h = min(0.05, 0.25 / sqrt(2K + 1)).
/// Moments are normalized by the integrated mass.
NumericQuadratureIntegrals integrate_quadrature_pdf(const PhotonModel& model);

/// Two-stage sampler: k ~ P(k), then x ~ phi_k(x)^2 by rejection from a
/// centred Gaussian proposal of variance k + 1.
///
/// The envelope constant for each k is 1.05 times the largest density
/// ratio found on a grid of spacing pi / (40 sqrt(2k + 2)) covering
/// [0, sqrt(2k + 1) + 8]. A proposal whose ratio exceeds the constant
/// throws InternalError instead of biasing the sample.
class QuadratureSampler {
 public:
  explicit QuadratureSampler(const PhotonModel& model);

  double operator()(Rng& rng);
  int sample_photons(Rng& rng) const;
  double sample_given_photons(int k, Rng& rng) const;

  const PhotonModel& model() const { return model_; }

 private:
  PhotonModel model_;
  std::vector<double> cumulative_;
};

/// x ~ phi_k(x)^2 by the same rejection scheme as QuadratureSampler.
double sample_fock_quadrature(int k, Rng& rng);

/// Envelope constant used for Fock level k (exposed for testing).
double rejection_envelope(int k);

QuadratureSample sample_quadratures(const PhotonModel& model, std::size_t count, Rng& rng);

/// Quadrature readings for given photon counts, one reading per count.
std::vector<double> sample_quadratures_for_counts(std::span<const int> counts, Rng& rng);

/// Squared Hermite functions at a fixed set of sample points, extended on
/// demand to higher orders. Evaluates the mixture density at every sample
/// point as a dense column sweep. Not safe for concurrent use.
class QuadratureBasis {
 public:
  explicit QuadratureBasis(std::span<const double> xs);

  std::size_t size() const { return xs_.size(); }
  std::span<const double> points() const { return xs_; }

  /// Mixture density at every sample point.
  std::vector<double> density(std::span<const double> pmf);

  /// sum_i ln P(x_i), summed pairwise in a fixed order.
  double log_likelihood(std::span<const double> pmf);

 private:
  void extend(std::size_t orders);
  void density_streaming(std::span<const double> pmf, std::span<double> out) const;

  std::vector<double> xs_;
  std::size_t orders_ = 0;          // cached columns phi_0^2 .. phi_{orders-1}^2
  std::vector<double> squares_;     // column-major, orders_ * n
  std::vector<double> phi_prev_;    // phi_{orders-2}
  std::vector<double> phi_cur_;     // phi_{orders-1}
  std::vector<std::size_t> far_;    // indices with |x| beyond the unscaled range
};

/// Pairwise summation in a fixed order.
double pairwise_sum(std::span<const double> values);

}  // namespace photstat
