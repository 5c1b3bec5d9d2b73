#pragma once

#include <optional>
#include <span>
#include <vector>

#include "photstat/photon_model.hpp"
#include "photstat/photon_stats.hpp"
#include "photstat/random.hpp"

namespace photstat {

/// Outcome of an m-photon subtraction.
struct SubtractionRecord {
  PhotonModel initial;
  int m = 0;
  /// Beam-splitter reflection probability; empty means the p -> 0 limit.
  std::optional<double> p;
  /// Mean photon number after each of the m subtractions.
  std::vector<double> step_means;
  PhotonModel result;
  /// Per-pass fraction of trials with exactly one reflected photon
  /// (Monte-Carlo runs only).
  std::optional<std::vector<double>> mc_acceptance;
};

/// p -> 0 subtraction, G_1(z) = G'(z) / mu applied m times.
/// CompoundPoisson(mu, a) -> CompoundPoisson(mu (a + m) / a, a + m); Poisson
/// is invariant; BinomialFock(n) -> BinomialFock(n - m) with survival mu / n
/// kept, valid for m < n.
SubtractionRecord subtract_analytic(const PhotonModel& model, int m);

/// One subtraction at finite reflection probability p:
/// G_1(z) = G'(z (1 - p)) / G'(1 - p).
///
/// For the negative-binomial family the result stays in the family with
/// a' = a + 1 and mu' = (a + 1) (1 - p) (mu / a) / (1 + mu p / a); Poisson
/// maps to Poisson(mu (1 - p)).
class FiniteSubtraction {
 public:
  FiniteSubtraction(PhotonModel source, double p);

  const PhotonModel& source() const { return source_; }
  double p() const { return p_; }

  /// Generic PGF from derivatives of the source PGF.
  double pgf(double z) const;
  /// Mean (1 - p) G''(1 - p) / G'(1 - p).
  double mean() const;
  /// Probability that exactly one photon is reflected, p G'(1 - p).
  double acceptance() const;
  /// Closed-form model of the subtracted state when one exists.
  const std::optional<PhotonModel>& closed_form() const { return closed_form_; }

 private:
  PhotonModel source_;
  double p_;
  std::optional<PhotonModel> closed_form_;
};

FiniteSubtraction subtract_finite_p(const PhotonModel& model, double p);

/// m cascaded finite-p subtractions through the closed-form map. Throws
/// UnsupportedKindError when some step has no closed form (a hierarchy) and
/// ImpossibleSubtractionError when a Fock state would be emptied.
SubtractionRecord subtract_finite_chain(const PhotonModel& model, int m, double p);

struct McSubtraction {
  std::vector<int> surviving;
  double acceptance = 0.0;
  /// Set when the input was empty.
  bool empty_input = false;
};

/// Beam-splitter conditioning on photon counts: each photon of a count k is
/// reflected independently with probability p; the trial is kept (with
/// k - 1 photons) only when exactly one photon was reflected.
McSubtraction mc_subtract(std::span<const int> samples, double p, Rng& rng);

struct McChain {
  std::vector<int> surviving;
  std::vector<double> acceptance;  // per pass
};

/// m cascaded single-click passes, each conditioning on the survivors of
/// the previous one.
McChain mc_subtract_chain(std::span<const int> samples, double p, int passes, Rng& rng);

/// Photon counts drawn from a model by inverse-cdf lookup over pmf_table.
std::vector<int> sample_photon_counts(const PhotonModel& model, std::size_t count, Rng& rng);

/// g^(m) = mu_1 ... mu_{m-1} / mu^{m-1} for m = 2 .. step_means.size() + 1,
/// accumulated in log space.
CorrelationReport autocorr_from_means(double mu0, std::span<const double> step_means);

/// As above with first-order propagation of independent standard deviations:
/// var(ln g^(m)) = sum_i (sigma_i / mu_i)^2 + (m - 1)^2 (sigma_0 / mu)^2.
CorrelationReport autocorr_from_means(double mu0, std::span<const double> step_means, double sigma_mu0,
                                      std::span<const double> step_sigmas);

/// g^(m) by the recurrence g^(m+1) = g^(m) mu_m / mu in linear space.
std::vector<double> autocorr_recurrence(double mu0, std::span<const double> step_means);

/// g_m^(n) of the m-subtracted state from correlations of the original:
/// g^(m+n) (g^(m))^(n-1) / (g^(m+1))^n, with g^(0) = g^(1) = 1.
double conditional_autocorr(const PhotonModel& model, int m, int n);

}  // namespace photstat
