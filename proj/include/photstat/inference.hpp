#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "photstat/errors.hpp"
#include "photstat/photon_model.hpp"
#include "photstat/quadrature.hpp"

namespace photstat {

enum class FitMethod { MomentsOnly, MaxLikelihood, HierarchyLevel2 };
enum class ErrorMethod { None, FisherInformation, Bootstrap };

std::string to_string(FitMethod method);
std::string to_string(ErrorMethod method);

// Parameter boxes. Fits work in log-parameters so positivity is implicit.
inline constexpr double kMinMu = 0.01;
inline constexpr double kMaxMu = 1e3;
inline constexpr double kMinA = 0.05;
inline constexpr double kMaxA = 1e3;
inline constexpr double kMinA2 = 0.1;
inline constexpr double kMaxA2 = 1e6;

struct FitResult {
  explicit FitResult(PhotonModel fitted) : model(std::move(fitted)) {}

  PhotonModel model;
  double sigma_mu = 0.0;
  /// Standard deviation of a (of a_1 for a hierarchy; 0 when a_1 was fixed).
  double sigma_a = 0.0;
  /// Hierarchy fits: standard deviations of a_1 .. a_r; an entry is 0 for a
  /// parameter that was fixed or pinned rather than estimated.
  std::vector<double> sigma_levels;
  double log_likelihood = 0.0;
  double chi2_significance = 0.0;
  std::optional<double> fidelity_vs_reference;
  std::size_t sample_size = 0;
  FitMethod method = FitMethod::MaxLikelihood;
  ErrorMethod error_method = ErrorMethod::None;
  bool converged = true;
  /// Optimum within 0.1% (in log-parameter) of a box bound.
  bool boundary_pinned = false;
  int evaluations = 0;
  /// Hierarchy fits: the level-2 correction is not supported by the data
  /// and a_2 is reported at its upper bound.
  std::optional<bool> level1_sufficient;
  std::optional<double> level1_chi2_significance;
  std::optional<double> level1_log_likelihood;
};

/// Thrown when the optimizer exhausts its evaluation budget; carries the
/// best point found.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, FitResult best) : Error(what), best_(std::move(best)) {}
  const FitResult& best() const { return best_; }

 private:
  FitResult best_;
};

struct MomentEstimate {
  double mu_hat;
  /// Raw estimate; may be negative or huge for data near the Poisson limit.
  double a_hat;
  double variance;
  double excess_kurtosis;
};

/// Inverts variance = mu + 1/2 and the excess-kurtosis law for (mu, a).
MomentEstimate method_of_moments(double variance, double excess_kurtosis);

/// Same, from the sample's central moments (normalized by n). Needs n >= 30
/// and variance > 1/2.
MomentEstimate method_of_moments(const QuadratureSample& samples);

/// Fit from moments alone; standard deviations from a 200-resample bootstrap.
FitResult fit_moments(const QuadratureSample& samples, std::uint64_t bootstrap_seed = 0x5eedULL);

double log_likelihood(const QuadratureSample& samples, const PhotonModel& model);

struct MleOptions {
  /// Starting (mu, a); defaults to the clamped method-of-moments estimate.
  std::optional<std::pair<double, double>> init;
  std::optional<PhotonModel> reference;
  int max_evaluations = 4000;
  /// Skip standard errors and the chi-squared test (used inside bootstraps).
  bool estimate_only = false;
};

/// Maximum-likelihood compound-Poisson fit over (ln mu, ln a) by simplex
/// search with one restart. Fills sigmas from fisher_errors and the
/// significance from chi2_test with two fitted parameters.
FitResult mle_fit(const QuadratureSample& samples, const MleOptions& options = {});

struct ParameterErrors {
  /// One entry per model parameter: (mu, a) or (mu, a_1, ..., a_r).
  std::vector<double> sigmas;
  ErrorMethod method = ErrorMethod::FisherInformation;
};

/// Standard deviations from the inverse observed Fisher information, a
/// central-difference Hessian of the negative log-likelihood with relative
/// step 1e-4. Falls back to a 200-resample bootstrap when the Hessian is not
/// positive definite.
ParameterErrors fisher_errors(const QuadratureSample& samples, const PhotonModel& model);

struct Chi2Result {
  double statistic = 0.0;
  int bins = 0;
  int degrees_of_freedom = 0;
  double significance = 0.0;
};

/// Pearson test on max(10, n / 50) (at most 100) equal-probability bins of
/// the model's quadrature distribution.
Chi2Result chi2_details(const QuadratureSample& samples, const PhotonModel& model, int fitted_parameters = 2);
double chi2_test(const QuadratureSample& samples, const PhotonModel& model, int fitted_parameters = 2);

/// F = (sum_k sqrt(P_1(k) P_2(k)))^2 over the common Fock-space cutoff.
///
/// Every model here is diagonal in the Fock basis, so the Uhlmann fidelity
/// (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 reduces to this squared
/// Bhattacharyya coefficient. Both distributions are renormalized on the
/// truncated support.
double fidelity(const PhotonModel& first, const PhotonModel& second);

struct HierarchyFitOptions {
  std::optional<double> fixed_a1;
  std::optional<PhotonModel> reference;
  int max_evaluations = 6000;
};

/// Level-2 hierarchy fit over (mu, a_1, a_2), or (mu, a_2) with a_1 fixed.
/// The data decide between level 2 and level 1 by a likelihood-ratio test
/// against the fit with a_2 pinned at kMaxA2; when the statistic is below
/// 2.706 (the 5% point of the boundary mixture 0.5 chi2_0 + 0.5 chi2_1) the
/// pinned fit is reported and flagged level1_sufficient.
FitResult fit_hierarchy2(const QuadratureSample& samples, const HierarchyFitOptions& options = {});

}  // namespace photstat
