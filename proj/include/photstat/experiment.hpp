#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "photstat/errors.hpp"
#include "photstat/inference.hpp"
#include "photstat/photon_model.hpp"
#include "photstat/photon_stats.hpp"
#include "photstat/quadrature.hpp"

namespace photstat {

enum class CampaignMode { Analytic, MonteCarlo };

std::string to_string(CampaignMode mode);

/// A synthetic reconstruction campaign: a thermal-like source, m = 0..m_max
/// subtracted photons, sample_sizes[m] quadrature readings per state.
struct CampaignConfig {
  double mu0 = 3.034;
  double a0 = 1.0;
  int m_max = 10;
  std::vector<std::size_t> sample_sizes{50000, 25000, 12500, 7500, 4500, 4500, 2500, 2500, 2500, 500, 358};
  std::uint64_t seed = 20240611;
  CampaignMode mode = CampaignMode::Analytic;
  /// Reflection probability of each beam-splitter pass (MonteCarlo mode).
  double p = 0.01;

  /// Throws DomainError on an invalid configuration.
  void validate() const;
};

/// Reads a JSON object whose fields override the defaults. When m_max is
/// given without sample_sizes the default list is cut to m_max + 1 entries.
CampaignConfig campaign_config_from_json(std::string_view text);
std::string campaign_config_to_json(const CampaignConfig& config, int indent = -1);

/// Ideal m-subtracted state (mu0 (a0 + m) / a0, a0 + m).
PhotonModel ideal_subtracted(const CampaignConfig& config, int m);

struct CampaignStage {
  int m = 0;
  /// Model the readings were drawn from. In MonteCarlo mode this is the
  /// finite-p closed form the conditioned photon counts follow.
  PhotonModel generator;
  PhotonModel ideal;
  FitResult fit;
  /// Fraction of pool trials kept by the beam-splitter conditioning.
  std::optional<double> mc_acceptance;
  std::size_t pool_size = 0;
};

struct CampaignResult {
  CampaignConfig config;
  std::vector<CampaignStage> stages;
  /// ln g^(m) for m = 2 .. m_max + 1 from the fitted means.
  CorrelationReport correlations;
};

/// A stage failed; partial() holds every stage completed before it.
class CampaignError : public Error {
 public:
  CampaignError(const std::string& what, CampaignResult partial) : Error(what), partial_(std::move(partial)) {}
  const CampaignResult& partial() const { return partial_; }

 private:
  CampaignResult partial_;
};

/// Runs every stage in order with per-stage seeds split from config.seed.
CampaignResult run_campaign(const CampaignConfig& config);

/// ln g^(m) from fitted stage means with delta-method standard deviations.
CorrelationReport correlations_from_stages(std::span<const CampaignStage> stages);

inline constexpr std::string_view kReportColumns = "state,mu,sigma_mu,a,sigma_a,sample_size,fidelity,chi2_significance";

/// One row of the reconstruction table; fidelity is printed in percent (six
/// decimals) and
/// left empty when the fit has no reference.
std::string report_row(std::string_view state, const FitResult& fit);

/// Reconstruction table plus the trailing block "order,ln_g,sigma_ln_g".
std::string campaign_report_csv(const CampaignResult& result);

struct ComparisonBin {
  double lower = 0.0;
  double upper = 0.0;
  double center = 0.0;
  std::size_t count = 0;
  double empirical_density = 0.0;
  double level1_pdf = 0.0;
  double level2_pdf = 0.0;
  double level1_expected = 0.0;
  double level2_expected = 0.0;
};

/// Histogram of the readings on `bins` equal-width bins over
/// [-max|x|, max|x|] with both model densities at the bin centres and the
/// expected bin counts from their cdfs. bins < 5 throws DomainError.
std::vector<ComparisonBin> compare_models(const QuadratureSample& samples, const PhotonModel& level1,
                                          const PhotonModel& level2, int bins);
std::string comparison_csv(std::span<const ComparisonBin> table);

}  // namespace photstat
