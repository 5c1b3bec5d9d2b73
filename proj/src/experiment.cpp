#include "photstat/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "photstat/io.hpp"
#include "photstat/random.hpp"
#include "photstat/subtraction.hpp"

namespace photstat {

using nlohmann::json;

namespace {

constexpr double kPoolOversize = 20.0;
constexpr std::size_t kMaxPool = std::size_t{1} << 28;

std::string state_label(int m) { return m == 0 ? "thermal" : "m=" + std::to_string(m); }

QuadratureSample draw_stage(const CampaignConfig& config, int m, Rng& rng, PhotonModel& generator,
                            std::optional<double>& acceptance, std::size_t& pool_size) {
  const std::size_t n = config.sample_sizes[static_cast<std::size_t>(m)];
  const PhotonModel thermal = PhotonModel::compound_poisson(config.mu0, config.a0);
  if (m == 0 || config.mode == CampaignMode::Analytic) {
    generator = m == 0 ? thermal : subtract_analytic(thermal, m).result;
    return sample_quadratures(generator, n, rng);
  }

  // The pool for pass m comes from the state after m - 1 finite-p passes.
  const PhotonModel parent = m == 1 ? thermal : subtract_finite_chain(thermal, m - 1, config.p).result;
  const FiniteSubtraction pass(parent, config.p);
  generator = *pass.closed_form();
  const double pool = std::ceil(kPoolOversize * static_cast<double>(n) / pass.acceptance());
  if (!(pool <= static_cast<double>(kMaxPool))) {
    throw RangeError("photon-count pool for stage " + std::to_string(m) + " would exceed " + std::to_string(kMaxPool));
  }
  pool_size = static_cast<std::size_t>(pool);
  const std::vector<int> counts = sample_photon_counts(parent, pool_size, rng);
  McSubtraction kept = mc_subtract(counts, config.p, rng);
  acceptance = kept.acceptance;
  if (kept.surviving.size() < n) {
    throw RangeError("photon-count pool exhausted at stage " + std::to_string(m) + ": " +
                     std::to_string(kept.surviving.size()) + " survivors for " + std::to_string(n) + " readings");
  }
  kept.surviving.resize(n);
  QuadratureSample sample{sample_quadratures_for_counts(kept.surviving, rng), generator, rng.seed()};
  return sample;
}

}  // namespace

std::string to_string(CampaignMode mode) { return mode == CampaignMode::Analytic ? "analytic" : "monte_carlo"; }

void CampaignConfig::validate() const {
  if (!(mu0 > 0.0) || !std::isfinite(mu0)) throw DomainError("campaign mu0 must be positive");
  if (!(a0 > 0.0) || !std::isfinite(a0)) throw DomainError("campaign a0 must be positive");
  if (m_max < 0) throw DomainError("campaign m_max must be nonnegative");
  if (sample_sizes.size() != static_cast<std::size_t>(m_max) + 1) {
    throw DomainError("campaign needs m_max + 1 = " + std::to_string(m_max + 1) + " sample sizes, got " +
                      std::to_string(sample_sizes.size()));
  }
  for (std::size_t n : sample_sizes) {
    if (n < 100) throw DomainError("campaign sample sizes must be at least 100");
  }
  if (!(p > 0.0 && p < 1.0)) throw DomainError("campaign reflection probability must lie in (0, 1)");
}

CampaignConfig campaign_config_from_json(std::string_view text) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("invalid campaign JSON: ") + e.what());
  }
  if (!obj.is_object()) throw FormatError("campaign config must be a JSON object");

  CampaignConfig config;
  auto number = [&](const std::string& key) {
    if (!obj[key].is_number()) throw FormatError("campaign field \"" + key + "\" must be a number");
    return obj[key].get<double>();
  };
  bool sizes_given = false;
  for (const auto& [key, value] : obj.items()) {
    if (key == "mu0") {
      config.mu0 = number(key);
    } else if (key == "a0") {
      config.a0 = number(key);
    } else if (key == "p") {
      config.p = number(key);
    } else if (key == "m_max") {
      if (!value.is_number_integer()) throw FormatError("campaign field \"m_max\" must be an integer");
      config.m_max = value.get<int>();
    } else if (key == "seed") {
      if (!value.is_number_unsigned()) throw FormatError("campaign field \"seed\" must be a nonnegative integer");
      config.seed = value.get<std::uint64_t>();
    } else if (key == "mode") {
      const std::string mode = value.is_string() ? value.get<std::string>() : "";
      if (mode == "analytic") {
        config.mode = CampaignMode::Analytic;
      } else if (mode == "monte_carlo") {
        config.mode = CampaignMode::MonteCarlo;
      } else {
        throw FormatError("campaign field \"mode\" must be \"analytic\" or \"monte_carlo\"");
      }
    } else if (key == "sample_sizes") {
      if (!value.is_array()) throw FormatError("campaign field \"sample_sizes\" must be an array");
      config.sample_sizes.clear();
      for (const auto& v : value) {
        if (!v.is_number_integer() || v.get<long long>() <= 0) {
          throw DomainError("campaign sample sizes must be positive integers");
        }
        config.sample_sizes.push_back(v.get<std::size_t>());
      }
      sizes_given = true;
    } else {
      throw FormatError("unknown campaign field \"" + key + "\"");
    }
  }
  if (!sizes_given && config.m_max >= 0 && static_cast<std::size_t>(config.m_max) + 1 <= config.sample_sizes.size()) {
    config.sample_sizes.resize(static_cast<std::size_t>(config.m_max) + 1);
  }
  config.validate();
  return config;
}

std::string campaign_config_to_json(const CampaignConfig& config, int indent) {
  json out = {{"mu0", config.mu0},     {"a0", config.a0},
              {"m_max", config.m_max}, {"sample_sizes", config.sample_sizes},
              {"seed", config.seed},   {"mode", to_string(config.mode)},
              {"p", config.p}};
  return out.dump(indent);
}

PhotonModel ideal_subtracted(const CampaignConfig& config, int m) {
  return PhotonModel::compound_poisson(config.mu0 * (config.a0 + m) / config.a0, config.a0 + m);
}

CorrelationReport correlations_from_stages(std::span<const CampaignStage> stages) {
  if (stages.size() < 2) return {};
  std::vector<double> means;
  std::vector<double> sigmas;
  for (std::size_t i = 1; i < stages.size(); ++i) {
    means.push_back(stages[i].fit.model.mu());
    sigmas.push_back(stages[i].fit.sigma_mu);
  }
  return autocorr_from_means(stages[0].fit.model.mu(), means, stages[0].fit.sigma_mu, sigmas);
}

CampaignResult run_campaign(const CampaignConfig& config) {
  config.validate();
  CampaignResult result{config, {}, {}};
  for (int m = 0; m <= config.m_max; ++m) {
    try {
      Rng rng(split_seed(config.seed, static_cast<std::uint64_t>(m)));
      PhotonModel generator = PhotonModel::compound_poisson(config.mu0, config.a0);
      std::optional<double> acceptance;
      std::size_t pool_size = 0;
      const QuadratureSample sample = draw_stage(config, m, rng, generator, acceptance, pool_size);
      const PhotonModel ideal = ideal_subtracted(config, m);
      MleOptions options;
      options.reference = ideal;
      FitResult fit = mle_fit(sample, options);
      result.stages.push_back({m, generator, ideal, std::move(fit), acceptance, pool_size});
    } catch (const Error& e) {
      result.correlations = correlations_from_stages(result.stages);
      throw CampaignError("campaign stage " + state_label(m) + " failed: " + e.what(), std::move(result));
    }
  }
  result.correlations = correlations_from_stages(result.stages);
  return result;
}

std::string report_row(std::string_view state, const FitResult& fit) {
  std::ostringstream row;
  row << state << ',' << format_number(fit.model.mu()) << ',' << format_number(fit.sigma_mu) << ','
      << (fit.model.a() ? format_number(*fit.model.a()) : std::string()) << ',' << format_number(fit.sigma_a) << ','
      << fit.sample_size << ','
      << (fit.fidelity_vs_reference ? format_number(std::round(1e8 * *fit.fidelity_vs_reference) / 1e6) : std::string()) << ','
      << format_number(fit.chi2_significance);
  return row.str();
}

std::string campaign_report_csv(const CampaignResult& result) {
  const CampaignConfig& c = result.config;
  std::ostringstream out;
  out << "# synthetic reconstruction campaign: mode=" << to_string(c.mode) << " seed=" << c.seed
      << " mu0=" << format_number(c.mu0) << " a0=" << format_number(c.a0) << " m_max=" << c.m_max;
  if (c.mode == CampaignMode::MonteCarlo) out << " p=" << format_number(c.p);
  out << '\n';
  out << "# targets are the ideal subtraction chain (mu0 (a0 + m) / a0, a0 + m); published laboratory values are"
         " anchors for scale only, not reproduction targets\n";
  out << "# fidelity in percent against the ideal state\n";
  out << kReportColumns << '\n';
  for (const CampaignStage& stage : result.stages) out << report_row(state_label(stage.m), stage.fit) << '\n';
  out << '\n' << "order,ln_g,sigma_ln_g\n";
  const CorrelationReport& g = result.correlations;
  for (std::size_t i = 0; i < g.orders.size(); ++i) {
    out << g.orders[i] << ',' << format_number(g.log_g_values[i]) << ',' << format_number(g.sigma_log_g[i]) << '\n';
  }
  return out.str();
}

std::vector<ComparisonBin> compare_models(const QuadratureSample& samples, const PhotonModel& level1,
                                          const PhotonModel& level2, int bins) {
  if (bins < 5) throw DomainError("comparison needs at least 5 bins, got " + std::to_string(bins));
  if (samples.values.empty()) throw InsufficientDataError("comparison needs at least one reading");
  double reach = 0.0;
  for (double x : samples.values) reach = std::max(reach, std::abs(x));
  reach = reach > 0.0 ? reach * (1.0 + 1e-12) : 1.0;

  const std::vector<double> table1 = pmf_table(level1);
  const std::vector<double> table2 = pmf_table(level2);
  const double width = 2.0 * reach / bins;
  const double n = static_cast<double>(samples.values.size());

  std::vector<ComparisonBin> out(static_cast<std::size_t>(bins));
  for (double x : samples.values) {
    const auto j = static_cast<std::size_t>(std::clamp((x + reach) / width, 0.0, bins - 1.0));
    ++out[j].count;
  }
  for (int j = 0; j < bins; ++j) {
    ComparisonBin& b = out[static_cast<std::size_t>(j)];
    b.lower = -reach + j * width;
    b.upper = j == bins - 1 ? reach : -reach + (j + 1) * width;
    b.center = 0.5 * (b.lower + b.upper);
    b.empirical_density = static_cast<double>(b.count) / (n * (b.upper - b.lower));
    b.level1_pdf = quadrature_pdf(table1, b.center);
    b.level2_pdf = quadrature_pdf(table2, b.center);
    b.level1_expected = n * (quadrature_cdf(table1, b.upper) - quadrature_cdf(table1, b.lower));
    b.level2_expected = n * (quadrature_cdf(table2, b.upper) - quadrature_cdf(table2, b.lower));
  }
  return out;
}

std::string comparison_csv(std::span<const ComparisonBin> table) {
  std::ostringstream out;
  out << "bin_lower,bin_upper,center,count,empirical_density,level1_pdf,level2_pdf,level1_expected,level2_expected\n";
  for (const ComparisonBin& b : table) {
    out << format_number(b.lower) << ',' << format_number(b.upper) << ',' << format_number(b.center) << ','
        << b.count << ',' << format_number(b.empirical_density) << ',' << format_number(b.level1_pdf) << ','
        << format_number(b.level2_pdf) << ',' << format_number(b.level1_expected) << ','
        << format_number(b.level2_expected) << '\n';
  }
  return out.str();
}

}  // namespace photstat
