// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit when any
// criterion fails.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "photstat/experiment.hpp"
#include "photstat/inference.hpp"
#include "photstat/photon_stats.hpp"
#include "photstat/quadrature.hpp"
#include "photstat/random.hpp"
#include "photstat/subtraction.hpp"

#ifndef PHOTSTAT_CLI_PATH
#error "PHOTSTAT_CLI_PATH must name the command-line executable"
#endif

using namespace photstat;

namespace {

constexpr std::uint64_t kSeedRoot = 0xACCE55;

std::uint64_t criterion_seed(int id) { return split_seed(kSeedRoot, static_cast<std::uint64_t>(id)); }

struct Verdict {
  bool pass;
  std::string detail;
};

std::string cli(const std::string& args) {
  const std::string command = std::string(PHOTSTAT_CLI_PATH) + " --quiet " + args + " 2>/dev/null";
  FILE* pipe = popen(command.c_str(), "r");
  if (pipe == nullptr) return {};
  std::string out;
  std::array<char, 256> buf{};
  std::size_t got = 0;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
  pclose(pipe);
  while (!out.empty() && (out.back() == '\n' || out.back() == '\r')) out.pop_back();
  return out;
}

template <typename T>
std::string str(const T& value) {
  std::ostringstream out;
  out.precision(10);
  out << value;
  return out.str();
}

Verdict thermal_g2() {
  const std::string thermal = cli("model --mu 3 --a 1 --g 2");
  const std::string fock = cli("model --fock 1 --mu 1 --g 2");
  const std::string coherent = cli("model --mu 3 --a 1e6 --g 2");
  double near_one = NAN;
  try {
    near_one = std::stod(coherent);
  } catch (...) {
  }
  const bool pass = thermal == "2.0" && fock == "0.0" && std::abs(near_one - 1.0) <= 1e-5;
  return {pass, "thermal=" + thermal + " fock1=" + fock + " a=1e6:" + coherent};
}

Verdict subtraction_closure() {
  const SubtractionRecord chain = subtract_analytic(PhotonModel::compound_poisson(3.034, 1.0), 10);
  const double mu = chain.result.mu();
  const double a = *chain.result.a();
  return {std::abs(mu - 33.374) <= 1e-9 && a == 11.0, "mu10=" + str(mu) + " a10=" + str(a)};
}

Verdict g11_theory() {
  std::vector<double> means;
  for (int k = 1; k <= 10; ++k) means.push_back(3.034 * (1 + k));
  const CorrelationReport report = autocorr_from_means(3.034, means);
  const double diff = std::abs(report.log_g_values.back() - std::lgamma(12.0));
  return {diff <= 1e-9, "ln_g11=" + str(report.log_g_values.back()) + " |diff|=" + str(diff)};
}

Verdict moment_grid(bool kurtosis) {
  double worst = 0.0;
  for (double mu : {1.0, 3.0, 10.0}) {
    for (double a : {0.5, 1.0, 2.0, 10.0}) {
      const NumericQuadratureIntegrals numeric = integrate_quadrature_pdf(PhotonModel::compound_poisson(mu, a));
      const double r = mu / (2.0 * mu + 1.0);
      const double err = kurtosis ? std::abs(numeric.excess_kurtosis + 6.0 * r * r * (a - 1.0) / a)
                                  : std::abs(numeric.variance - (mu + 0.5));
      worst = std::max(worst, err);
    }
  }
  const double tol = kurtosis ? 1e-4 : 1e-5;
  return {worst <= tol, "max|err|=" + str(worst)};
}

Verdict reconstruction_consistency() {
  const PhotonModel truth = PhotonModel::compound_poisson(5.983, 1.605);
  const std::uint64_t root = criterion_seed(6);
  int covered = 0;
  double sigma_sum = 0.0;
  for (std::uint64_t run = 0; run < 100; ++run) {
    Rng rng(split_seed(root, run));
    const FitResult fit = mle_fit(sample_quadratures(truth, 25000, rng));
    sigma_sum += fit.sigma_mu;
    if (std::abs(fit.model.mu() - 5.983) < 3.0 * fit.sigma_mu && std::abs(*fit.model.a() - 1.605) < 3.0 * fit.sigma_a) {
      ++covered;
    }
  }
  const double mean_sigma = sigma_sum / 100.0;
  const bool pass = covered >= 95 && mean_sigma > 0.051 / 2.0 && mean_sigma < 0.051 * 2.0;
  return {pass, "covered=" + std::to_string(covered) + "/100 mean_sigma_mu=" + str(mean_sigma)};
}

Verdict full_campaign() {
  const CampaignConfig config;
  const CampaignResult result = run_campaign(config);
  double min_fidelity = 1.0;
  double min_significance = 1.0;
  for (const CampaignStage& stage : result.stages) {
    min_fidelity = std::min(min_fidelity, *stage.fit.fidelity_vs_reference);
    min_significance = std::min(min_significance, stage.fit.chi2_significance);
  }
  const double ln_g11 = result.correlations.log_g_values.back();
  const double sigma = result.correlations.sigma_log_g.back();
  const double target = std::lgamma(12.0);
  const bool pass = min_fidelity >= 0.995 && min_significance > 0.01 && std::abs(ln_g11 - target) < 3.0 * sigma;
  return {pass, "seed=" + std::to_string(config.seed) + " min_fidelity=" + str(min_fidelity) +
                    " min_chi2_p=" + str(min_significance) + " ln_g11=" + str(ln_g11) + "+-" + str(sigma)};
}

Verdict mc_equivalence() {
  const PhotonModel thermal = PhotonModel::compound_poisson(3.0, 1.0);
  Rng rng(criterion_seed(8));
  const std::vector<int> pool = sample_photon_counts(thermal, 1000000, rng);
  const McSubtraction kept = mc_subtract(pool, 0.01, rng);
  const FiniteSubtraction step(thermal, 0.01);
  const PhotonModel target = *step.closed_form();

  const std::size_t n = kept.surviving.size();
  std::vector<double> values(kept.surviving.begin(), kept.surviving.end());
  const double se = std::sqrt(moments(target).variance / static_cast<double>(n));
  const double mean_gap = std::abs(oracle::mean(values) - step.mean());

  const std::vector<double> table = pmf_table(target);
  std::vector<double> freq(table.size(), 0.0);
  double beyond = 0.0;
  for (int k : kept.surviving) {
    if (static_cast<std::size_t>(k) < freq.size()) {
      freq[static_cast<std::size_t>(k)] += 1.0 / static_cast<double>(n);
    } else {
      beyond += 1.0 / static_cast<double>(n);
    }
  }
  double tv = beyond;
  for (std::size_t k = 0; k < table.size(); ++k) tv += std::abs(freq[k] - table[k]);
  tv *= 0.5;
  // expected distance of an exact n-draw empirical pmf, for context
  double floor = 0.0;
  for (double p : table) floor += std::sqrt(2.0 * p * (1.0 - p) / (std::numbers::pi * static_cast<double>(n)));
  floor *= 0.5;
  const bool pass = mean_gap < 3.0 * se && tv < 0.01;
  return {pass, "survivors=" + std::to_string(n) + " mean_gap/se=" + str(mean_gap / se) + " tv=" + str(tv) +
                    " expected_tv_from_sampling=" + str(floor)};
}

Verdict hierarchy_degeneracy() {
  const double mu = 5.98;
  const PhotonModel level1 = PhotonModel::compound_poisson(mu, 2.0);
  const PhotonModel wide = PhotonModel::hierarchy(mu, {2.0 / mu, 1e6 / mu});
  double sup = 0.0;
  for (int i = -1000; i <= 1000; ++i) {
    const double x = i * 0.01;
    sup = std::max(sup, std::abs(quadrature_pdf(level1, x) - quadrature_pdf(wide, x)));
  }

  const PhotonModel level2 = PhotonModel::hierarchy(mu, {2.0 / mu, 8.46 / mu});
  Rng rng(criterion_seed(9));
  const QuadratureSample data = sample_quadratures(level2, 25000, rng);
  HierarchyFitOptions options;
  options.fixed_a1 = 2.0;
  const FitResult fit = fit_hierarchy2(data, options);
  const double a2 = fit.model.mu() * fit.model.levels()[1];
  const double sigma_a2 = fit.sigma_levels.size() > 1 ? fit.sigma_levels[1] : 0.0;
  const bool round_trip = sigma_a2 > 0.0 && std::abs(a2 - 8.46) < 3.0 * sigma_a2;
  return {sup <= 1e-5 && round_trip, "sup_norm=" + str(sup) + " a2=" + str(a2) + "+-" + str(sigma_a2) +
                                         " level1_sufficient=" + str(fit.level1_sufficient.value_or(false))};
}

Verdict chi2_calibration() {
  const PhotonModel truth = PhotonModel::compound_poisson(3.034, 1.0);
  const std::uint64_t root = criterion_seed(10);
  std::vector<double> p_values;
  for (std::uint64_t run = 0; run < 200; ++run) {
    Rng rng(split_seed(root, run));
    p_values.push_back(chi2_test(sample_quadratures(truth, 2000, rng), truth, 0));
  }
  const double d = oracle::ks_statistic(p_values, [](double u) { return std::clamp(u, 0.0, 1.0); });
  const double p = oracle::ks_pvalue(d, p_values.size());
  return {p > 0.01, "ks_d=" + str(d) + " ks_p=" + str(p)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Verdict()> check;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "thermal g2 via the command line", 1.0, thermal_g2},
      {2, "subtraction closure over ten steps", 1.0, subtraction_closure},
      {3, "ln g11 of the ideal chain", 1.0, g11_theory},
      {4, "quadrature variance law", 10.0, [] { return moment_grid(false); }},
      {5, "excess kurtosis closed form", 10.0, [] { return moment_grid(true); }},
      {6, "reconstruction consistency", 600.0, reconstruction_consistency},
      {7, "full campaign", 900.0, full_campaign},
      {8, "Monte-Carlo and finite-p equivalence", 60.0, mc_equivalence},
      {9, "hierarchy degeneracy and round trip", 300.0, hierarchy_degeneracy},
      {10, "chi-squared calibration", 300.0, chi2_calibration},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict verdict{false, ""};
    try {
      verdict = c.check();
    } catch (const std::exception& e) {
      verdict = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds < c.budget_seconds;
    const bool pass = verdict.pass && in_time;
    if (!pass) ++failures;
    std::printf("%s [%2d] %s: %s (%.2f s, budget %.0f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                verdict.detail.c_str(), seconds, c.budget_seconds, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
