#include "photstat/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>

#include "photstat/photon_stats.hpp"
#include "photstat/random.hpp"
#include "photstat/simplex.hpp"

namespace photstat {

namespace {

constexpr std::size_t kMinMomentSamples = 30;
constexpr std::size_t kMinFitSamples = 100;
constexpr std::size_t kMinHierarchySamples = 1000;
constexpr int kBootstrapResamples = 200;
constexpr std::uint64_t kBootstrapSeed = 0x5eedULL;
constexpr double kHessianStep = 1e-4;
constexpr double kBoundaryTolerance = 1e-3;
// 5% critical value of 0.5 chi2_0 + 0.5 chi2_1 (the 90% point of chi2_1).
constexpr double kLevel2Critical = 2.705543454095404;

// Natural parameters of a model: (mu, a) for CompoundPoisson, (mu) for
// Poisson and BinomialFock, (mu, a_1, ..., a_r) for a hierarchy.
std::vector<double> model_parameters(const PhotonModel& model) {
  std::vector<double> params{model.mu()};
  switch (model.kind()) {
    case ModelKind::CompoundPoisson: params.push_back(*model.a()); break;
    case ModelKind::Hierarchy:
      for (double b : model.levels()) params.push_back(b * model.mu());
      break;
    default: break;
  }
  return params;
}

PhotonModel rebuild(const PhotonModel& shape, const std::vector<double>& params) {
  switch (shape.kind()) {
    case ModelKind::CompoundPoisson: return PhotonModel::compound_poisson(params[0], params[1]);
    case ModelKind::Hierarchy:
      return PhotonModel::hierarchy_from_clusterization(params[0], std::span(params).subspan(1));
    default: return shape.with_mu(params[0]);
  }
}

class LikelihoodSurface {
 public:
  explicit LikelihoodSurface(std::span<const double> values) : basis_(values) {}

  double log_likelihood(const PhotonModel& model) {
    const std::vector<double> table = pmf_table(model);
    return basis_.log_likelihood(table);
  }

  // -ln L, +inf for parameters the model rejects.
  double negative(const PhotonModel& shape, const std::vector<double>& params) {
    try {
      return -log_likelihood(rebuild(shape, params));
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  }

  std::size_t size() const { return basis_.size(); }

 private:
  QuadratureBasis basis_;
};

struct Box {
  std::vector<double> lower;
  std::vector<double> upper;
};

struct CoreFit {
  std::vector<double> params;
  double log_likelihood;
  int evaluations;
  bool converged;
};

// Simplex over log of the free parameters, restarted once from a perturbed
// copy of the first optimum; the better of the two runs is kept.
CoreFit fit_core(LikelihoodSurface& surface, const PhotonModel& shape, std::vector<double> start,
                 const std::vector<bool>& free, const Box& box, int max_evaluations) {
  std::vector<std::size_t> index;
  for (std::size_t j = 0; j < free.size(); ++j) {
    if (free[j]) index.push_back(j);
  }
  for (std::size_t j = 0; j < start.size(); ++j) start[j] = std::clamp(start[j], box.lower[j], box.upper[j]);

  auto expand = [&](const std::vector<double>& log_free) {
    std::vector<double> params = start;
    for (std::size_t i = 0; i < index.size(); ++i) params[index[i]] = std::exp(log_free[i]);
    return params;
  };
  auto objective = [&](const std::vector<double>& log_free) { return surface.negative(shape, expand(log_free)); };

  std::vector<double> x0, lo, hi, step;
  for (std::size_t j : index) {
    x0.push_back(std::log(start[j]));
    lo.push_back(std::log(box.lower[j]));
    hi.push_back(std::log(box.upper[j]));
    step.push_back(0.1);
  }

  SimplexOptions options;
  options.max_evaluations = max_evaluations;
  SimplexResult first = nelder_mead(objective, x0, step, lo, hi, options);

  if (first.evaluations >= max_evaluations) return {expand(first.x), -first.value, first.evaluations, false};

  std::vector<double> perturbed = first.x;
  for (std::size_t i = 0; i < perturbed.size(); ++i) perturbed[i] += (i % 2 == 0 ? 0.02 : -0.02);
  std::vector<double> half_step(step.size(), 0.05);
  options.max_evaluations = std::max(1, max_evaluations - first.evaluations);
  SimplexResult second = nelder_mead(objective, perturbed, half_step, lo, hi, options);

  const int evaluations = first.evaluations + second.evaluations;
  const SimplexResult& best = second.value < first.value ? second : first;
  return {expand(best.x), -best.value, evaluations, first.converged && second.converged};
}

bool near_bound(const std::vector<double>& params, const std::vector<bool>& free, const Box& box) {
  for (std::size_t j = 0; j < params.size(); ++j) {
    if (!free[j]) continue;
    const double lp = std::log(params[j]);
    if (std::abs(lp - std::log(box.lower[j])) < kBoundaryTolerance ||
        std::abs(lp - std::log(box.upper[j])) < kBoundaryTolerance) {
      return true;
    }
  }
  return false;
}

// Inverse observed Fisher information restricted to the free parameters;
// empty when the Hessian is not positive definite.
std::optional<std::vector<double>> hessian_errors(LikelihoodSurface& surface, const PhotonModel& shape,
                                                  const std::vector<double>& params, const std::vector<bool>& free) {
  std::vector<std::size_t> index;
  for (std::size_t j = 0; j < free.size(); ++j) {
    if (free[j]) index.push_back(j);
  }
  const auto dim = static_cast<Eigen::Index>(index.size());
  std::vector<double> h(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) h[i] = kHessianStep * std::abs(params[index[i]]);

  auto f_at = [&](std::initializer_list<std::pair<std::size_t, double>> shifts) {
    std::vector<double> p = params;
    for (const auto& [i, s] : shifts) p[index[i]] += s;
    return surface.negative(shape, p);
  };

  const double f0 = surface.negative(shape, params);
  Eigen::MatrixXd hessian(dim, dim);
  for (std::size_t i = 0; i < index.size(); ++i) {
    const double fp = f_at({{i, h[i]}});
    const double fm = f_at({{i, -h[i]}});
    hessian(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
    for (std::size_t j = 0; j < i; ++j) {
      const double fpp = f_at({{i, h[i]}, {j, h[j]}});
      const double fpm = f_at({{i, h[i]}, {j, -h[j]}});
      const double fmp = f_at({{i, -h[i]}, {j, h[j]}});
      const double fmm = f_at({{i, -h[i]}, {j, -h[j]}});
      const double value = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
      hessian(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = value;
      hessian(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = value;
    }
  }
  if (!hessian.allFinite()) return std::nullopt;
  const Eigen::LLT<Eigen::MatrixXd> llt(hessian);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const Eigen::MatrixXd covariance = llt.solve(Eigen::MatrixXd::Identity(dim, dim));

  std::vector<double> sigmas(params.size(), 0.0);
  for (std::size_t i = 0; i < index.size(); ++i) {
    const double var = covariance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    if (!(var > 0.0) || !std::isfinite(var)) return std::nullopt;
    sigmas[index[i]] = std::sqrt(var);
  }
  return sigmas;
}

Box default_box(const PhotonModel& shape) {
  Box box{{kMinMu}, {kMaxMu}};
  switch (shape.kind()) {
    case ModelKind::CompoundPoisson:
      box.lower.push_back(kMinA);
      box.upper.push_back(kMaxA);
      break;
    case ModelKind::Hierarchy:
      for (std::size_t level = 0; level < shape.levels().size(); ++level) {
        box.lower.push_back(level == 0 ? kMinA : kMinA2);
        box.upper.push_back(level == 0 ? kMaxA : kMaxA2);
      }
      break;
    default: break;
  }
  return box;
}

std::vector<double> resample(std::span<const double> values, Rng& rng) {
  std::vector<double> out(values.size());
  for (double& v : out) {
    auto index = static_cast<std::size_t>(rng.uniform() * static_cast<double>(values.size()));
    v = values[std::min(index, values.size() - 1)];
  }
  return out;
}

std::vector<double> sample_std(const std::vector<std::vector<double>>& draws, std::size_t dim) {
  std::vector<double> sigmas(dim, 0.0);
  if (draws.size() < 2) return sigmas;
  for (std::size_t j = 0; j < dim; ++j) {
    double mean = 0.0;
    for (const auto& d : draws) mean += d[j];
    mean /= static_cast<double>(draws.size());
    double ss = 0.0;
    for (const auto& d : draws) ss += (d[j] - mean) * (d[j] - mean);
    sigmas[j] = std::sqrt(ss / static_cast<double>(draws.size() - 1));
  }
  return sigmas;
}

std::vector<double> bootstrap_errors(std::span<const double> values, const PhotonModel& model,
                                     const std::vector<bool>& free) {
  Rng rng(kBootstrapSeed);
  const std::vector<double> params = model_parameters(model);
  const Box box = default_box(model);
  std::vector<std::vector<double>> draws;
  for (int r = 0; r < kBootstrapResamples; ++r) {
    const std::vector<double> data = resample(values, rng);
    LikelihoodSurface surface(data);
    draws.push_back(fit_core(surface, model, params, free, box, 2000).params);
  }
  std::vector<double> sigmas = sample_std(draws, params.size());
  for (std::size_t j = 0; j < free.size(); ++j) {
    if (!free[j]) sigmas[j] = 0.0;
  }
  return sigmas;
}

ParameterErrors errors_with_fallback(LikelihoodSurface& surface, std::span<const double> values,
                                     const PhotonModel& model, const std::vector<bool>& free) {
  if (auto sigmas = hessian_errors(surface, model, model_parameters(model), free)) {
    return {std::move(*sigmas), ErrorMethod::FisherInformation};
  }
  return {bootstrap_errors(values, model, free), ErrorMethod::Bootstrap};
}

// pmf of a model on 0..cutoff, beyond its own table where needed.
std::vector<double> pmf_up_to(const PhotonModel& model, int cutoff) {
  if (model.kind() == ModelKind::Hierarchy) return pgf_taylor(model, 0.0, cutoff + 1);
  std::vector<double> table(static_cast<std::size_t>(cutoff) + 1);
  for (int k = 0; k <= cutoff; ++k) table[static_cast<std::size_t>(k)] = pmf(model, k);
  return table;
}

void require_samples(const QuadratureSample& samples, std::size_t minimum, const char* what) {
  if (samples.values.size() < minimum) {
    std::ostringstream msg;
    msg << what << " needs at least " << minimum << " samples, got " << samples.values.size();
    throw InsufficientDataError(msg.str());
  }
}

}  // namespace

std::string to_string(FitMethod method) {
  switch (method) {
    case FitMethod::MomentsOnly: return "moments_only";
    case FitMethod::MaxLikelihood: return "max_likelihood";
    case FitMethod::HierarchyLevel2: return "hierarchy_level2";
  }
  return "unknown";
}

std::string to_string(ErrorMethod method) {
  switch (method) {
    case ErrorMethod::None: return "none";
    case ErrorMethod::FisherInformation: return "fisher_information";
    case ErrorMethod::Bootstrap: return "bootstrap";
  }
  return "unknown";
}

MomentEstimate method_of_moments(double variance, double excess_kurtosis) {
  if (!(variance > 0.5)) {
    std::ostringstream msg;
    msg << "sample variance " << variance << " is not above the vacuum level 1/2";
    throw SubVacuumError(msg.str());
  }
  const double mu = variance - 0.5;
  const double six_mu2 = 6.0 * mu * mu;
  const double a = six_mu2 / (six_mu2 + excess_kurtosis * (2.0 * mu + 1.0) * (2.0 * mu + 1.0));
  return {mu, a, variance, excess_kurtosis};
}

MomentEstimate method_of_moments(const QuadratureSample& samples) {
  require_samples(samples, kMinMomentSamples, "method of moments");
  const std::vector<double>& x = samples.values;
  const double n = static_cast<double>(x.size());
  const double mean = pairwise_sum(x) / n;
  std::vector<double> d2(x.size());
  std::vector<double> d4(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - mean;
    d2[i] = d * d;
    d4[i] = d2[i] * d2[i];
  }
  const double m2 = pairwise_sum(d2) / n;
  const double m4 = pairwise_sum(d4) / n;
  if (!(m2 > 0.5)) {
    std::ostringstream msg;
    msg << "sample variance " << m2 << " is not above the vacuum level 1/2";
    throw SubVacuumError(msg.str());
  }
  return method_of_moments(m2, m4 / (m2 * m2) - 3.0);
}

FitResult fit_moments(const QuadratureSample& samples, std::uint64_t bootstrap_seed) {
  const MomentEstimate estimate = method_of_moments(samples);
  if (!(estimate.a_hat > 0.0) || !std::isfinite(estimate.a_hat)) {
    std::ostringstream msg;
    msg << "moment estimate a=" << estimate.a_hat << " lies outside the compound Poisson family";
    throw DomainError(msg.str());
  }
  const PhotonModel model = PhotonModel::compound_poisson(estimate.mu_hat, estimate.a_hat);

  Rng rng(bootstrap_seed);
  std::vector<std::vector<double>> draws;
  for (int r = 0; r < kBootstrapResamples; ++r) {
    QuadratureSample boot{resample(samples.values, rng), std::nullopt, std::nullopt};
    try {
      const MomentEstimate e = method_of_moments(boot);
      draws.push_back({e.mu_hat, e.a_hat});
    } catch (const SubVacuumError&) {
    }
  }
  const std::vector<double> sigmas = sample_std(draws, 2);

  FitResult result(model);
  result.sigma_mu = sigmas[0];
  result.sigma_a = sigmas[1];
  result.log_likelihood = log_likelihood(samples, model);
  result.sample_size = samples.values.size();
  result.method = FitMethod::MomentsOnly;
  result.error_method = ErrorMethod::Bootstrap;
  if (samples.values.size() >= kMinFitSamples) result.chi2_significance = chi2_test(samples, model, 2);
  return result;
}

double log_likelihood(const QuadratureSample& samples, const PhotonModel& model) {
  QuadratureBasis basis(samples.values);
  const std::vector<double> table = pmf_table(model);
  return basis.log_likelihood(table);
}

FitResult mle_fit(const QuadratureSample& samples, const MleOptions& options) {
  require_samples(samples, kMinFitSamples, "maximum likelihood fit");
  std::pair<double, double> start;
  if (options.init) {
    start = *options.init;
  } else {
    const MomentEstimate estimate = method_of_moments(samples);
    const double a = (estimate.a_hat > 0.0 && std::isfinite(estimate.a_hat)) ? estimate.a_hat : kMaxA;
    start = {estimate.mu_hat, a};
  }
  start.first = std::clamp(start.first, kMinMu, kMaxMu);
  start.second = std::clamp(start.second, kMinA, kMaxA);

  const PhotonModel shape = PhotonModel::compound_poisson(start.first, start.second);
  const Box box = default_box(shape);
  const std::vector<bool> free{true, true};
  LikelihoodSurface surface(samples.values);
  const CoreFit core = fit_core(surface, shape, {start.first, start.second}, free, box, options.max_evaluations);

  FitResult result(rebuild(shape, core.params));
  result.log_likelihood = core.log_likelihood;
  result.sample_size = samples.values.size();
  result.method = FitMethod::MaxLikelihood;
  result.converged = core.converged;
  result.evaluations = core.evaluations;
  result.boundary_pinned = near_bound(core.params, free, box);

  if (!options.estimate_only) {
    const ParameterErrors errors = errors_with_fallback(surface, samples.values, result.model, free);
    result.sigma_mu = errors.sigmas[0];
    result.sigma_a = errors.sigmas[1];
    result.error_method = errors.method;
    result.chi2_significance = chi2_test(samples, result.model, 2);
    if (options.reference) result.fidelity_vs_reference = fidelity(result.model, *options.reference);
  }
  if (!core.converged) {
    throw NonConvergenceError("maximum likelihood fit did not converge within " +
                                  std::to_string(options.max_evaluations) + " evaluations",
                              result);
  }
  return result;
}

ParameterErrors fisher_errors(const QuadratureSample& samples, const PhotonModel& model) {
  LikelihoodSurface surface(samples.values);
  const std::vector<bool> free(model_parameters(model).size(), true);
  return errors_with_fallback(surface, samples.values, model, free);
}

Chi2Result chi2_details(const QuadratureSample& samples, const PhotonModel& model, int fitted_parameters) {
  require_samples(samples, kMinFitSamples, "chi-squared test");
  if (fitted_parameters < 0) throw DomainError("number of fitted parameters must be nonnegative");
  const std::vector<double> table = pmf_table(model);
  const double mass = std::accumulate(table.begin(), table.end(), 0.0);
  const std::size_t n = samples.values.size();
  const int bins = static_cast<int>(std::min<std::size_t>(100, std::max<std::size_t>(10, n / 50)));

  std::vector<double> edges;  // interior edges
  for (int j = 1; j < bins; ++j) edges.push_back(quadrature_quantile(table, mass * j / bins));

  std::vector<double> sorted = samples.values;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> observed;
  std::vector<double> expected;
  double previous_cdf = 0.0;
  std::size_t previous_count = 0;
  for (int j = 0; j < bins; ++j) {
    const bool last = j == bins - 1;
    const double cdf = last ? mass : quadrature_cdf(table, edges[static_cast<std::size_t>(j)]);
    const std::size_t count =
        last ? n
             : static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), edges[static_cast<std::size_t>(j)]) -
                                        sorted.begin());
    observed.push_back(static_cast<double>(count - previous_count));
    expected.push_back(static_cast<double>(n) * (cdf - previous_cdf) / mass);
    previous_cdf = cdf;
    previous_count = count;
  }

  // Merge neighbours until every expected count reaches 5.
  std::vector<double> merged_o;
  std::vector<double> merged_e;
  double acc_o = 0.0;
  double acc_e = 0.0;
  for (std::size_t j = 0; j < expected.size(); ++j) {
    acc_o += observed[j];
    acc_e += expected[j];
    if (acc_e >= 5.0) {
      merged_o.push_back(acc_o);
      merged_e.push_back(acc_e);
      acc_o = acc_e = 0.0;
    }
  }
  if (acc_e > 0.0 || acc_o > 0.0) {
    if (merged_e.empty()) throw BinningError("too few expected counts for any chi-squared bin");
    merged_o.back() += acc_o;
    merged_e.back() += acc_e;
  }
  if (*std::min_element(merged_e.begin(), merged_e.end()) < 5.0) {
    throw BinningError("expected bin count below 5 after merging");
  }

  Chi2Result result;
  result.bins = static_cast<int>(merged_e.size());
  result.degrees_of_freedom = result.bins - 1 - fitted_parameters;
  if (result.degrees_of_freedom < 1) throw BinningError("no degrees of freedom left for the chi-squared test");
  for (std::size_t j = 0; j < merged_e.size(); ++j) {
    const double d = merged_o[j] - merged_e[j];
    result.statistic += d * d / merged_e[j];
  }
  result.significance = boost::math::gamma_q(0.5 * result.degrees_of_freedom, 0.5 * result.statistic);
  return result;
}

double chi2_test(const QuadratureSample& samples, const PhotonModel& model, int fitted_parameters) {
  return chi2_details(samples, model, fitted_parameters).significance;
}

double fidelity(const PhotonModel& first, const PhotonModel& second) {
  const int cutoff = std::max(truncation(first), truncation(second));
  const std::vector<double> p = pmf_up_to(first, cutoff);
  const std::vector<double> q = pmf_up_to(second, cutoff);
  const double mass_p = std::accumulate(p.begin(), p.end(), 0.0);
  const double mass_q = std::accumulate(q.begin(), q.end(), 0.0);
  if (mass_p < 1.0 - 1e-6 || mass_q < 1.0 - 1e-6) {
    throw TruncationError("fidelity support loses more than 1e-6 of probability mass");
  }
  double overlap = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) overlap += std::sqrt(p[k] * q[k]);
  return std::clamp(overlap * overlap / (mass_p * mass_q), 0.0, 1.0);
}

FitResult fit_hierarchy2(const QuadratureSample& samples, const HierarchyFitOptions& options) {
  require_samples(samples, kMinHierarchySamples, "hierarchy fit");
  if (options.fixed_a1 && !(*options.fixed_a1 > 0.0)) throw DomainError("fixed a_1 must be positive");

  MleOptions level1_options;
  level1_options.reference = options.reference;
  const FitResult level1 = mle_fit(samples, level1_options);

  const double mu0 = level1.model.mu();
  const double a1 = options.fixed_a1.value_or(*level1.model.a());
  const std::vector<double> a_start{a1, kMaxA2};
  const PhotonModel shape = PhotonModel::hierarchy_from_clusterization(mu0, a_start);
  const Box box = default_box(shape);
  LikelihoodSurface surface(samples.values);

  const bool a1_free = !options.fixed_a1.has_value();
  const std::vector<bool> free_all{true, a1_free, true};
  const std::vector<bool> free_pinned{true, a1_free, false};

  const CoreFit pinned = fit_core(surface, shape, {mu0, a1, kMaxA2}, free_pinned, box, options.max_evaluations);
  CoreFit full = fit_core(surface, shape, {mu0, a1, 5.0 * std::max(a1, 1.0)}, free_all, box, options.max_evaluations);
  if (pinned.log_likelihood > full.log_likelihood) {
    // The pinned optimum is a point of the full space; never report worse.
    const CoreFit retry = fit_core(surface, shape, pinned.params, free_all, box, options.max_evaluations);
    if (retry.log_likelihood > full.log_likelihood) full = retry;
  }

  const double statistic = 2.0 * (full.log_likelihood - pinned.log_likelihood);
  const bool at_upper = std::abs(std::log(full.params[2]) - std::log(kMaxA2)) < kBoundaryTolerance;
  const bool level1_sufficient = at_upper || statistic < kLevel2Critical;
  const CoreFit& chosen = level1_sufficient ? pinned : full;
  const std::vector<bool>& free = level1_sufficient ? free_pinned : free_all;

  FitResult result(rebuild(shape, chosen.params));
  result.log_likelihood = chosen.log_likelihood;
  result.sample_size = samples.values.size();
  result.method = FitMethod::HierarchyLevel2;
  result.converged = chosen.converged;
  result.evaluations = pinned.evaluations + full.evaluations;
  result.boundary_pinned = level1_sufficient || near_bound(chosen.params, free, box);
  result.level1_sufficient = level1_sufficient;
  result.level1_chi2_significance = level1.chi2_significance;
  result.level1_log_likelihood = level1.log_likelihood;

  const ParameterErrors errors = errors_with_fallback(surface, samples.values, result.model, free);
  result.sigma_mu = errors.sigmas[0];
  result.sigma_a = errors.sigmas[1];
  result.sigma_levels.assign(errors.sigmas.begin() + 1, errors.sigmas.end());
  result.error_method = errors.method;
  const int fitted = static_cast<int>(std::count(free.begin(), free.end(), true));
  result.chi2_significance = chi2_test(samples, result.model, fitted);
  if (options.reference) result.fidelity_vs_reference = fidelity(result.model, *options.reference);

  if (!chosen.converged) {
    throw NonConvergenceError("hierarchy fit did not converge within " + std::to_string(options.max_evaluations) +
                                  " evaluations",
                              result);
  }
  return result;
}

}  // namespace photstat
