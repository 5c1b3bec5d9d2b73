#include "photstat/subtraction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "photstat/errors.hpp"

namespace photstat {

namespace {

void require_reflection(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    std::ostringstream msg;
    msg << "reflection probability must lie in (0, 1), got " << p;
    throw DomainError(msg.str());
  }
}

// ln g^(j) of the negative-binomial family, g^(0) = g^(1) = 1.
double log_g(double a, int j) {
  double acc = 0.0;
  for (int i = 1; i < j; ++i) acc += std::log1p(i / a);
  return acc;
}

}  // namespace

SubtractionRecord subtract_analytic(const PhotonModel& model, int m) {
  if (m < 1) throw DomainError("number of subtracted photons must be >= 1, got " + std::to_string(m));
  const double mu = model.mu();
  std::vector<double> step_means;
  step_means.reserve(static_cast<std::size_t>(m));

  switch (model.kind()) {
    case ModelKind::Poisson: {
      step_means.assign(static_cast<std::size_t>(m), mu);
      return {model, m, std::nullopt, std::move(step_means), model, std::nullopt};
    }
    case ModelKind::CompoundPoisson: {
      const double a = *model.a();
      for (int k = 1; k <= m; ++k) step_means.push_back(mu * (a + k) / a);
      const PhotonModel result = PhotonModel::compound_poisson(step_means.back(), a + m);
      return {model, m, std::nullopt, std::move(step_means), result, std::nullopt};
    }
    case ModelKind::BinomialFock: {
      const int n = model.fock_n();
      if (m >= n) {
        throw ImpossibleSubtractionError("cannot subtract " + std::to_string(m) + " photons from " +
                                         model.describe() + " (at most n - 1 leaves a nonvacuum state)");
      }
      const double theta = mu / n;
      for (int k = 1; k <= m; ++k) step_means.push_back(theta * (n - k));
      const PhotonModel result = PhotonModel::binomial_fock(n - m, step_means.back());
      return {model, m, std::nullopt, std::move(step_means), result, std::nullopt};
    }
    case ModelKind::Hierarchy:
      throw UnsupportedKindError("analytic subtraction closure is only available for the level-1 family, not " +
                                 model.describe());
  }
  throw UnsupportedKindError("unknown model kind");
}

FiniteSubtraction::FiniteSubtraction(PhotonModel source, double p) : source_(std::move(source)), p_(p) {
  require_reflection(p);
  const double mu = source_.mu();
  switch (source_.kind()) {
    case ModelKind::Poisson:
      closed_form_ = PhotonModel::poisson(mu * (1.0 - p));
      break;
    case ModelKind::CompoundPoisson: {
      const double a = *source_.a();
      closed_form_ = PhotonModel::compound_poisson((a + 1.0) * (1.0 - p) * (mu / a) / (1.0 + mu * p / a), a + 1.0);
      break;
    }
    case ModelKind::BinomialFock: {
      const int n = source_.fock_n();
      if (n >= 2) {
        const double a = -static_cast<double>(n);
        closed_form_ = PhotonModel::binomial_fock(n - 1, (a + 1.0) * (1.0 - p) * (mu / a) / (1.0 + mu * p / a));
      }
      break;
    }
    case ModelKind::Hierarchy:
      break;
  }
}

double FiniteSubtraction::pgf(double z) const {
  if (!(std::abs(z) <= 1.0)) throw DomainError("PGF argument must satisfy |z| <= 1");
  return pgf_derivative(source_, 1, z * (1.0 - p_)) / pgf_derivative(source_, 1, 1.0 - p_);
}

double FiniteSubtraction::mean() const {
  if (closed_form_) return closed_form_->mu();
  if (source_.kind() == ModelKind::BinomialFock) return 0.0;  // single photon -> vacuum
  return (1.0 - p_) * pgf_derivative(source_, 2, 1.0 - p_) / pgf_derivative(source_, 1, 1.0 - p_);
}

double FiniteSubtraction::acceptance() const { return p_ * pgf_derivative(source_, 1, 1.0 - p_); }

FiniteSubtraction subtract_finite_p(const PhotonModel& model, double p) { return FiniteSubtraction(model, p); }

SubtractionRecord subtract_finite_chain(const PhotonModel& model, int m, double p) {
  if (m < 1) throw DomainError("number of subtracted photons must be >= 1, got " + std::to_string(m));
  require_reflection(p);
  if (model.kind() == ModelKind::Hierarchy) {
    throw UnsupportedKindError("finite-p subtraction has no closed form for " + model.describe());
  }
  PhotonModel current = model;
  std::vector<double> step_means;
  for (int k = 1; k <= m; ++k) {
    if (current.kind() == ModelKind::BinomialFock && current.fock_n() < 2) {
      throw ImpossibleSubtractionError("cannot subtract " + std::to_string(m) + " photons from " + model.describe() +
                                       " (at most n - 1 leaves a nonvacuum state)");
    }
    const FiniteSubtraction step(current, p);
    current = *step.closed_form();
    step_means.push_back(current.mu());
  }
  return {model, m, p, std::move(step_means), current, std::nullopt};
}

McSubtraction mc_subtract(std::span<const int> samples, double p, Rng& rng) {
  require_reflection(p);
  McSubtraction out;
  if (samples.empty()) {
    out.empty_input = true;
    return out;
  }
  for (int k : samples) {
    if (k < 0) throw DomainError("photon counts must be nonnegative");
    int reflected = 0;
    for (int j = 0; j < k && reflected < 2; ++j) {
      if (rng.bernoulli(p)) ++reflected;
    }
    if (reflected == 1) out.surviving.push_back(k - 1);
  }
  out.acceptance = static_cast<double>(out.surviving.size()) / static_cast<double>(samples.size());
  return out;
}

McChain mc_subtract_chain(std::span<const int> samples, double p, int passes, Rng& rng) {
  if (passes < 1) throw DomainError("number of passes must be >= 1");
  McChain chain;
  chain.surviving.assign(samples.begin(), samples.end());
  for (int pass = 0; pass < passes; ++pass) {
    McSubtraction step = mc_subtract(chain.surviving, p, rng);
    chain.acceptance.push_back(step.acceptance);
    chain.surviving = std::move(step.surviving);
  }
  return chain;
}

std::vector<int> sample_photon_counts(const PhotonModel& model, std::size_t count, Rng& rng) {
  const std::vector<double> table = pmf_table(model);
  std::vector<double> cumulative(table.size());
  std::partial_sum(table.begin(), table.end(), cumulative.begin());
  const int last = static_cast<int>(cumulative.size()) - 1;
  std::vector<int> counts;
  counts.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double u = rng.uniform() * cumulative.back();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    counts.push_back(std::min(static_cast<int>(it - cumulative.begin()), last));
  }
  return counts;
}

CorrelationReport autocorr_from_means(double mu0, std::span<const double> step_means) {
  const std::vector<double> zeros(step_means.size(), 0.0);
  return autocorr_from_means(mu0, step_means, 0.0, zeros);
}

CorrelationReport autocorr_from_means(double mu0, std::span<const double> step_means, double sigma_mu0,
                                      std::span<const double> step_sigmas) {
  if (!(mu0 > 0.0)) throw DomainError("mean photon numbers must be positive");
  if (step_sigmas.size() != step_means.size()) throw DomainError("one standard deviation per step mean is required");
  if (sigma_mu0 < 0.0) throw DomainError("standard deviations must be nonnegative");
  for (std::size_t i = 0; i < step_means.size(); ++i) {
    if (!(step_means[i] > 0.0)) throw DomainError("mean photon numbers must be positive");
    if (step_sigmas[i] < 0.0) throw DomainError("standard deviations must be nonnegative");
  }

  CorrelationReport report;
  const double log_mu0 = std::log(mu0);
  const double rel0 = sigma_mu0 / mu0;
  double log_product = 0.0;
  double ratio_product = 1.0;
  double var_steps = 0.0;
  for (std::size_t i = 0; i < step_means.size(); ++i) {
    const int order = static_cast<int>(i) + 2;
    log_product += std::log(step_means[i]);
    const double rel = step_sigmas[i] / step_means[i];
    var_steps += rel * rel;
    const double log_g = log_product - (order - 1) * log_mu0;
    report.orders.push_back(order);
    report.log_g_values.push_back(log_g);
    ratio_product *= step_means[i] / mu0;
    const bool representable = std::isfinite(ratio_product) && ratio_product > 0.0;
    report.g_values.push_back(representable ? ratio_product : std::exp(log_g));
    report.sigma_log_g.push_back(std::sqrt(var_steps + (order - 1.0) * (order - 1.0) * rel0 * rel0));
  }
  return report;
}

std::vector<double> autocorr_recurrence(double mu0, std::span<const double> step_means) {
  if (!(mu0 > 0.0)) throw DomainError("mean photon numbers must be positive");
  std::vector<double> g;
  double current = 1.0;
  for (double mean : step_means) {
    if (!(mean > 0.0)) throw DomainError("mean photon numbers must be positive");
    current *= mean / mu0;
    g.push_back(current);
  }
  return g;
}

double conditional_autocorr(const PhotonModel& model, int m, int n) {
  if (m < 0) throw DomainError("number of subtracted photons must be >= 0");
  if (n < 2) throw DomainError("correlation order must be >= 2");
  if (m + n > kMaxRisingOrder) {
    throw RangeError("conditional correlation needs (a)_k with k = m + n <= " + std::to_string(kMaxRisingOrder));
  }
  switch (model.kind()) {
    case ModelKind::Poisson: return 1.0;
    case ModelKind::CompoundPoisson: {
      const double a = *model.a();
      return std::exp(log_g(a, m + n) + (n - 1) * log_g(a, m) - n * log_g(a, m + 1));
    }
    default:
      throw UnsupportedKindError("conditional correlations are provided for the compound Poisson family, not " +
                                 model.describe());
  }
}

}  // namespace photstat
