#include "photstat/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>

#include "photstat/errors.hpp"
#include "photstat/hermite.hpp"
#include "photstat/photon_stats.hpp"

namespace photstat {

namespace {

const double kPhi0 = std::pow(std::numbers::pi, -0.25);
constexpr double kUnscaledLimit = 30.0;
constexpr std::size_t kMaxCachedValues = std::size_t{1} << 24;
constexpr double kEnvelopeSafety = 1.05;
constexpr int kMaxRejectionTries = 1'000'000;
// Density floor used inside log-likelihoods so that a far outlier under a
// poor trial model yields a large finite penalty instead of -inf.
constexpr double kDensityFloor = 1e-300;

double mixture_at(std::span<const double> pmf, std::span<const double> phi) {
  double acc = 0.0;
  for (std::size_t k = 0; k < pmf.size(); ++k) acc += pmf[k] * phi[k] * phi[k];
  return acc;
}

// Lower-tail cdf F(-x) for x >= 0.
double lower_tail(std::span<const double> pmf, double x) {
  std::vector<double> phi(pmf.size());
  hermite_fns(x, phi);
  // tail[j] = sum_{k >= j} P(k)
  double tail = 0.0;
  double correction = 0.0;
  for (std::size_t j = pmf.size(); j-- > 1;) {
    tail += pmf[j];
    correction += tail * phi[j] * phi[j - 1] / std::sqrt(2.0 * static_cast<double>(j));
  }
  const double mass = tail + pmf[0];
  return mass * 0.5 * std::erfc(x) + correction;
}

struct EnvelopeCache {
  std::mutex mutex;
  std::vector<double> constants;
};

EnvelopeCache& envelope_cache() {
  static EnvelopeCache cache;
  return cache;
}

double proposal_density(int k, double x) {
  const double var = k + 1.0;
  return std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

void grow_envelopes(std::vector<double>& constants, int k_max) {
  const std::size_t old_size = constants.size();
  const std::size_t new_size = static_cast<std::size_t>(k_max) + 1;
  if (new_size <= old_size) return;
  // Recompute every order up to k_max on one grid fine enough for the
  // highest order; lower orders only get a finer grid than they need.
  const double h = std::numbers::pi / (40.0 * std::sqrt(2.0 * k_max + 2.0));
  const double upper = std::sqrt(2.0 * k_max + 1.0) + 8.0;
  std::vector<double> maxima(new_size, 0.0);
  std::vector<double> phi(new_size);
  for (double x = 0.0; x <= upper; x += h) {
    hermite_fns(x, phi);
    for (std::size_t k = 0; k < new_size; ++k) {
      const double ratio = phi[k] * phi[k] / proposal_density(static_cast<int>(k), x);
      maxima[k] = std::max(maxima[k], ratio);
    }
  }
  constants.resize(new_size);
  for (std::size_t k = old_size; k < new_size; ++k) constants[k] = kEnvelopeSafety * maxima[k];
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 64) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double quadrature_pdf(std::span<const double> pmf, double x) {
  std::vector<double> phi(pmf.size());
  hermite_fns(std::abs(x), phi);
  return mixture_at(pmf, phi);
}

double quadrature_pdf(const PhotonModel& model, double x) {
  const std::vector<double> table = pmf_table(model);
  return quadrature_pdf(table, x);
}

double quadrature_cdf(std::span<const double> pmf, double x) {
  if (std::isnan(x)) throw DomainError("quadrature cdf argument is NaN");
  if (x <= -kMaxAbsQuadrature) return 0.0;
  const double mass = std::accumulate(pmf.begin(), pmf.end(), 0.0);
  if (x >= kMaxAbsQuadrature) return mass;
  if (x <= 0.0) return std::clamp(lower_tail(pmf, -x), 0.0, mass);
  return std::clamp(mass - lower_tail(pmf, x), 0.0, mass);
}

double quadrature_cdf(const PhotonModel& model, double x) {
  const std::vector<double> table = pmf_table(model);
  return quadrature_cdf(table, x);
}

double quadrature_quantile(std::span<const double> pmf, double prob) {
  const double mass = std::accumulate(pmf.begin(), pmf.end(), 0.0);
  if (!(prob > 0.0 && prob < mass)) {
    std::ostringstream msg;
    msg << "quantile probability must lie in (0, " << mass << "), got " << prob;
    throw DomainError(msg.str());
  }
  const int cutoff = static_cast<int>(pmf.size()) - 1;
  double lo = -integration_limit(cutoff);
  double hi = integration_limit(cutoff);
  while (quadrature_cdf(pmf, lo) > prob) lo *= 2.0;
  while (quadrature_cdf(pmf, hi) < prob) hi *= 2.0;
  for (int iter = 0; iter < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(lo) + std::abs(hi)); ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (quadrature_cdf(pmf, mid) < prob) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double integration_limit(int cutoff) { return std::sqrt(2.0 * cutoff) + 6.0; }

NumericQuadratureIntegrals integrate_quadrature_pdf(const PhotonModel& model) {
  const std::vector<double> table = pmf_table(model);
  const int cutoff = static_cast<int>(table.size()) - 1;
  const double limit = integration_limit(cutoff);
  const double h = std::min(0.05, 0.25 / std::sqrt(2.0 * cutoff + 1.0));
  const auto steps = static_cast<long>(std::floor(limit / h));

  // The density is even, so integrate over x >= 0 and double; odd moments
  // of the symmetric grid vanish identically.
  std::vector<double> phi(table.size());
  double m0 = 0.0;
  double m2 = 0.0;
  double m4 = 0.0;
  for (long i = 0; i <= steps; ++i) {
    const double x = static_cast<double>(i) * h;
    hermite_fns(x, phi);
    const double weight = (i == 0 ? 1.0 : 2.0) * h * mixture_at(table, phi);
    const double x2 = x * x;
    m0 += weight;
    m2 += weight * x2;
    m4 += weight * x2 * x2;
  }
  const double variance = m2 / m0;
  const double fourth = m4 / m0;
  return {m0, 0.0, variance, 0.0, fourth / (variance * variance) - 3.0};
}

QuadratureMoments quadrature_moments(const PhotonModel& model) {
  const double mu = model.mu();
  const double ratio = mu / (2.0 * mu + 1.0);
  switch (model.kind()) {
    case ModelKind::Poisson:
      return {mu + 0.5, 0.0, -6.0 * ratio * ratio, MomentMethod::ClosedForm};
    case ModelKind::CompoundPoisson:
    case ModelKind::BinomialFock: {
      const double a = *model.a();
      return {mu + 0.5, 0.0, -6.0 * ratio * ratio * (a - 1.0) / a, MomentMethod::ClosedForm};
    }
    case ModelKind::Hierarchy: {
      const NumericQuadratureIntegrals integrals = integrate_quadrature_pdf(model);
      return {integrals.variance, integrals.skewness, integrals.excess_kurtosis, MomentMethod::NumericQuadrature};
    }
  }
  throw UnsupportedKindError("unknown model kind");
}

double rejection_envelope(int k) {
  if (k < 0 || k > kFockCeiling) throw RangeError("rejection envelope order out of range");
  EnvelopeCache& cache = envelope_cache();
  std::lock_guard lock(cache.mutex);
  grow_envelopes(cache.constants, k);
  return cache.constants[static_cast<std::size_t>(k)];
}

QuadratureSampler::QuadratureSampler(const PhotonModel& model) : model_(model) {
  const std::vector<double> table = pmf_table(model);
  cumulative_.resize(table.size());
  std::partial_sum(table.begin(), table.end(), cumulative_.begin());
  rejection_envelope(static_cast<int>(table.size()) - 1);
}

int QuadratureSampler::sample_photons(Rng& rng) const {
  const double u = rng.uniform() * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return static_cast<int>(std::min<std::ptrdiff_t>(it - cumulative_.begin(),
                                                   static_cast<std::ptrdiff_t>(cumulative_.size()) - 1));
}

double sample_fock_quadrature(int k, Rng& rng) {
  if (k < 0) throw DomainError("photon count must be nonnegative");
  const double envelope = rejection_envelope(k);
  const double sigma = std::sqrt(k + 1.0);
  std::vector<double> phi(static_cast<std::size_t>(k) + 1);
  for (int attempt = 0; attempt < kMaxRejectionTries; ++attempt) {
    const double x = sigma * rng.normal();
    if (std::abs(x) > kMaxAbsQuadrature) continue;
    hermite_fns(x, phi);
    const double ratio = phi.back() * phi.back() / proposal_density(k, x);
    if (ratio > envelope) {
      std::ostringstream msg;
      msg << "rejection envelope for Fock level " << k << " does not cover the target at x=" << x;
      throw InternalError(msg.str());
    }
    if (rng.uniform() * envelope < ratio) return x;
  }
  throw InternalError("rejection sampler for Fock level " + std::to_string(k) + " failed to accept");
}

double QuadratureSampler::sample_given_photons(int k, Rng& rng) const { return sample_fock_quadrature(k, rng); }

double QuadratureSampler::operator()(Rng& rng) { return sample_given_photons(sample_photons(rng), rng); }

QuadratureSample sample_quadratures(const PhotonModel& model, std::size_t count, Rng& rng) {
  if (count < 1) throw DomainError("sample count must be positive");
  QuadratureSampler sampler(model);
  QuadratureSample sample;
  sample.values.reserve(count);
  for (std::size_t i = 0; i < count; ++i) sample.values.push_back(sampler(rng));
  sample.source = model;
  sample.seed = rng.seed();
  return sample;
}

std::vector<double> sample_quadratures_for_counts(std::span<const int> counts, Rng& rng) {
  if (counts.empty()) return {};
  const int k_max = *std::max_element(counts.begin(), counts.end());
  if (*std::min_element(counts.begin(), counts.end()) < 0) throw DomainError("photon counts must be nonnegative");
  rejection_envelope(k_max);
  std::vector<double> out;
  out.reserve(counts.size());
  for (int k : counts) out.push_back(sample_fock_quadrature(k, rng));
  return out;
}

QuadratureBasis::QuadratureBasis(std::span<const double> xs) : xs_(xs.begin(), xs.end()) {
  for (std::size_t i = 0; i < xs_.size(); ++i) {
    if (!std::isfinite(xs_[i]) || std::abs(xs_[i]) > kMaxAbsQuadrature) {
      throw DomainError("quadrature sample contains a non-finite or out-of-range value");
    }
    if (std::abs(xs_[i]) > kUnscaledLimit) far_.push_back(i);
  }
}

void QuadratureBasis::extend(std::size_t orders) {
  const std::size_t n = xs_.size();
  if (orders <= orders_) return;
  squares_.resize(orders * n);
  if (orders_ == 0) {
    phi_prev_.assign(n, 0.0);
    phi_cur_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      phi_cur_[i] = std::abs(xs_[i]) > kUnscaledLimit ? 0.0 : kPhi0 * std::exp(-0.5 * xs_[i] * xs_[i]);
      squares_[i] = phi_cur_[i] * phi_cur_[i];
    }
    orders_ = 1;
  }
  for (std::size_t k = orders_; k < orders; ++k) {
    const double kk = static_cast<double>(k - 1);
    const double c1 = std::sqrt(2.0 / (kk + 1.0));
    const double c2 = std::sqrt(kk / (kk + 1.0));
    double* column = squares_.data() + k * n;
    for (std::size_t i = 0; i < n; ++i) {
      const double next = xs_[i] * c1 * phi_cur_[i] - c2 * phi_prev_[i];
      phi_prev_[i] = phi_cur_[i];
      phi_cur_[i] = next;
      column[i] = next * next;
    }
  }
  orders_ = orders;
}

void QuadratureBasis::density_streaming(std::span<const double> pmf, std::span<double> out) const {
  std::vector<double> phi(pmf.size());
  for (std::size_t i = 0; i < xs_.size(); ++i) {
    hermite_fns(std::abs(xs_[i]), phi);
    out[i] = mixture_at(pmf, phi);
  }
}

std::vector<double> QuadratureBasis::density(std::span<const double> pmf) {
  const std::size_t n = xs_.size();
  std::vector<double> out(n, 0.0);
  if (pmf.size() * n > kMaxCachedValues) {
    density_streaming(pmf, out);
    return out;
  }
  extend(pmf.size());
  for (std::size_t k = 0; k < pmf.size(); ++k) {
    const double weight = pmf[k];
    const double* column = squares_.data() + k * n;
    for (std::size_t i = 0; i < n; ++i) out[i] += weight * column[i];
  }
  // Far points were zeroed in the cached columns; evaluate them with the
  // rescaled recurrence.
  std::vector<double> phi(pmf.size());
  for (std::size_t i : far_) {
    hermite_fns(std::abs(xs_[i]), phi);
    out[i] = mixture_at(pmf, phi);
  }
  return out;
}

double QuadratureBasis::log_likelihood(std::span<const double> pmf) {
  std::vector<double> values = density(pmf);
  for (double& v : values) v = std::log(std::max(v, kDensityFloor));
  return pairwise_sum(values);
}

}  // namespace photstat
