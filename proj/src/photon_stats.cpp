#include "photstat/photon_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/negative_binomial.hpp>
#include <boost/math/distributions/poisson.hpp>

#include "photstat/errors.hpp"

namespace photstat {

namespace {

void require_unit_interval(double z) {
  if (!(std::abs(z) <= 1.0)) {
    std::ostringstream msg;
    msg << "PGF argument must satisfy |z| <= 1, got " << z;
    throw DomainError(msg.str());
  }
}

// ln (a)_k for a > 0 without the cancellation of lgamma(a + k) - lgamma(a)
// at large a.
double log_rising_positive(double a, int k) {
  if (k <= 64) {
    double acc = 0.0;
    for (int j = 0; j < k; ++j) acc += std::log(a + j);
    return acc;
  }
  return std::lgamma(a + k) - std::lgamma(a);
}

double compound_poisson_log_pmf(double mu, double a, int k) {
  return log_rising_positive(a, k) - std::lgamma(k + 1.0) + k * (std::log(mu) - std::log(mu + a)) -
         a * std::log1p(mu / a);
}

// Ratio recurrence from P(0) for small k; keeps exact binary fractions
// exact (thermal pmf at integer mu). Log-gamma form otherwise.
double compound_poisson_pmf(double mu, double a, int k) {
  const double log_p0 = -a * std::log1p(mu / a);
  if (k <= 64 && log_p0 > -700.0) {
    double p = a <= 64.0 ? std::pow(a / (mu + a), a) : std::exp(log_p0);
    const double ratio = mu / (mu + a);
    for (int j = 1; j <= k; ++j) p *= (a + j - 1) / j * ratio;
    if (p >= std::numeric_limits<double>::min()) return p;
  }
  return std::exp(compound_poisson_log_pmf(mu, a, k));
}

double poisson_pmf(double mu, int k) { return std::exp(k * std::log(mu) - mu - std::lgamma(k + 1.0)); }

double binomial_pmf(int n, double theta, int k) {
  if (k > n) return 0.0;
  if (theta == 1.0) return k == n ? 1.0 : 0.0;
  const double log_choose = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  return std::exp(log_choose + k * std::log(theta) + (n - k) * std::log1p(-theta));
}

// Smallest K in [0, kFockCeiling] with survival(K) < kTailMass.
template <class Survival>
int search_cutoff(Survival survival, const PhotonModel& model) {
  if (!(survival(kFockCeiling) < kTailMass)) {
    throw TruncationError("Fock-space cutoff for " + model.describe() + " exceeds the ceiling of " +
                          std::to_string(kFockCeiling));
  }
  int lo = -1;  // survival(lo) >= tail (virtual at -1)
  int hi = kFockCeiling;
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    if (survival(mid) < kTailMass) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

// Taylor coefficients of exp(-mu L_r(z0 + h)) in h for the hierarchy
// recurrence L_0 = 1 - z, L_{i+1} = b ln(1 + L_i / b). All series
// manipulations are exact recurrences on truncated power series.
std::vector<double> hierarchy_series(double mu, std::span<const double> levels, double z0, int terms) {
  std::vector<double> L(static_cast<std::size_t>(terms), 0.0);
  L[0] = 1.0 - z0;
  if (terms > 1) L[1] = -1.0;

  std::vector<double> f(L.size());
  std::vector<double> g(L.size());
  for (double b : levels) {
    for (std::size_t j = 0; j < L.size(); ++j) f[j] = L[j] / b;
    const double f0 = 1.0 + f[0];
    g[0] = std::log1p(f[0]);
    for (std::size_t k = 1; k < L.size(); ++k) {
      double acc = static_cast<double>(k) * f[k];
      for (std::size_t j = 1; j < k; ++j) acc -= static_cast<double>(j) * g[j] * f[k - j];
      g[k] = acc / (static_cast<double>(k) * f0);
    }
    for (std::size_t j = 0; j < L.size(); ++j) L[j] = b * g[j];
  }

  // exp of H = -mu L
  std::vector<double> e(L.size(), 0.0);
  e[0] = std::exp(-mu * L[0]);
  for (std::size_t k = 1; k < L.size(); ++k) {
    double acc = 0.0;
    for (std::size_t j = 1; j <= k; ++j) acc += static_cast<double>(j) * (-mu * L[j]) * e[k - j];
    e[k] = acc / static_cast<double>(k);
  }
  return e;
}

struct HierarchyTable {
  std::vector<double> pmf;  // P(0..K)
};

HierarchyTable hierarchy_pmf_table(const PhotonModel& model) {
  const double mu = model.mu();
  const double sd = std::sqrt(moments(model).variance);
  int terms = std::max(64, static_cast<int>(std::ceil(mu + 12.0 * sd)) + 1);
  while (true) {
    terms = std::min(terms, kFockCeiling + 1);
    std::vector<double> coeffs = hierarchy_series(mu, model.levels(), 0.0, terms);
    if (!(coeffs[0] > 0.0)) throw RangeError("P(0) underflows for " + model.describe());
    double cumulative = 0.0;
    for (int k = 0; k < terms; ++k) {
      cumulative += coeffs[static_cast<std::size_t>(k)];
      if (1.0 - cumulative < kTailMass) {
        coeffs.resize(static_cast<std::size_t>(k) + 1);
        return {std::move(coeffs)};
      }
    }
    if (terms == kFockCeiling + 1) {
      throw TruncationError("Fock-space cutoff for " + model.describe() + " exceeds the ceiling of " +
                            std::to_string(kFockCeiling));
    }
    terms *= 2;
  }
}

}  // namespace

int truncation(const PhotonModel& model) {
  switch (model.kind()) {
    case ModelKind::Poisson: {
      const boost::math::poisson_distribution<double> dist(model.mu());
      return search_cutoff([&](int k) { return boost::math::cdf(boost::math::complement(dist, static_cast<double>(k))); },
                           model);
    }
    case ModelKind::CompoundPoisson: {
      const double a = *model.a();
      const boost::math::negative_binomial_distribution<double> dist(a, a / (a + model.mu()));
      return search_cutoff([&](int k) { return boost::math::cdf(boost::math::complement(dist, static_cast<double>(k))); },
                           model);
    }
    case ModelKind::BinomialFock:
      return model.fock_n();
    case ModelKind::Hierarchy:
      return static_cast<int>(hierarchy_pmf_table(model).pmf.size()) - 1;
  }
  throw UnsupportedKindError("unknown model kind");
}

double pmf(const PhotonModel& model, int k) {
  if (k < 0) throw DomainError("photon count must be nonnegative, got " + std::to_string(k));
  switch (model.kind()) {
    case ModelKind::CompoundPoisson: return compound_poisson_pmf(model.mu(), *model.a(), k);
    case ModelKind::Poisson: return poisson_pmf(model.mu(), k);
    case ModelKind::BinomialFock: {
      const int n = model.fock_n();
      return binomial_pmf(n, model.mu() / n, k);
    }
    case ModelKind::Hierarchy: {
      const HierarchyTable table = hierarchy_pmf_table(model);
      if (static_cast<std::size_t>(k) >= table.pmf.size()) {
        throw TruncationError("P(" + std::to_string(k) + ") requested beyond the computed cutoff " +
                              std::to_string(table.pmf.size() - 1) + " of " + model.describe());
      }
      return table.pmf[static_cast<std::size_t>(k)];
    }
  }
  throw UnsupportedKindError("unknown model kind");
}

std::vector<double> pmf_table(const PhotonModel& model) {
  if (model.kind() == ModelKind::Hierarchy) return hierarchy_pmf_table(model).pmf;
  const int cutoff = truncation(model);
  std::vector<double> table(static_cast<std::size_t>(cutoff) + 1);
  for (int k = 0; k <= cutoff; ++k) table[static_cast<std::size_t>(k)] = pmf(model, k);
  return table;
}

double pgf_eval(const PhotonModel& model, double z) {
  require_unit_interval(z);
  const double mu = model.mu();
  switch (model.kind()) {
    case ModelKind::CompoundPoisson: {
      const double a = *model.a();
      return std::exp(-a * std::log1p(mu * (1.0 - z) / a));
    }
    case ModelKind::Poisson: return std::exp(-mu * (1.0 - z));
    case ModelKind::BinomialFock: {
      const int n = model.fock_n();
      return std::pow(1.0 - (mu / n) * (1.0 - z), n);
    }
    case ModelKind::Hierarchy: {
      double L = 1.0 - z;
      for (double b : model.levels()) L = b * std::log1p(L / b);
      return std::exp(-mu * L);
    }
  }
  throw UnsupportedKindError("unknown model kind");
}

std::vector<double> pgf_taylor(const PhotonModel& model, double z0, int terms) {
  require_unit_interval(z0);
  if (terms < 1) throw DomainError("pgf_taylor needs at least one term");
  const double mu = model.mu();
  std::vector<double> c(static_cast<std::size_t>(terms), 0.0);
  switch (model.kind()) {
    case ModelKind::Poisson: {
      c[0] = std::exp(-mu * (1.0 - z0));
      for (int j = 1; j < terms; ++j) c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j) - 1] * mu / j;
      return c;
    }
    case ModelKind::CompoundPoisson:
    case ModelKind::BinomialFock: {
      // (base - (mu/a) h)^{-a} = base^{-a} (1 - q h)^{-a}, q = mu / (a base)
      const double a = *model.a();
      const double base = 1.0 + mu * (1.0 - z0) / a;
      const double q = mu / (a * base);
      c[0] = std::pow(base, -a);
      for (int j = 1; j < terms; ++j) {
        c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j) - 1] * (a + j - 1) / j * q;
      }
      return c;
    }
    case ModelKind::Hierarchy: return hierarchy_series(mu, model.levels(), z0, terms);
  }
  throw UnsupportedKindError("unknown model kind");
}

double log_rising_factorial(double a, int m) {
  if (m < 0 || m > kMaxRisingOrder) {
    throw RangeError("rising factorial order must be in [0, " + std::to_string(kMaxRisingOrder) + "], got " +
                     std::to_string(m));
  }
  double acc = 0.0;
  for (int j = 0; j < m; ++j) acc += std::log(std::abs(a + j));
  return acc;
}

double rising_factorial(double a, int m) {
  const double magnitude = std::exp(log_rising_factorial(a, m));
  int negatives = 0;
  for (int j = 0; j < m; ++j) {
    if (a + j == 0.0) return 0.0;
    if (a + j < 0.0) ++negatives;
  }
  return (negatives % 2 == 0) ? magnitude : -magnitude;
}

double pgf_derivative(const PhotonModel& model, int order, double z) {
  if (order < 1) throw DomainError("derivative order must be >= 1, got " + std::to_string(order));
  require_unit_interval(z);
  const double mu = model.mu();
  double value = 0.0;
  switch (model.kind()) {
    case ModelKind::CompoundPoisson: {
      const double a = *model.a();
      value = std::exp(log_rising_factorial(a, order) + order * std::log(mu / a) -
                       (a + order) * std::log1p(mu * (1.0 - z) / a));
      break;
    }
    case ModelKind::Poisson:
      value = std::exp(order * std::log(mu) - mu * (1.0 - z));
      break;
    case ModelKind::BinomialFock: {
      const int n = model.fock_n();
      if (order > n) return 0.0;
      const double theta = mu / n;
      value = std::exp(std::lgamma(n + 1.0) - std::lgamma(n - order + 1.0) + order * std::log(theta)) *
              std::pow(1.0 - theta * (1.0 - z), n - order);
      break;
    }
    case ModelKind::Hierarchy: {
      if (order > 170) throw RangeError("hierarchy PGF derivative order above 170 overflows the factorial");
      const std::vector<double> c = pgf_taylor(model, z, order + 1);
      value = c[static_cast<std::size_t>(order)] * std::tgamma(order + 1.0);
      break;
    }
  }
  if (!std::isfinite(value)) {
    throw RangeError("PGF derivative of order " + std::to_string(order) + " overflows for " + model.describe());
  }
  return value;
}

double autocorrelation(const PhotonModel& model, int m) {
  if (m < 2) throw DomainError("autocorrelation order must be >= 2, got " + std::to_string(m));
  switch (model.kind()) {
    case ModelKind::Poisson: return 1.0;
    case ModelKind::CompoundPoisson:
    case ModelKind::BinomialFock: {
      if (m > kMaxRisingOrder) {
        throw RangeError("autocorrelation order above " + std::to_string(kMaxRisingOrder) + " is not supported");
      }
      // (a)_m / a^m = prod_j (1 + j / a)
      const double a = *model.a();
      double g = 1.0;
      for (int j = 1; j < m; ++j) g *= 1.0 + j / a;
      if (!std::isfinite(g)) throw RangeError("autocorrelation overflows for " + model.describe());
      return std::max(g, 0.0);
    }
    case ModelKind::Hierarchy: return autocorrelation_from_pgf(model, m);
  }
  throw UnsupportedKindError("unknown model kind");
}

double autocorrelation_from_pgf(const PhotonModel& model, int m) {
  if (m < 2) throw DomainError("autocorrelation order must be >= 2, got " + std::to_string(m));
  return pgf_derivative(model, m, 1.0) / std::pow(model.mu(), m);
}

CorrelationReport correlation_report(const PhotonModel& model, int max_order) {
  CorrelationReport report;
  for (int m = 2; m <= max_order; ++m) {
    const double g = autocorrelation(model, m);
    if (!(g > 0.0)) {
      throw DomainError("g^(" + std::to_string(m) + ") vanishes for " + model.describe() + "; ln g is undefined");
    }
    report.orders.push_back(m);
    report.g_values.push_back(g);
    report.log_g_values.push_back(std::log(g));
    report.sigma_log_g.push_back(0.0);
  }
  return report;
}

PhotonModel apply_loss(const PhotonModel& model, double t) {
  if (!(t > 0.0 && t <= 1.0)) {
    std::ostringstream msg;
    msg << "transmission must lie in (0, 1], got " << t;
    throw DomainError(msg.str());
  }
  if (t == 1.0) return model;
  return model.with_mu(model.mu() * t);
}

PhotonMoments moments(const PhotonModel& model) {
  const double mu = model.mu();
  switch (model.kind()) {
    case ModelKind::Poisson: return {mu, mu};
    case ModelKind::CompoundPoisson:
    case ModelKind::BinomialFock: return {mu, mu * (1.0 + mu / *model.a())};
    case ModelKind::Hierarchy: {
      const std::vector<double> c = pgf_taylor(model, 1.0, 3);
      return {mu, 2.0 * c[2] + mu - mu * mu};
    }
  }
  throw UnsupportedKindError("unknown model kind");
}

}  // namespace photstat
