#include "photstat/hermite.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "photstat/errors.hpp"
#include "photstat/photon_stats.hpp"

namespace photstat {

namespace {

// pi^{-1/4}
const double kPhi0 = std::pow(std::numbers::pi, -0.25);

constexpr double kRescaleAbove = 1e150;
// Below this |x| the unscaled recurrence never leaves the normal range.
constexpr double kUnscaledLimit = 30.0;

void check_x(double x) {
  if (!(std::abs(x) <= kMaxAbsQuadrature)) {
    std::ostringstream msg;
    msg << "quadrature value must satisfy |x| <= " << kMaxAbsQuadrature << ", got " << x;
    throw DomainError(msg.str());
  }
}

}  // namespace

void hermite_fns(double x, std::span<double> out) {
  check_x(x);
  if (out.empty()) return;
  if (out.size() > static_cast<std::size_t>(kFockCeiling) + 1) {
    throw RangeError("Hermite function order above " + std::to_string(kFockCeiling) + " requested");
  }

  if (std::abs(x) <= kUnscaledLimit) {
    double prev = 0.0;
    double cur = kPhi0 * std::exp(-0.5 * x * x);
    out[0] = cur;
    for (std::size_t k = 0; k + 1 < out.size(); ++k) {
      const double kk = static_cast<double>(k);
      const double next = x * std::sqrt(2.0 / (kk + 1.0)) * cur - std::sqrt(kk / (kk + 1.0)) * prev;
      prev = cur;
      cur = next;
      out[k + 1] = cur;
    }
    return;
  }

  // value = cur * exp(log_scale)
  double log_scale = -0.5 * x * x;
  double prev = 0.0;
  double cur = kPhi0;
  out[0] = std::exp(log_scale) * cur;
  for (std::size_t k = 0; k + 1 < out.size(); ++k) {
    const double kk = static_cast<double>(k);
    const double next = x * std::sqrt(2.0 / (kk + 1.0)) * cur - std::sqrt(kk / (kk + 1.0)) * prev;
    prev = cur;
    cur = next;
    if (std::abs(cur) > kRescaleAbove) {
      cur /= kRescaleAbove;
      prev /= kRescaleAbove;
      log_scale += std::log(kRescaleAbove);
    }
    out[k + 1] = cur * std::exp(log_scale);
  }
}

double hermite_fn(int k, double x) {
  if (k < 0) throw DomainError("Hermite function order must be nonnegative");
  if (k > kFockCeiling) {
    throw RangeError("Hermite function order " + std::to_string(k) + " exceeds " + std::to_string(kFockCeiling));
  }
  std::vector<double> values(static_cast<std::size_t>(k) + 1);
  hermite_fns(x, values);
  return values.back();
}

}  // namespace photstat
