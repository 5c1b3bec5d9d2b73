#include "photstat/photon_model.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "photstat/errors.hpp"

namespace photstat {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

void require_mu(double mu) {
  if (!positive_finite(mu)) {
    std::ostringstream msg;
    msg << "mean photon number must be positive and finite, got " << mu;
    throw DomainError(msg.str());
  }
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::CompoundPoisson: return "compound_poisson";
    case ModelKind::Poisson: return "poisson";
    case ModelKind::BinomialFock: return "binomial_fock";
    case ModelKind::Hierarchy: return "hierarchy";
  }
  return "unknown";
}

PhotonModel::PhotonModel(ModelKind kind, double mu, std::optional<double> a, std::vector<double> levels)
    : kind_(kind), mu_(mu), a_(a), levels_(std::move(levels)) {}

PhotonModel PhotonModel::compound_poisson(double mu, double a) {
  require_mu(mu);
  if (!positive_finite(a)) {
    std::ostringstream msg;
    msg << "clusterization factor must be positive for a compound Poisson model, got " << a
        << " (negative values are only allowed as integers via binomial_fock)";
    throw DomainError(msg.str());
  }
  return PhotonModel(ModelKind::CompoundPoisson, mu, a, {});
}

PhotonModel PhotonModel::poisson(double mu) {
  require_mu(mu);
  return PhotonModel(ModelKind::Poisson, mu, std::nullopt, {});
}

PhotonModel PhotonModel::binomial_fock(int n, double mu) {
  if (n < 1) throw DomainError("binomial Fock model needs n >= 1, got " + std::to_string(n));
  require_mu(mu);
  if (mu > n) {
    std::ostringstream msg;
    msg << "binomial Fock model needs 0 < mu <= n, got mu=" << mu << " n=" << n;
    throw DomainError(msg.str());
  }
  return PhotonModel(ModelKind::BinomialFock, mu, -static_cast<double>(n), {});
}

PhotonModel PhotonModel::hierarchy(double mu, std::vector<double> levels) {
  require_mu(mu);
  if (levels.empty()) throw DomainError("hierarchy model needs at least one level");
  for (double b : levels) {
    if (!positive_finite(b)) {
      std::ostringstream msg;
      msg << "hierarchy level parameters must be positive and finite, got " << b;
      throw DomainError(msg.str());
    }
  }
  const double a1 = mu * levels.front();
  return PhotonModel(ModelKind::Hierarchy, mu, a1, std::move(levels));
}

PhotonModel PhotonModel::hierarchy_from_clusterization(double mu, std::span<const double> a_levels) {
  require_mu(mu);
  std::vector<double> levels;
  levels.reserve(a_levels.size());
  for (double a : a_levels) levels.push_back(a / mu);
  return hierarchy(mu, std::move(levels));
}

int PhotonModel::fock_n() const {
  if (kind_ != ModelKind::BinomialFock) throw UnsupportedKindError("fock_n() needs a binomial Fock model");
  return static_cast<int>(std::lround(-*a_));
}

PhotonModel PhotonModel::with_mu(double mu) const {
  switch (kind_) {
    case ModelKind::CompoundPoisson: return compound_poisson(mu, *a_);
    case ModelKind::Poisson: return poisson(mu);
    case ModelKind::BinomialFock: return binomial_fock(fock_n(), mu);
    case ModelKind::Hierarchy: {
      std::vector<double> a_levels;
      for (double b : levels_) a_levels.push_back(b * mu_);
      return hierarchy_from_clusterization(mu, a_levels);
    }
  }
  throw UnsupportedKindError("unknown model kind");
}

std::string PhotonModel::describe() const {
  std::ostringstream out;
  out.precision(10);
  switch (kind_) {
    case ModelKind::CompoundPoisson: out << "CompoundPoisson(mu=" << mu_ << ", a=" << *a_ << ")"; break;
    case ModelKind::Poisson: out << "Poisson(mu=" << mu_ << ")"; break;
    case ModelKind::BinomialFock: out << "BinomialFock(n=" << fock_n() << ", mu=" << mu_ << ")"; break;
    case ModelKind::Hierarchy: {
      out << "Hierarchy(mu=" << mu_ << ", a=[";
      for (std::size_t i = 0; i < levels_.size(); ++i) out << (i ? ", " : "") << levels_[i] * mu_;
      out << "])";
      break;
    }
  }
  return out.str();
}

}  // namespace photstat
