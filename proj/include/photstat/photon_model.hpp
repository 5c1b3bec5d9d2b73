#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace photstat {

enum class ModelKind { CompoundPoisson, Poisson, BinomialFock, Hierarchy };

std::string to_string(ModelKind kind);

/// A photon-number distribution.
///
/// * CompoundPoisson(mu, a): gamma-mixed Poisson (negative binomial) with
///   mean mu and clusterization factor a > 0. a = 1 is the thermal state.
/// * Poisson(mu): the a -> infinity limit (coherent light).
/// * BinomialFock(n, mu): the same generating function continued to a = -n,
///   i.e. an n-photon Fock state after loss with survival mu / n.
/// * Hierarchy(mu, b_1..b_r): nested gamma mixing of the mean. The level-r
///   PGF is exp(-mu L_r) with L_0 = 1 - z and
///   L_{i+1} = b_{i+1} ln(1 + L_i / b_{i+1}). a() reports a_1 = mu b_1.
///
/// Values are immutable and validated on construction.
class PhotonModel {
 public:
  static PhotonModel compound_poisson(double mu, double a);
  static PhotonModel poisson(double mu);
  static PhotonModel binomial_fock(int n, double mu);
  static PhotonModel hierarchy(double mu, std::vector<double> levels);
  /// Level-r hierarchy from clusterization factors a_i = mu b_i.
  static PhotonModel hierarchy_from_clusterization(double mu, std::span<const double> a_levels);

  ModelKind kind() const { return kind_; }
  double mu() const { return mu_; }
  /// Clusterization factor; empty for Poisson.
  std::optional<double> a() const { return a_; }
  /// Photon count n of a BinomialFock model.
  int fock_n() const;
  std::span<const double> levels() const { return levels_; }

  /// Same kind and shape parameters with a different mean. For a hierarchy
  /// the clusterization factors a_i are held fixed.
  PhotonModel with_mu(double mu) const;

  bool operator==(const PhotonModel&) const = default;

  std::string describe() const;

 private:
  PhotonModel(ModelKind kind, double mu, std::optional<double> a, std::vector<double> levels);

  ModelKind kind_;
  double mu_;
  std::optional<double> a_;
  std::vector<double> levels_;
};

}  // namespace photstat
