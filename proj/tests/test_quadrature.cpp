#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "oracles.hpp"
#include "photstat/errors.hpp"
#include "photstat/hermite.hpp"
#include "photstat/photon_stats.hpp"
#include "photstat/quadrature.hpp"
#include "photstat/random.hpp"

using namespace photstat;

namespace {

double closed_form_kurtosis(double mu, double a) {
  const double r = mu / (2.0 * mu + 1.0);
  return -6.0 * r * r * (a - 1.0) / a;
}

// Central moment of order 2 or 4 of the density by Gauss-Kronrod.
double density_moment(const PhotonModel& model, int order) {
  const double reach = integration_limit(truncation(model));
  return oracle::integrate([&](double x) { return std::pow(x, order) * quadrature_pdf(model, x); }, -reach, reach);
}

}  // namespace

TEST_CASE("Hermite function examples") {
  CHECK(hermite_fn(0, 0.0) == doctest::Approx(std::pow(std::numbers::pi, -0.25)).epsilon(1e-15));
  CHECK(hermite_fn(1, 0.0) == 0.0);
  CHECK_THROWS_AS(hermite_fn(kFockCeiling + 1, 0.0), RangeError);
  CHECK_THROWS_AS(hermite_fn(3, 250.0), DomainError);
}

TEST_CASE("Hermite functions agree with the explicit polynomial form") {
  for (int k : {0, 1, 2, 5, 12, 30, 60}) {
    for (double x : {-7.5, -2.0, -0.3, 0.0, 0.9, 3.3, 8.0}) {
      CHECK(hermite_fn(k, x) == doctest::Approx(oracle::hermite_function(k, x)).epsilon(1e-9).scale(1e-12));
    }
  }
  std::vector<double> all(41);
  hermite_fns(2.7, all);
  for (int k = 0; k <= 40; ++k) CHECK(all[static_cast<std::size_t>(k)] == doctest::Approx(hermite_fn(k, 2.7)).epsilon(1e-13));
}

TEST_CASE("Hermite functions are orthonormal") {
  for (int j = 0; j <= 30; j += 3) {
    for (int k = j; k <= 30; k += 4) {
      const double overlap = oracle::integrate([&](double x) { return hermite_fn(j, x) * hermite_fn(k, x); }, -14.0, 14.0);
      CHECK(std::abs(overlap - (j == k ? 1.0 : 0.0)) < 1e-8);
    }
  }
}

TEST_CASE("high-order Hermite functions stay normalized beyond the unscaled range") {
  for (int k : {900, 4000}) {
    const double turning = std::sqrt(2.0 * k + 1.0);
    const double norm = oracle::integrate(
        [&](double x) {
          const double phi = hermite_fn(k, x);
          return phi * phi;
        },
        0.0, turning + 10.0, 1.0 / std::sqrt(2.0 * k + 1.0));
    CHECK(2.0 * norm == doctest::Approx(1.0).epsilon(1e-7));
  }
}

TEST_CASE("thermal quadrature density is Gaussian") {
  const PhotonModel thermal = PhotonModel::compound_poisson(3.0, 1.0);
  for (double x = -12.0; x <= 12.0; x += 0.37) {
    CHECK(std::abs(quadrature_pdf(thermal, x) - oracle::gaussian_pdf(x, 3.5)) < 1e-6);
  }
  const PhotonModel vacuum_like = PhotonModel::compound_poisson(1e-3, 1.0);
  CHECK(std::abs(quadrature_pdf(vacuum_like, 0.2) - oracle::gaussian_pdf(0.2, 0.501)) < 1e-6);
}

TEST_CASE("quadrature density examples and symmetry") {
  CHECK(quadrature_pdf(PhotonModel::binomial_fock(1, 1.0), 0.0) == 0.0);
  const std::vector<double> level2{2.0, 8.46};
  const std::vector<PhotonModel> models{PhotonModel::compound_poisson(5.983, 1.605), PhotonModel::poisson(2.0),
                                        PhotonModel::binomial_fock(3, 2.2),
                                        PhotonModel::hierarchy_from_clusterization(5.98, level2)};
  for (const PhotonModel& model : models) {
    for (double x : {0.1, 1.7, 4.4, 9.0}) CHECK(quadrature_pdf(model, x) == quadrature_pdf(model, -x));
    const double reach = integration_limit(truncation(model));
    const double mass = oracle::integrate([&](double x) { return quadrature_pdf(model, x); }, -reach, reach);
    CHECK(mass <= 1.0 + 1e-12);
    CHECK(mass >= 1.0 - 1e-6);
  }
}

TEST_CASE("closed-form cdf matches adaptive Simpson integration") {
  const std::vector<PhotonModel> models{PhotonModel::compound_poisson(5.983, 1.605),
                                        PhotonModel::binomial_fock(2, 1.5), PhotonModel::poisson(9.0)};
  for (const PhotonModel& model : models) {
    const std::vector<double> table = pmf_table(model);
    const double reach = integration_limit(static_cast<int>(table.size()) - 1);
    for (double x : {-6.0, -1.3, 0.0, 0.4, 2.2, 7.1}) {
      const double simpson =
          oracle::adaptive_simpson([&](double t) { return quadrature_pdf(table, t); }, -reach, x, 1e-11);
      CHECK(std::abs(quadrature_cdf(table, x) - simpson) < 1e-9);
    }
    CHECK(quadrature_cdf(table, 0.0) == doctest::Approx(0.5 * std::accumulate(table.begin(), table.end(), 0.0)));
    for (double prob : {0.01, 0.3, 0.5, 0.77, 0.99}) {
      CHECK(quadrature_cdf(table, quadrature_quantile(table, prob)) == doctest::Approx(prob).epsilon(1e-10));
    }
  }
}

TEST_CASE("quadrature moment examples") {
  QuadratureMoments q = quadrature_moments(PhotonModel::compound_poisson(3.0, 1.0));
  CHECK(q.variance == 3.5);
  CHECK(q.skewness == 0.0);
  CHECK(q.excess_kurtosis == 0.0);
  CHECK(q.method == MomentMethod::ClosedForm);
  q = quadrature_moments(PhotonModel::compound_poisson(3.0, 2.0));
  CHECK(q.excess_kurtosis == doctest::Approx(-27.0 / 49.0).epsilon(1e-14));
  q = quadrature_moments(PhotonModel::poisson(3.0));
  CHECK(q.excess_kurtosis == doctest::Approx(-6.0 * 9.0 / 49.0).epsilon(1e-14));
  CHECK(quadrature_moments(PhotonModel::compound_poisson(3.0, 1e9)).excess_kurtosis ==
        doctest::Approx(-54.0 / 49.0).epsilon(1e-8));
  const std::vector<double> level2{2.0, 8.46};
  CHECK(quadrature_moments(PhotonModel::hierarchy_from_clusterization(5.98, level2)).method ==
        MomentMethod::NumericQuadrature);
}

TEST_CASE("variance law and kurtosis closed form against independent integration") {
  for (double mu : {1.0, 3.0, 10.0}) {
    for (double a : {0.5, 1.0, 2.0, 10.0}) {
      const PhotonModel model = PhotonModel::compound_poisson(mu, a);
      const double m2 = density_moment(model, 2);
      const double m4 = density_moment(model, 4);
      CHECK(std::abs(m2 - (mu + 0.5)) < 1e-7);
      CHECK(std::abs(m4 / (m2 * m2) - 3.0 - closed_form_kurtosis(mu, a)) < 1e-6);

      const NumericQuadratureIntegrals grid = integrate_quadrature_pdf(model);
      CHECK(std::abs(grid.variance - (mu + 0.5)) < 1e-5);
      CHECK(std::abs(grid.excess_kurtosis - closed_form_kurtosis(mu, a)) < 1e-4);
      CHECK(std::abs(grid.mean) < 1e-12);
    }
  }
  // the kurtosis law continues to a = -n
  const PhotonModel fock = PhotonModel::binomial_fock(3, 2.0);
  const double m2 = density_moment(fock, 2);
  CHECK(m2 == doctest::Approx(2.5).epsilon(1e-9));
  CHECK(density_moment(fock, 4) / (m2 * m2) - 3.0 == doctest::Approx(closed_form_kurtosis(2.0, -3.0)).epsilon(1e-8));
}

TEST_CASE("kurtosis sign follows the clusterization factor") {
  CHECK(quadrature_moments(PhotonModel::compound_poisson(2.0, 0.4)).excess_kurtosis > 0.0);
  CHECK(quadrature_moments(PhotonModel::compound_poisson(2.0, 1.0)).excess_kurtosis == 0.0);
  CHECK(quadrature_moments(PhotonModel::compound_poisson(2.0, 3.0)).excess_kurtosis < 0.0);
}

TEST_CASE("rejection envelope covers the density ratio") {
  for (int k : {0, 1, 2, 7, 30, 150, 600}) {
    const double envelope = rejection_envelope(k);
    const double var = k + 1.0;
    const double reach = std::sqrt(2.0 * k + 1.0) + 8.0;
    double worst = 0.0;
    for (double x = 0.0; x <= reach; x += 0.0021) {
      const double phi = hermite_fn(k, x);
      worst = std::max(worst, phi * phi / oracle::gaussian_pdf(x, var));
    }
    CHECK(envelope >= worst);
    CHECK(envelope < 1.5 * worst);
  }
}

TEST_CASE("sampler reproduces the variance law") {
  Rng rng(20240611);
  const PhotonModel source = PhotonModel::compound_poisson(3.034, 0.999);
  const QuadratureSample sample = sample_quadratures(source, 50000, rng);
  REQUIRE(sample.values.size() == 50000);
  CHECK(sample.source == source);
  const double m2 = source.mu() + 0.5;
  const double m4 = (3.0 + quadrature_moments(source).excess_kurtosis) * m2 * m2;
  const double se = std::sqrt((m4 - m2 * m2) / 50000.0);
  CHECK(std::abs(oracle::variance(sample.values) - m2) < 5.0 * se);
  CHECK(std::abs(oracle::mean(sample.values)) < 5.0 * std::sqrt(m2 / 50000.0));

  Rng fock_rng(7);
  const QuadratureSample fock = sample_quadratures(PhotonModel::binomial_fock(1, 1.0), 100000, fock_rng);
  std::vector<double> squares;
  for (double x : fock.values) squares.push_back(x * x);
  // <x^4> = 3/4 (2k^2 + 2k + 1) = 15/4 for k = 1
  CHECK(std::abs(oracle::mean(squares) - 1.5) < 5.0 * std::sqrt((3.75 - 2.25) / 100000.0));

  Rng one(1);
  const QuadratureSample single = sample_quadratures(PhotonModel::poisson(0.5), 1, one);
  REQUIRE(single.values.size() == 1);
  CHECK(std::isfinite(single.values[0]));
}

TEST_CASE("sampler passes a Kolmogorov-Smirnov test") {
  const std::vector<double> level2{2.0, 8.46};
  const std::vector<PhotonModel> models{PhotonModel::compound_poisson(5.983, 1.605),
                                        PhotonModel::hierarchy_from_clusterization(5.98, level2),
                                        PhotonModel::binomial_fock(2, 2.0)};
  std::uint64_t stream = 0;
  for (const PhotonModel& model : models) {
    Rng rng(split_seed(99, stream++));
    const QuadratureSample sample = sample_quadratures(model, 100000, rng);
    const std::vector<double> table = pmf_table(model);
    const double d = oracle::ks_statistic(sample.values, [&](double x) { return quadrature_cdf(table, x); });
    // 1% critical value 1.628 / sqrt(n)
    CHECK(d < 1.628 / std::sqrt(100000.0));

    std::vector<double> cubes;
    for (double x : sample.values) cubes.push_back(x * x * x);
    CHECK(std::abs(oracle::mean(cubes)) < 5.0 * std::sqrt(oracle::variance(cubes) / 100000.0));
  }
}

TEST_CASE("readings for given photon counts follow the Fock densities") {
  Rng rng(3);
  const std::vector<int> counts(40000, 4);
  const std::vector<double> xs = sample_quadratures_for_counts(counts, rng);
  std::vector<double> fock4(5, 0.0);
  fock4[4] = 1.0;
  const double d = oracle::ks_statistic(xs, [&](double x) { return quadrature_cdf(fock4, x); });
  CHECK(d < 1.628 / std::sqrt(40000.0));
  const std::vector<int> bad{1, -2};
  CHECK_THROWS_AS(sample_quadratures_for_counts(bad, rng), DomainError);
}

TEST_CASE("likelihood basis matches direct density evaluation") {
  const PhotonModel model = PhotonModel::compound_poisson(12.0, 3.0);
  const std::vector<double> xs{-40.0, -31.5, -8.0, -0.2, 0.0, 1.1, 6.5, 33.0};
  QuadratureBasis basis(xs);
  const std::vector<double> table = pmf_table(model);
  const std::vector<double> density = basis.density(table);
  double expected_ll = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double direct = quadrature_pdf(table, xs[i]);
    CHECK(density[i] == doctest::Approx(direct).epsilon(1e-10).scale(1e-300));
    expected_ll += std::log(std::max(direct, 1e-300));
  }
  CHECK(basis.log_likelihood(table) == doctest::Approx(expected_ll).epsilon(1e-12));
  const std::vector<double> bad{0.0, std::nan("")};
  CHECK_THROWS_AS(QuadratureBasis{bad}, DomainError);
}
