#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "photstat/errors.hpp"
#include "photstat/io.hpp"

using namespace photstat;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "photstat_test_io";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(format_number(2.0) == "2.0");
  CHECK(format_number(0.0) == "0.0");
  CHECK(format_number(-0.0) == "0.0");
  CHECK(format_number(0.1875) == "0.1875");
  CHECK(format_number(1e-300) == "1e-300");
  CHECK(format_number(0.1 + 0.2) == "0.30000000000000004");
}

TEST_CASE("model JSON round trip") {
  const std::vector<PhotonModel> models{PhotonModel::compound_poisson(3.0, 1.0), PhotonModel::poisson(2.5),
                                        PhotonModel::binomial_fock(3, 1.2),
                                        PhotonModel::hierarchy(5.98, {2.0 / 5.98, 8.46 / 5.98})};
  for (const PhotonModel& model : models) {
    CHECK(model_from_json(model_to_json(model)) == model);
    CHECK(model_from_json(model_to_json(model, 2)) == model);
  }
  CHECK(model_to_json(PhotonModel::compound_poisson(3.0, 1.0)) == R"({"a":1.0,"kind":"compound_poisson","mu":3.0})");
}

TEST_CASE("model JSON rejections") {
  CHECK_THROWS_AS(model_from_json(R"({"kind":"compound_poisson","mu":3,"a":1,"colour":2})"), FormatError);
  CHECK_THROWS_AS(model_from_json(R"({"kind":"compound_poisson","mu":3})"), FormatError);
  CHECK_THROWS_AS(model_from_json(R"({"kind":"squeezed","mu":3})"), FormatError);
  CHECK_THROWS_AS(model_from_json(R"({"kind":"poisson","mu":"3"})"), FormatError);
  CHECK_THROWS_AS(model_from_json(R"({"kind":"poisson","mu":3,"a":1})"), FormatError);
  CHECK_THROWS_AS(model_from_json("{"), FormatError);
  CHECK_THROWS_AS(model_from_json(R"({"kind":"binomial_fock","mu":1,"a":-1.5})"), DomainError);
  CHECK_THROWS_AS(model_from_json(R"({"kind":"compound_poisson","mu":-3,"a":1})"), DomainError);
  CHECK_THROWS_AS(model_from_json(R"({"kind":"hierarchy","mu":2,"a":5,"levels":[1.0]})"), DomainError);
  CHECK(model_from_json(R"({"kind":"hierarchy","mu":2,"a":2,"levels":[1.0]})") == PhotonModel::hierarchy(2.0, {1.0}));
}

TEST_CASE("samples CSV") {
  std::istringstream good("x\n1.5\n-0.25\n\n3\n");
  CHECK(parse_samples_csv(good).values == std::vector<double>{1.5, -0.25, 3.0});

  std::istringstream empty("");
  CHECK_THROWS_AS(parse_samples_csv(empty), FormatError);
  std::istringstream header_only("x\n");
  CHECK_THROWS_AS(parse_samples_csv(header_only), FormatError);
  std::istringstream wrong_header("value\n1\n");
  CHECK_THROWS_AS(parse_samples_csv(wrong_header), FormatError);
  std::istringstream junk("x\n1\nabc\n");
  CHECK_THROWS_AS(parse_samples_csv(junk), FormatError);
  std::istringstream not_finite("x\n1\ninf\n");
  CHECK_THROWS_AS(parse_samples_csv(not_finite), FormatError);
}

TEST_CASE("samples files with a sidecar") {
  const auto path = scratch("samples.csv");
  std::filesystem::remove(sidecar_path(path));
  QuadratureSample sample{{0.1, -2.0, 3.25}, PhotonModel::compound_poisson(3.0, 1.0), 42};
  write_samples(path, sample);
  const QuadratureSample back = read_samples(path);
  CHECK(back.values == sample.values);
  CHECK(*back.source == *sample.source);
  CHECK(*back.seed == 42);

  {
    std::ofstream side(sidecar_path(path));
    side << R"({"seed": 1, "origin": "lab"})";
  }
  CHECK_THROWS_AS(read_samples(path), FormatError);
  std::filesystem::remove(sidecar_path(path));
  CHECK_FALSE(read_samples(path).seed.has_value());
  CHECK_THROWS_AS(read_samples(scratch("missing.csv")), FormatError);
}

TEST_CASE("photon counts") {
  std::istringstream in("0\n3\n\n12\n");
  const std::vector<int> counts = read_counts(in);
  CHECK(counts == std::vector<int>{0, 3, 12});
  std::ostringstream out;
  write_counts(out, counts);
  CHECK(out.str() == "0\n3\n12\n");
  std::istringstream negative("1\n-2\n");
  CHECK_THROWS_AS(read_counts(negative), FormatError);
}

TEST_CASE("fit JSON carries every field") {
  FitResult fit(PhotonModel::compound_poisson(3.0, 1.0));
  fit.sample_size = 100;
  const std::string text = fit_to_json(fit);
  for (const char* key : {"model", "sigma_mu", "sigma_a", "log_likelihood", "chi2_significance", "fidelity_vs_reference",
                          "sample_size", "method", "error_method", "converged", "boundary_pinned", "evaluations"}) {
    CHECK(text.find(std::string("\"") + key + "\"") != std::string::npos);
  }
  CHECK(text.find("level1_sufficient") == std::string::npos);
}
