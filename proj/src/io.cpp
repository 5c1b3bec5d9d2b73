#include "photstat/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "photstat/errors.hpp"

namespace photstat {

using nlohmann::json;

namespace {

json model_json(const PhotonModel& model) {
  json out = {{"kind", to_string(model.kind())}, {"mu", model.mu()}};
  if (model.a()) out["a"] = *model.a();
  if (model.kind() == ModelKind::Hierarchy) out["levels"] = std::vector<double>(model.levels().begin(), model.levels().end());
  return out;
}

double number_field(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw FormatError(std::string("model JSON is missing \"") + key + "\"");
  if (!it->is_number()) throw FormatError(std::string("model field \"") + key + "\" must be a number");
  return it->get<double>();
}

PhotonModel model_from(const json& obj) {
  if (!obj.is_object()) throw FormatError("model JSON must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (key != "kind" && key != "mu" && key != "a" && key != "levels") {
      throw FormatError("unknown model field \"" + key + "\"");
    }
  }
  const auto kind_it = obj.find("kind");
  if (kind_it == obj.end() || !kind_it->is_string()) throw FormatError("model JSON needs a string \"kind\"");
  const std::string kind = kind_it->get<std::string>();
  const double mu = number_field(obj, "mu");
  const bool has_a = obj.contains("a");
  const bool has_levels = obj.contains("levels");

  if (kind == "compound_poisson") {
    if (has_levels) throw FormatError("\"levels\" only applies to a hierarchy");
    return PhotonModel::compound_poisson(mu, number_field(obj, "a"));
  }
  if (kind == "poisson") {
    if (has_levels || has_a) throw FormatError("a Poisson model takes only \"mu\"");
    return PhotonModel::poisson(mu);
  }
  if (kind == "binomial_fock") {
    if (has_levels) throw FormatError("\"levels\" only applies to a hierarchy");
    const double a = number_field(obj, "a");
    if (!(a < 0.0) || a != std::floor(a) || a < -1e9) {
      throw DomainError("binomial_fock needs a = -n for a positive integer n");
    }
    return PhotonModel::binomial_fock(static_cast<int>(-a), mu);
  }
  if (kind == "hierarchy") {
    const auto it = obj.find("levels");
    if (it == obj.end() || !it->is_array()) throw FormatError("a hierarchy needs a \"levels\" array");
    std::vector<double> levels;
    for (const auto& v : *it) {
      if (!v.is_number()) throw FormatError("hierarchy levels must be numbers");
      levels.push_back(v.get<double>());
    }
    PhotonModel model = PhotonModel::hierarchy(mu, std::move(levels));
    if (has_a) {
      const double a = number_field(obj, "a");
      if (std::abs(a - *model.a()) > 1e-9 * std::max(1.0, std::abs(a))) {
        throw DomainError("hierarchy \"a\" must equal mu * levels[0]");
      }
    }
    return model;
  }
  throw FormatError("unknown model kind \"" + kind + "\"");
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what());
  }
}

json optional_number(const std::optional<double>& value) { return value ? json(*value) : json(nullptr); }

bool blank(std::string_view line) { return line.find_first_not_of(" \t\r") == std::string_view::npos; }

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) value = 0.0;  // drop the sign of -0.0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  std::string out(buf, res.ptr);
  if (out.find_first_of(".e") == std::string::npos) out += ".0";
  return out;
}

std::string model_to_json(const PhotonModel& model, int indent) { return model_json(model).dump(indent); }

PhotonModel model_from_json(std::string_view text) { return model_from(parse_json(text)); }

PhotonModel read_model_file(const std::filesystem::path& path) { return model_from_json(read_text_file(path)); }

std::string subtraction_to_json(const SubtractionRecord& record, int indent) {
  json out = {{"initial", model_json(record.initial)},
              {"m", record.m},
              {"p", optional_number(record.p)},
              {"step_means", record.step_means},
              {"result", model_json(record.result)}};
  out["mc_acceptance"] = record.mc_acceptance ? json(*record.mc_acceptance) : json(nullptr);
  return out.dump(indent);
}

std::string fit_to_json(const FitResult& r, int indent) {
  json out = {{"model", model_json(r.model)},
              {"sigma_mu", r.sigma_mu},
              {"sigma_a", r.sigma_a},
              {"log_likelihood", r.log_likelihood},
              {"chi2_significance", r.chi2_significance},
              {"fidelity_vs_reference", optional_number(r.fidelity_vs_reference)},
              {"sample_size", r.sample_size},
              {"method", to_string(r.method)},
              {"error_method", to_string(r.error_method)},
              {"converged", r.converged},
              {"boundary_pinned", r.boundary_pinned},
              {"evaluations", r.evaluations}};
  if (!r.sigma_levels.empty()) out["sigma_levels"] = r.sigma_levels;
  if (r.level1_sufficient) out["level1_sufficient"] = *r.level1_sufficient;
  if (r.level1_chi2_significance) out["level1_chi2_significance"] = *r.level1_chi2_significance;
  if (r.level1_log_likelihood) out["level1_log_likelihood"] = *r.level1_log_likelihood;
  return out.dump(indent);
}

std::filesystem::path sidecar_path(const std::filesystem::path& samples_path) {
  std::filesystem::path out = samples_path;
  out += ".json";
  return out;
}

QuadratureSample parse_samples_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    if (trim(line) != "x") throw FormatError("samples CSV must start with the header line \"x\"");
    have_header = true;
    break;
  }
  if (!have_header) throw FormatError("samples CSV is empty");

  QuadratureSample sample;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const std::string_view field = trim(line);
    double value = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size() || !std::isfinite(value)) {
      throw FormatError("samples CSV line " + std::to_string(line_no) + ": not a finite number: \"" +
                        std::string(field) + "\"");
    }
    sample.values.push_back(value);
  }
  if (sample.values.empty()) throw FormatError("samples CSV has no readings");
  return sample;
}

QuadratureSample read_samples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open samples file " + path.string());
  QuadratureSample sample = parse_samples_csv(in);
  const std::filesystem::path side = sidecar_path(path);
  if (std::filesystem::exists(side)) {
    const json meta = parse_json(read_text_file(side));
    if (!meta.is_object()) throw FormatError("sidecar JSON must be an object");
    for (const auto& [key, value] : meta.items()) {
      if (key == "source") {
        if (!value.is_null()) sample.source = model_from(value);
      } else if (key == "seed") {
        if (!value.is_null()) {
          if (!value.is_number_unsigned()) throw FormatError("sidecar \"seed\" must be a nonnegative integer");
          sample.seed = value.get<std::uint64_t>();
        }
      } else {
        throw FormatError("unknown sidecar field \"" + key + "\"");
      }
    }
  }
  return sample;
}

void write_samples_csv(std::ostream& out, std::span<const double> values) {
  out << "x\n";
  for (double v : values) out << format_number(v) << '\n';
}

void write_samples(const std::filesystem::path& path, const QuadratureSample& sample) {
  {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write samples file " + path.string());
    write_samples_csv(out, sample.values);
  }
  if (sample.source || sample.seed) {
    json meta = json::object();
    if (sample.source) meta["source"] = model_json(*sample.source);
    if (sample.seed) meta["seed"] = *sample.seed;
    std::ofstream out(sidecar_path(path));
    if (!out) throw FormatError("cannot write sidecar file");
    out << meta.dump(2) << '\n';
  }
}

std::vector<int> read_counts(std::istream& in) {
  std::vector<int> counts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const std::string_view field = trim(line);
    int value = 0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size() || value < 0) {
      throw FormatError("photon counts line " + std::to_string(line_no) + ": not a nonnegative integer");
    }
    counts.push_back(value);
  }
  return counts;
}

void write_counts(std::ostream& out, std::span<const int> counts) {
  for (int k : counts) out << k << '\n';
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace photstat
