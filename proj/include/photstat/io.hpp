#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "photstat/inference.hpp"
#include "photstat/photon_model.hpp"
#include "photstat/quadrature.hpp"
#include "photstat/subtraction.hpp"

namespace photstat {

/// Shortest decimal text that round-trips, with ".0" appended to integral
/// values ("2.0", "0.0").
std::string format_number(double value);

/// {"kind": ..., "mu": ..., "a": ..., "levels": [...]}. For a hierarchy the
/// levels are b_1..b_r and "a" (optional on input) must equal mu b_1.
std::string model_to_json(const PhotonModel& model, int indent = -1);
PhotonModel model_from_json(std::string_view text);
PhotonModel read_model_file(const std::filesystem::path& path);

std::string subtraction_to_json(const SubtractionRecord& record, int indent = -1);
std::string fit_to_json(const FitResult& result, int indent = -1);

/// CSV with the single header line "x"; an optional sidecar <path>.json
/// holds {"source": model, "seed": n}.
QuadratureSample read_samples(const std::filesystem::path& path);
QuadratureSample parse_samples_csv(std::istream& in);
void write_samples(const std::filesystem::path& path, const QuadratureSample& sample);
void write_samples_csv(std::ostream& out, std::span<const double> values);
std::filesystem::path sidecar_path(const std::filesystem::path& samples_path);

/// Newline-delimited nonnegative photon counts.
std::vector<int> read_counts(std::istream& in);
void write_counts(std::ostream& out, std::span<const int> counts);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace photstat
