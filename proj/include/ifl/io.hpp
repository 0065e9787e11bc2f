#pragma once

#include "ifl/dataset.hpp"
#include "ifl/eval.hpp"
#include "ifl/features.hpp"
#include "ifl/matrix.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace ifl::io {

enum class Scaling { None, DivideByMax, DivideByTwo };

std::string to_string(Scaling s);
Scaling scaling_from_string(const std::string& name);

/// Applies a scaling rule in place. DivideByMax divides by the largest absolute entry (no-op when zero).
void apply_scaling(Matrix& x, Scaling rule);

struct CsvOptions {
  /// Column holding integer class labels: a header name, or a 0-based index (negative counts from the end).
  std::optional<std::string> label_column;
  Scaling scaling = Scaling::None;
};

/// Comma-separated numeric table with an optional single header row (detected when any cell of the
/// first row is not numeric). Labels are remapped to 0..k-1 in ascending order of their values.
Dataset load_csv(const std::filesystem::path& path, const CsvOptions& opts = {});

/// IDX image file (magic 0x00000803) and label file (magic 0x00000801). Images are flattened row-major
/// and scaled by `scaling` (divide-by-max by default).
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                 Scaling scaling = Scaling::DivideByMax);

/// CSV with header instance_id[,version_id],<feature columns>[,label]; values printed with 17 significant digits.
void export_features(const core::IflFeatureTable& table, const std::filesystem::path& path);

/// Reads a table written by export_features.
core::IflFeatureTable load_features(const std::filesystem::path& path);

/// Writes a plain numeric matrix with a header row.
void export_matrix(const Matrix& x, const std::vector<std::string>& header, const std::filesystem::path& path);

struct ReportOptions {
  bool include_timing = true;
};

std::string report_to_json(const eval::ExperimentReport& report, const ReportOptions& opts = {});
eval::ExperimentReport report_from_json(const std::string& text);

void export_report(const eval::ExperimentReport& report, const std::filesystem::path& path,
                   const ReportOptions& opts = {});
eval::ExperimentReport load_report(const std::filesystem::path& path);

/// Coordinates on the top two principal components (n x 2). The sign of each axis is fixed so that its
/// largest-magnitude loading is positive. With fewer than two dimensions the second coordinate is 0.
Matrix pca_2d(const Matrix& z);

/// CSV of x,y,cluster rows from pca_2d(z).
void export_projection(const Matrix& z, const Labels& assignments, const std::filesystem::path& path);

}  // namespace ifl::io
