#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cmx/analysis.hpp"
#include "cmx/dataset.hpp"
#include "cmx/scoring.hpp"
#include "cmx/synth.hpp"

namespace cmx::io {

/// "%.17g" formatting shared by every text output.
std::string format_double(double v);

// ---------------------------------------------------------------------------
// Dataset files
// ---------------------------------------------------------------------------

/// CSV with header `id,label,e0,...,e{d-1}`. Errors are ParseError with the
/// 1-based line number: malformed header, ragged row, non-finite value,
/// unparsable number, duplicate id.
EmbeddedDataset parse_dataset_csv(std::istream& in);
void write_dataset_csv(const EmbeddedDataset& dataset, std::ostream& out);

/// Binary layout: "CPLX1", u32 N, u32 d, N length-prefixed ids, N
/// length-prefixed labels (u32 byte length + UTF-8 bytes), N*d f32 row-major.
/// All integers and floats little-endian.
EmbeddedDataset parse_dataset_binary(std::istream& in);
void write_dataset_binary(const EmbeddedDataset& dataset, std::ostream& out);

inline constexpr std::string_view kBinaryMagic = "CPLX1";

/// Reads either format, detected by the magic bytes.
EmbeddedDataset read_dataset(const std::filesystem::path& path);
enum class DatasetFormat { Csv, Binary };
void write_dataset(const EmbeddedDataset& dataset, const std::filesystem::path& path,
                   DatasetFormat format = DatasetFormat::Csv);

// ---------------------------------------------------------------------------
// External predictions
// ---------------------------------------------------------------------------

struct Prediction {
  std::string id;
  std::string predicted_label;
  std::optional<double> confidence;
};

struct PredictionsFile {
  std::vector<Prediction> rows;
  bool has_confidence = false;
};

/// CSV `id,predicted_label[,confidence]`; confidence must lie in [0, 1].
PredictionsFile parse_predictions_csv(std::istream& in);
PredictionsFile read_predictions(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Train/test split
// ---------------------------------------------------------------------------

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  bool stratified = true;
};

struct SplitResult {
  EmbeddedDataset train;
  EmbeddedDataset test;
};

/// Random split, deterministic per seed; both parts keep the input row order.
/// Stratified splits give each class round(n_c * fraction) training rows,
/// clamped to [1, n_c - 1]; a class of one sample is a StratificationError.
SplitResult split(const EmbeddedDataset& dataset, const SplitSpec& spec);

// ---------------------------------------------------------------------------
// Analysis table assembly
// ---------------------------------------------------------------------------

struct AnalysisInputs {
  /// Kind whose baseline prediction defines errors when no predictions are given.
  DistanceKind error_kind = DistanceKind::MahalanobisCov;
  const PredictionsFile* predictions = nullptr;
  /// Optional coordinates aligned with the records; added as columns x1, x2, ...
  const Eigen::MatrixXd* coordinates = nullptr;
};

/// Columns, in order: compl_euc, compl_cos, compl_mah, compl_mah_corr (those
/// that were scored), confidence (when predictions carry it), then x1..xd.
/// Throws JoinError listing record ids missing from the predictions.
AnalysisTable build_analysis_table(const std::vector<ComplexityRecord>& records,
                                   const AnalysisInputs& inputs = {});

// ---------------------------------------------------------------------------
// Heatmaps
// ---------------------------------------------------------------------------

/// Long format: header `x,y,value`, then one row per grid point with y the
/// outer loop and x the inner loop.
void write_heatmap_csv(const HeatmapGrid& grid, std::ostream& out);

// ---------------------------------------------------------------------------
// Small CSV helpers shared with the report writer
// ---------------------------------------------------------------------------

/// Splits one CSV line, honoring double-quoted fields.
std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_number);
/// Quotes a field when it contains a comma, quote, or line break.
std::string csv_field(std::string_view field);

std::ifstream open_input(const std::filesystem::path& path, bool binary = false);
std::ofstream open_output(const std::filesystem::path& path, bool binary = false);

}  // namespace cmx::io
