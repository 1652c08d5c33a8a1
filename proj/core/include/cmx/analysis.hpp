#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cmx/dataset.hpp"
#include "cmx/geometry.hpp"
#include "cmx/scoring.hpp"

namespace cmx {

// ---------------------------------------------------------------------------
// Dataset statistics
// ---------------------------------------------------------------------------

/// Class-distribution entropy divided by log(number of classes).
/// Throws UndefinedEntropy for fewer than two classes, InvalidArgument for a zero count.
double normalized_entropy(std::span<const std::size_t> class_counts);

/// Lower median of the class counts.
std::size_t median_class_size(std::span<const std::size_t> class_counts);

struct DatasetStats {
  std::size_t num_classes = 0;
  std::size_t num_samples = 0;
  double normalized_entropy = 0.0;
  std::size_t median_class_size = 0;
  double baseline_accuracy = 0.0;
  std::map<std::string, std::size_t> class_counts;

  friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
};

DatasetStats dataset_stats(const EmbeddedDataset& dataset, const GeometryModel& model,
                           DistanceKind kind, const ScoringOptions& options = {});

// ---------------------------------------------------------------------------
// Analysis table and slices
// ---------------------------------------------------------------------------

/// One row per sample with its error flag and named numeric feature columns.
class AnalysisTable {
 public:
  AnalysisTable() = default;
  AnalysisTable(std::vector<std::string> ids, std::vector<std::string> true_labels,
                std::vector<std::string> predicted_labels);

  /// Appends a column; throws on a duplicate name, wrong length or non-finite values.
  void add_feature(std::string name, std::vector<double> values);

  [[nodiscard]] std::size_t size() const noexcept { return ids_.size(); }
  [[nodiscard]] std::size_t error_count() const noexcept { return error_count_; }
  [[nodiscard]] const std::vector<std::string>& ids() const noexcept { return ids_; }
  [[nodiscard]] const std::vector<std::string>& true_labels() const noexcept { return true_labels_; }
  [[nodiscard]] const std::vector<std::string>& predicted_labels() const noexcept {
    return predicted_labels_;
  }
  [[nodiscard]] bool is_error(std::size_t row) const noexcept { return is_error_[row] != 0; }
  [[nodiscard]] const std::vector<std::string>& feature_names() const noexcept { return names_; }
  [[nodiscard]] bool has_feature(const std::string& name) const noexcept;
  /// Throws InvalidArgument when the column does not exist.
  [[nodiscard]] const std::vector<double>& feature(const std::string& name) const;

 private:
  std::vector<std::string> ids_;
  std::vector<std::string> true_labels_;
  std::vector<std::string> predicted_labels_;
  std::vector<char> is_error_;
  std::size_t error_count_ = 0;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  [[nodiscard]] bool contains(double v) const noexcept { return lo <= v && v <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Conjunction of one or two closed feature ranges.
struct Slice {
  std::vector<std::string> features;
  std::vector<Interval> ranges;
  std::size_t support = 0;
  std::size_t errors = 0;
  double slice_accuracy = 0.0;
  double error_precision = 0.0;
  double error_recall = 0.0;
  double rank = 0.0;

  friend bool operator==(const Slice&, const Slice&) = default;
};

/// Harmonic mean of error precision (errors/support) and error recall
/// (errors/total_errors). Zero when the slice holds no errors.
double slice_rank(std::size_t errors_in_slice, std::size_t support, std::size_t total_errors);

/// Recounts support and errors of the given ranges over the table.
Slice evaluate_slice(const AnalysisTable& table, std::vector<std::string> features,
                     std::vector<Interval> ranges);

/// Default minimum support: max(10, ceil(1% of rows)).
std::size_t default_min_support(std::size_t rows) noexcept;

struct SliceSearchOptions {
  std::size_t min_support = 10;
  std::size_t max_results = 20;  // per feature or feature pair
  std::size_t max_unique = 2048;  // 1-D values are quantile-compressed beyond this
  std::size_t grid = 32;          // 2-D quantile bins per feature
};

/// Disjoint intervals of one feature, picked greedily by rank among all
/// contiguous intervals of its sorted distinct values. Every result holds
/// at least one error and min_support rows. Empty when the table has no errors.
std::vector<Slice> find_slices_1d(const AnalysisTable& table, const std::string& feature,
                                  const SliceSearchOptions& options = {});

/// Disjoint axis-aligned rectangles over a grid x grid quantile binning of
/// two features, picked greedily by rank. Requires grid >= 4.
std::vector<Slice> find_slices_2d(const AnalysisTable& table, const std::string& first,
                                  const std::string& second, const SliceSearchOptions& options = {});

/// Descending rank, then descending support, then feature names and ranges.
std::vector<Slice> rank_slices(std::vector<Slice> slices);

/// 1-D search over every feature column plus 2-D search over `pairs`,
/// merged and ranked.
std::vector<Slice> find_all_slices(const AnalysisTable& table,
                                   std::span<const std::pair<std::string, std::string>> pairs,
                                   const SliceSearchOptions& options = {});

}  // namespace cmx
