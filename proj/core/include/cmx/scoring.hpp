#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cmx/dataset.hpp"
#include "cmx/geometry.hpp"

namespace cmx {

enum class DistanceKind { Euclidean, Cosine, MahalanobisCov, MahalanobisCorr };

inline constexpr std::array<DistanceKind, 4> kAllDistanceKinds = {
    DistanceKind::Euclidean, DistanceKind::Cosine, DistanceKind::MahalanobisCov,
    DistanceKind::MahalanobisCorr};

/// Canonical name ("euclidean", "cosine", "mahalanobis_cov", "mahalanobis_corr").
std::string_view to_string(DistanceKind kind) noexcept;
/// Analysis-table column name ("compl_euc", "compl_cos", "compl_mah", "compl_mah_corr").
std::string_view column_name(DistanceKind kind) noexcept;
/// Accepts canonical names plus the short aliases euc, cos, mah, mah_corr.
DistanceKind parse_distance_kind(std::string_view text);

struct ScoringOptions {
  /// Use the raw cosine similarity as the "distance" instead of 1 - similarity.
  /// Inverts the ordering; kept only for reproducing the literal formula.
  bool literal_cosine = false;
};

/// Distance from x to one class geometry. Mahalanobis kinds use the class
/// precision matrices with raw residuals x - centroid.
double distance(const VectorRef& x, const ClassGeometry& geometry, DistanceKind kind,
                const ScoringOptions& options = {});

/// Distances from x to every class of the model, in model.labels() order.
std::vector<double> distances(const VectorRef& x, const GeometryModel& model, DistanceKind kind,
                              const ScoringOptions& options = {});

/// Distances from every row of `points` to every class: entry (i, c) is the
/// distance of row i to model class c. Mahalanobis kinds are evaluated as one
/// matrix product per class.
Eigen::MatrixXd distance_matrix(const MatrixRef& points, const GeometryModel& model,
                                DistanceKind kind, const ScoringOptions& options = {});

/// log(sum exp(-d_c)) evaluated with a max shift, finite for any finite input.
double log_sum_exp_neg(std::span<const double> distances);

/// Complexity of labelling a point with class `own` given its distances to
/// all classes: d_own + log sum_c exp(-d_c). Always >= 0.
double complexity_from_distances(std::span<const double> distances, std::size_t own);

/// Complexity of (x, y) under the model. Throws UnknownClass for unfitted y.
double complexity(const VectorRef& x, const std::string& y, const GeometryModel& model,
                  DistanceKind kind, const ScoringOptions& options = {});

/// Label-independent confidence: max over classes of -mahalanobis_cov distance.
double ood_score(const VectorRef& x, const GeometryModel& model);

struct BaselinePrediction {
  std::string label;
  double nll = 0.0;
};

/// Index of the smallest distance; ties go to the lowest index, i.e. the
/// lexicographically smallest label.
std::size_t argmin_index(std::span<const double> distances);

/// Nearest class under `kind` and its complexity.
BaselinePrediction baseline_predict(const VectorRef& x, const GeometryModel& model,
                                    DistanceKind kind, const ScoringOptions& options = {});

/// Fraction of samples whose baseline prediction equals their label.
double baseline_accuracy(const EmbeddedDataset& dataset, const GeometryModel& model,
                         DistanceKind kind, const ScoringOptions& options = {});

struct KindScore {
  std::vector<double> distances;  // aligned with the model labels
  double complexity = 0.0;        // h(x, true_label)
  std::string prediction;         // baseline label
  double prediction_nll = 0.0;    // h(x, prediction)

  friend bool operator==(const KindScore&, const KindScore&) = default;
};

struct ComplexityRecord {
  std::string id;
  std::string true_label;
  std::map<DistanceKind, KindScore> scores;
  std::optional<double> ood_score;  // present when the model has precisions

  friend bool operator==(const ComplexityRecord&, const ComplexityRecord&) = default;
};

/// Scores every sample against the model, preserving order. Samples are
/// processed in fixed blocks of rows, in parallel; the output does not depend
/// on the number of threads.
std::vector<ComplexityRecord> score_dataset(const EmbeddedDataset& score_set,
                                            const GeometryModel& model,
                                            std::span<const DistanceKind> kinds,
                                            const ScoringOptions& options = {});

}  // namespace cmx
