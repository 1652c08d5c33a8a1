#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cmx/dataset.hpp"

namespace cmx {

using MatrixRef = Eigen::Ref<const Eigen::MatrixXd>;
using VectorRef = Eigen::Ref<const Eigen::VectorXd>;

/// Condition number above which a direct inverse is not attempted.
inline constexpr double kMaxDirectCondition = 1e12;

// ---------------------------------------------------------------------------
// Estimators. Rows of `samples` are observations.
// ---------------------------------------------------------------------------

/// Arithmetic mean of the rows. Throws EmptyClass when there are none.
Eigen::VectorXd centroid(const MatrixRef& samples);

/// Maximum-likelihood covariance, (1/n) sum (b - mu)(b - mu)^T.
/// With `unbiased`, normalizes by n - 1 instead (n >= 2 required).
Eigen::MatrixXd covariance_mle(const MatrixRef& samples, bool unbiased = false);

/// Pearson correlation from a covariance. Zero-variance dimensions get 1 on
/// the diagonal and 0 elsewhere in their row and column.
Eigen::MatrixXd correlation_matrix(const MatrixRef& covariance);

struct ShrunkCovariance {
  Eigen::MatrixXd covariance;
  double coefficient = 0.0;  // weight on the scaled-identity target, in [0, 1]
};

/// Ledoit-Wolf shrinkage of the MLE covariance towards (tr/d) I.
/// Throws InsufficientSamples for fewer than two rows.
ShrunkCovariance shrink_ledoit_wolf(const MatrixRef& samples);

/// Same estimator on residuals that are already centered (rows sum to zero
/// per group). Used for pooled covariance, where each class is centered on
/// its own centroid.
ShrunkCovariance shrink_ledoit_wolf_centered(const MatrixRef& residuals);

enum class PrecisionMode { Direct, PseudoInverse, Ridge };

struct PrecisionOptions {
  PrecisionMode mode = PrecisionMode::Direct;
  double ridge_epsilon = 1e-6;  // absolute, only for Ridge
};

/// Inverse of a symmetric matrix. Inverts directly when the condition number
/// is at most kMaxDirectCondition; otherwise Direct throws SingularMatrix,
/// PseudoInverse returns the Moore-Penrose inverse and Ridge inverts M + eps I.
Eigen::MatrixXd precision(const MatrixRef& matrix, PrecisionOptions options = {});

/// 2-norm condition number of a symmetric matrix (infinity when singular).
double symmetric_condition_number(const MatrixRef& matrix);

// ---------------------------------------------------------------------------
// Fitted per-class geometry
// ---------------------------------------------------------------------------

enum class Shrinkage { None, LedoitWolf, Ridge };

struct ShrinkageUsed {
  Shrinkage kind = Shrinkage::None;
  double coefficient = 0.0;    // Ledoit-Wolf weight, 0 otherwise
  double ridge_epsilon = 0.0;  // absolute ridge added to the diagonal, 0 if none

  friend bool operator==(const ShrinkageUsed&, const ShrinkageUsed&) = default;
};

struct GeometryConfig {
  Shrinkage shrinkage = Shrinkage::LedoitWolf;
  /// Ridge size relative to the mean variance: eps = ridge_scale * tr(S) / d.
  /// Applied always under Shrinkage::Ridge, and as the fallback when the
  /// Ledoit-Wolf estimate still fails a Cholesky factorization.
  double ridge_scale = 1e-6;
  /// One covariance shared by all classes, from residuals about each class centroid.
  bool pooled = false;
  /// Normalize by n - 1 instead of n.
  bool unbiased = false;
  /// Inversion route when a matrix is too ill-conditioned to invert directly.
  PrecisionMode fallback = PrecisionMode::PseudoInverse;
  /// Compute precision matrices (needed by the Mahalanobis distances).
  bool with_precision = true;

  friend bool operator==(const GeometryConfig&, const GeometryConfig&) = default;
};

struct ClassGeometry {
  std::string label;
  std::size_t count = 0;
  Eigen::VectorXd centroid;
  Eigen::MatrixXd covariance;   // unregularized estimate
  Eigen::MatrixXd correlation;  // from the unregularized covariance
  Eigen::MatrixXd precision_cov;   // empty when not computed
  Eigen::MatrixXd precision_corr;  // empty when not computed
  ShrinkageUsed shrinkage_used;

  [[nodiscard]] bool has_precision() const noexcept { return precision_cov.size() > 0; }
};

/// Per-class geometries of a dataset. Immutable after construction, safe to
/// share across threads for scoring.
class GeometryModel {
 public:
  GeometryModel() = default;
  GeometryModel(std::vector<ClassGeometry> geometries, GeometryConfig config);

  [[nodiscard]] Eigen::Index dim() const noexcept { return dim_; }
  [[nodiscard]] const GeometryConfig& config() const noexcept { return config_; }
  /// Sorted by label.
  [[nodiscard]] const std::vector<ClassGeometry>& geometries() const noexcept { return geometries_; }
  [[nodiscard]] const std::vector<std::string>& labels() const noexcept { return labels_; }
  [[nodiscard]] std::size_t num_classes() const noexcept { return geometries_.size(); }

  /// Position of `label` in labels(); throws UnknownClass.
  [[nodiscard]] std::size_t index_of(const std::string& label) const;
  [[nodiscard]] bool contains(const std::string& label) const noexcept;
  [[nodiscard]] const ClassGeometry& at(const std::string& label) const {
    return geometries_[index_of(label)];
  }
  [[nodiscard]] bool has_precision() const noexcept;

 private:
  std::vector<ClassGeometry> geometries_;
  std::vector<std::string> labels_;
  GeometryConfig config_;
  Eigen::Index dim_ = 0;
};

/// Fits one ClassGeometry per class. Classes are processed independently
/// (in parallel when there are many) and the result depends only on the
/// dataset contents and config.
GeometryModel fit(const EmbeddedDataset& dataset, const GeometryConfig& config = {});

/// Geometry from known moments (e.g. the generating parameters of a
/// synthetic class). Precisions follow the config's regularization chain,
/// except that Ledoit-Wolf needs samples and is treated as None here.
ClassGeometry geometry_from_moments(std::string label, std::size_t count,
                                   const Eigen::VectorXd& mean,
                                   const Eigen::MatrixXd& covariance,
                                   const GeometryConfig& config = {});

}  // namespace cmx
