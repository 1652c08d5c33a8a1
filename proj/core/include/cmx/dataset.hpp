#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cmx {

/// N labeled samples in R^d. Rows of `vectors()` are samples, in input order.
///
/// Construction validates: equal dimension d >= 1, unique ids, finite values.
/// `classes()` is the lexicographically sorted set of distinct labels; the
/// same order is used everywhere a per-class vector appears.
class EmbeddedDataset {
 public:
  EmbeddedDataset() = default;
  EmbeddedDataset(std::vector<std::string> ids, std::vector<std::string> labels,
                  Eigen::MatrixXd vectors);

  [[nodiscard]] std::size_t size() const noexcept { return ids_.size(); }
  [[nodiscard]] bool empty() const noexcept { return ids_.empty(); }
  [[nodiscard]] Eigen::Index dim() const noexcept { return vectors_.cols(); }

  [[nodiscard]] const std::vector<std::string>& ids() const noexcept { return ids_; }
  [[nodiscard]] const std::vector<std::string>& labels() const noexcept { return labels_; }
  [[nodiscard]] const std::vector<std::string>& classes() const noexcept { return classes_; }
  [[nodiscard]] const Eigen::MatrixXd& vectors() const noexcept { return vectors_; }

  [[nodiscard]] Eigen::VectorXd row(std::size_t i) const {
    return vectors_.row(static_cast<Eigen::Index>(i)).transpose();
  }

  /// Rows belonging to `label`, stacked in dataset order.
  [[nodiscard]] Eigen::MatrixXd class_samples(const std::string& label) const;
  [[nodiscard]] std::vector<std::size_t> class_counts() const;  // aligned with classes()

  /// Sub-dataset of the given row indices, in the given order.
  [[nodiscard]] EmbeddedDataset subset(std::span<const std::size_t> rows) const;

  /// Throws InvalidArgument unless at least two classes are present.
  void require_classification() const;

  friend bool operator==(const EmbeddedDataset& a, const EmbeddedDataset& b) {
    return a.ids_ == b.ids_ && a.labels_ == b.labels_ && a.vectors_ == b.vectors_;
  }

 private:
  std::vector<std::string> ids_;
  std::vector<std::string> labels_;
  std::vector<std::string> classes_;
  Eigen::MatrixXd vectors_;
};

}  // namespace cmx
