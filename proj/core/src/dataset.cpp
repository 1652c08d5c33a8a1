#include "cmx/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

#include "cmx/errors.hpp"

namespace cmx {

EmbeddedDataset::EmbeddedDataset(std::vector<std::string> ids, std::vector<std::string> labels,
                                 Eigen::MatrixXd vectors)
    : ids_(std::move(ids)), labels_(std::move(labels)), vectors_(std::move(vectors)) {
  const auto n = ids_.size();
  if (labels_.size() != n || static_cast<std::size_t>(vectors_.rows()) != n) {
    throw Error(ErrorCode::DimensionMismatch,
                "ids, labels and vectors disagree on sample count");
  }
  if (n > 0 && vectors_.cols() < 1) {
    throw Error(ErrorCode::DimensionMismatch, "embedding dimension must be >= 1");
  }
  if (!vectors_.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "dataset contains non-finite values");
  }
  std::unordered_set<std::string> seen;
  seen.reserve(n);
  for (const auto& id : ids_) {
    if (!seen.insert(id).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate sample id '" + id + "'");
    }
  }
  const std::set<std::string> distinct(labels_.begin(), labels_.end());
  classes_.assign(distinct.begin(), distinct.end());
}

Eigen::MatrixXd EmbeddedDataset::class_samples(const std::string& label) const {
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == label) rows.push_back(static_cast<Eigen::Index>(i));
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), vectors_.cols());
  for (Eigen::Index r = 0; r < out.rows(); ++r) out.row(r) = vectors_.row(rows[r]);
  return out;
}

std::vector<std::size_t> EmbeddedDataset::class_counts() const {
  std::vector<std::size_t> counts(classes_.size(), 0);
  for (const auto& label : labels_) {
    const auto it = std::lower_bound(classes_.begin(), classes_.end(), label);
    ++counts[static_cast<std::size_t>(it - classes_.begin())];
  }
  return counts;
}

EmbeddedDataset EmbeddedDataset::subset(std::span<const std::size_t> rows) const {
  std::vector<std::string> ids;
  std::vector<std::string> labels;
  ids.reserve(rows.size());
  labels.reserve(rows.size());
  Eigen::MatrixXd vectors(static_cast<Eigen::Index>(rows.size()), vectors_.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    ids.push_back(ids_.at(rows[k]));
    labels.push_back(labels_.at(rows[k]));
    vectors.row(static_cast<Eigen::Index>(k)) = vectors_.row(static_cast<Eigen::Index>(rows[k]));
  }
  return {std::move(ids), std::move(labels), std::move(vectors)};
}

void EmbeddedDataset::require_classification() const {
  if (empty()) throw Error(ErrorCode::EmptyDataset, "dataset has no samples");
  if (classes_.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "classification needs at least two classes, got " +
                                                std::to_string(classes_.size()));
  }
}

}  // namespace cmx
