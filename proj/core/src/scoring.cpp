#include "cmx/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cmx/errors.hpp"
#include "cmx/parallel.hpp"

namespace cmx {

namespace {

constexpr double kQuadraticFormTolerance = 1e-8;

constexpr Eigen::Index kScoreBlock = 256;

double checked_sqrt(double q) {
  if (q < 0.0) {
    if (q < -kQuadraticFormTolerance) {
      throw Error(ErrorCode::NumericalError,
                  "negative quadratic form " + std::to_string(q) + " in Mahalanobis distance");
    }
    q = 0.0;
  }
  return std::sqrt(q);
}

double mahalanobis(const Eigen::VectorXd& residual, const Eigen::MatrixXd& precision_matrix) {
  return checked_sqrt(residual.dot(precision_matrix * residual));
}

const Eigen::MatrixXd& precision_for(const ClassGeometry& g, DistanceKind kind) {
  const auto& p = kind == DistanceKind::MahalanobisCov ? g.precision_cov : g.precision_corr;
  if (p.size() == 0) {
    throw Error(ErrorCode::InvalidArgument,
                "class '" + g.label + "' was fitted without precision matrices");
  }
  return p;
}

// log(sum_c exp(-(d_c - d_min))), with the unit term of the minimum split off for log1p.
double log1p_tail(std::span<const double> distances, std::size_t min_index) {
  const double lo = distances[min_index];
  double tail = 0.0;
  for (std::size_t c = 0; c < distances.size(); ++c) {
    if (c != min_index) tail += std::exp(-(distances[c] - lo));
  }
  return std::log1p(tail);
}

void check_dimension(const VectorRef& x, Eigen::Index d) {
  if (x.size() != d) {
    throw Error(ErrorCode::DimensionMismatch, "vector has dimension " + std::to_string(x.size()) +
                                                  ", expected " + std::to_string(d));
  }
}

}  // namespace

std::string_view to_string(DistanceKind kind) noexcept {
  switch (kind) {
    case DistanceKind::Euclidean: return "euclidean";
    case DistanceKind::Cosine: return "cosine";
    case DistanceKind::MahalanobisCov: return "mahalanobis_cov";
    case DistanceKind::MahalanobisCorr: return "mahalanobis_corr";
  }
  return "unknown";
}

std::string_view column_name(DistanceKind kind) noexcept {
  switch (kind) {
    case DistanceKind::Euclidean: return "compl_euc";
    case DistanceKind::Cosine: return "compl_cos";
    case DistanceKind::MahalanobisCov: return "compl_mah";
    case DistanceKind::MahalanobisCorr: return "compl_mah_corr";
  }
  return "compl_unknown";
}

DistanceKind parse_distance_kind(std::string_view text) {
  if (text == "euclidean" || text == "euc") return DistanceKind::Euclidean;
  if (text == "cosine" || text == "cos") return DistanceKind::Cosine;
  if (text == "mahalanobis_cov" || text == "mahalanobis" || text == "mah") {
    return DistanceKind::MahalanobisCov;
  }
  if (text == "mahalanobis_corr" || text == "mah_corr") return DistanceKind::MahalanobisCorr;
  throw Error(ErrorCode::InvalidArgument, "unknown distance kind '" + std::string(text) + "'");
}

double distance(const VectorRef& x, const ClassGeometry& geometry, DistanceKind kind,
                const ScoringOptions& options) {
  check_dimension(x, geometry.centroid.size());
  switch (kind) {
    case DistanceKind::Euclidean:
      return (x - geometry.centroid).norm();
    case DistanceKind::Cosine: {
      const double nx = x.norm();
      const double nm = geometry.centroid.norm();
      if (nx == 0.0 || nm == 0.0) {
        throw Error(ErrorCode::DegenerateVector,
                    "cosine distance undefined for a zero vector (class '" + geometry.label + "')");
      }
      const double similarity = std::clamp(x.dot(geometry.centroid) / (nx * nm), -1.0, 1.0);
      return options.literal_cosine ? similarity : 1.0 - similarity;
    }
    case DistanceKind::MahalanobisCov:
    case DistanceKind::MahalanobisCorr:
      return mahalanobis(x - geometry.centroid, precision_for(geometry, kind));
  }
  return 0.0;
}

std::vector<double> distances(const VectorRef& x, const GeometryModel& model, DistanceKind kind,
                              const ScoringOptions& options) {
  std::vector<double> out;
  out.reserve(model.num_classes());
  for (const auto& g : model.geometries()) out.push_back(distance(x, g, kind, options));
  return out;
}

Eigen::MatrixXd distance_matrix(const MatrixRef& points, const GeometryModel& model,
                                DistanceKind kind, const ScoringOptions& options) {
  if (points.cols() != model.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "points have dimension " + std::to_string(points.cols()) +
                                                  ", expected " + std::to_string(model.dim()));
  }
  const auto n = points.rows();
  Eigen::MatrixXd out(n, static_cast<Eigen::Index>(model.num_classes()));
  Eigen::VectorXd point_norms;
  if (kind == DistanceKind::Cosine) {
    point_norms = points.rowwise().norm();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (point_norms(i) == 0.0) {
        throw Error(ErrorCode::DegenerateVector, "cosine distance undefined for a zero vector");
      }
    }
  }
  for (std::size_t c = 0; c < model.num_classes(); ++c) {
    const auto& g = model.geometries()[c];
    const auto col = static_cast<Eigen::Index>(c);
    switch (kind) {
      case DistanceKind::Euclidean:
        out.col(col) = (points.rowwise() - g.centroid.transpose()).rowwise().norm();
        break;
      case DistanceKind::Cosine: {
        const double nm = g.centroid.norm();
        if (nm == 0.0) {
          throw Error(ErrorCode::DegenerateVector,
                      "cosine distance undefined for a zero vector (class '" + g.label + "')");
        }
        const Eigen::VectorXd dots = points * g.centroid;
        for (Eigen::Index i = 0; i < n; ++i) {
          const double similarity = std::clamp(dots(i) / (point_norms(i) * nm), -1.0, 1.0);
          out(i, col) = options.literal_cosine ? similarity : 1.0 - similarity;
        }
        break;
      }
      case DistanceKind::MahalanobisCov:
      case DistanceKind::MahalanobisCorr: {
        const auto& p = precision_for(g, kind);
        const Eigen::MatrixXd r = points.rowwise() - g.centroid.transpose();
        const Eigen::VectorXd q = (r * p).cwiseProduct(r).rowwise().sum();
        for (Eigen::Index i = 0; i < n; ++i) out(i, col) = checked_sqrt(q(i));
        break;
      }
    }
  }
  return out;
}

double log_sum_exp_neg(std::span<const double> distances) {
  if (distances.empty()) return -std::numeric_limits<double>::infinity();
  const auto lo = std::min_element(distances.begin(), distances.end());
  return -*lo + log1p_tail(distances, static_cast<std::size_t>(lo - distances.begin()));
}

double complexity_from_distances(std::span<const double> distances, std::size_t own) {
  if (own >= distances.size()) throw Error(ErrorCode::UnknownClass, "class index out of range");
  const auto lo = std::min_element(distances.begin(), distances.end());
  // (d_own - lo) + log(sum); both terms are >= 0 since sum >= 1.
  return (distances[own] - *lo) + log1p_tail(distances, static_cast<std::size_t>(lo - distances.begin()));
}

double complexity(const VectorRef& x, const std::string& y, const GeometryModel& model,
                  DistanceKind kind, const ScoringOptions& options) {
  if (model.num_classes() < 2) {
    throw Error(ErrorCode::InvalidArgument, "complexity needs at least two classes");
  }
  const auto own = model.index_of(y);
  const auto d = distances(x, model, kind, options);
  return complexity_from_distances(d, own);
}

double ood_score(const VectorRef& x, const GeometryModel& model) {
  if (model.num_classes() == 0) throw Error(ErrorCode::InvalidArgument, "model has no classes");
  const auto d = distances(x, model, DistanceKind::MahalanobisCov);
  return -*std::min_element(d.begin(), d.end());
}

std::size_t argmin_index(std::span<const double> distances) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < distances.size(); ++i) {
    if (distances[i] < distances[best]) best = i;
  }
  return best;
}

BaselinePrediction baseline_predict(const VectorRef& x, const GeometryModel& model,
                                    DistanceKind kind, const ScoringOptions& options) {
  if (model.num_classes() < 2) {
    throw Error(ErrorCode::InvalidArgument, "baseline classifier needs at least two classes");
  }
  const auto d = distances(x, model, kind, options);
  const auto best = argmin_index(d);
  return {model.labels()[best], complexity_from_distances(d, best)};
}

double baseline_accuracy(const EmbeddedDataset& dataset, const GeometryModel& model,
                         DistanceKind kind, const ScoringOptions& options) {
  if (dataset.empty()) throw Error(ErrorCode::EmptyDataset, "baseline accuracy of an empty dataset");
  if (dataset.dim() != model.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "dataset and model dimensions differ");
  }
  std::vector<char> correct(dataset.size(), 0);
  detail::parallel_for(dataset.size(), [&](std::size_t i) {
    const auto pred = baseline_predict(dataset.vectors().row(static_cast<Eigen::Index>(i)).transpose(),
                                       model, kind, options);
    correct[i] = pred.label == dataset.labels()[i] ? 1 : 0;
  });
  const auto hits = std::count(correct.begin(), correct.end(), 1);
  return static_cast<double>(hits) / static_cast<double>(dataset.size());
}

std::vector<ComplexityRecord> score_dataset(const EmbeddedDataset& score_set,
                                            const GeometryModel& model,
                                            std::span<const DistanceKind> kinds,
                                            const ScoringOptions& options) {
  if (model.num_classes() < 2) {
    throw Error(ErrorCode::InvalidArgument, "scoring needs a model with at least two classes");
  }
  if (!score_set.empty() && score_set.dim() != model.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "score set has dimension " + std::to_string(score_set.dim()) + ", model has " +
                    std::to_string(model.dim()));
  }
  for (const auto& label : score_set.classes()) (void)model.index_of(label);

  const bool with_ood = model.has_precision();
  const auto n = static_cast<Eigen::Index>(score_set.size());
  const auto blocks = static_cast<std::size_t>((n + kScoreBlock - 1) / kScoreBlock);
  std::vector<ComplexityRecord> records(score_set.size());
  detail::parallel_for(
      blocks,
      [&](std::size_t b) {
        const Eigen::Index begin = static_cast<Eigen::Index>(b) * kScoreBlock;
        const Eigen::Index len = std::min(kScoreBlock, n - begin);
        const auto rows = score_set.vectors().middleRows(begin, len);
        std::vector<std::size_t> own(static_cast<std::size_t>(len));
        for (Eigen::Index i = 0; i < len; ++i) {
          const auto k = static_cast<std::size_t>(begin + i);
          auto& rec = records[k];
          rec.id = score_set.ids()[k];
          rec.true_label = score_set.labels()[k];
          own[static_cast<std::size_t>(i)] = model.index_of(rec.true_label);
        }
        std::vector<double> d(model.num_classes());
        Eigen::MatrixXd cov_distances;
        for (const auto kind : kinds) {
          Eigen::MatrixXd dm = distance_matrix(rows, model, kind, options);
          for (Eigen::Index i = 0; i < len; ++i) {
            for (std::size_t c = 0; c < d.size(); ++c) d[c] = dm(i, static_cast<Eigen::Index>(c));
            KindScore s;
            s.distances = d;
            s.complexity = complexity_from_distances(d, own[static_cast<std::size_t>(i)]);
            const auto best = argmin_index(d);
            s.prediction = model.labels()[best];
            s.prediction_nll = complexity_from_distances(d, best);
            records[static_cast<std::size_t>(begin + i)].scores.emplace(kind, std::move(s));
          }
          if (kind == DistanceKind::MahalanobisCov) cov_distances = std::move(dm);
        }
        if (with_ood) {
          if (cov_distances.size() == 0) {
            cov_distances = distance_matrix(rows, model, DistanceKind::MahalanobisCov);
          }
          for (Eigen::Index i = 0; i < len; ++i) {
            records[static_cast<std::size_t>(begin + i)].ood_score = -cov_distances.row(i).minCoeff();
          }
        }
      },
      1);
  return records;
}

}  // namespace cmx
