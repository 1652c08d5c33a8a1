#include "cmx/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cmx/errors.hpp"
#include "cmx/parallel.hpp"

namespace cmx {

namespace {

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

double mean_diagonal(const Eigen::MatrixXd& m) {
  return m.rows() > 0 ? m.trace() / static_cast<double>(m.rows()) : 0.0;
}

bool cholesky_ok(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  return llt.info() == Eigen::Success;
}

// Absolute ridge for a matrix: ridge_scale times its mean diagonal, or
// ridge_scale itself when the diagonal is all zero.
double ridge_for(const Eigen::MatrixXd& m, double ridge_scale) {
  const double scale = mean_diagonal(m);
  return scale > 0.0 ? ridge_scale * scale : ridge_scale;
}

struct Regularized {
  Eigen::MatrixXd matrix;
  double ridge = 0.0;
};

// Applies the configured ridge (always for Shrinkage::Ridge, as a fallback
// after a failed Cholesky for Ledoit-Wolf) to an already-shrunk matrix.
Regularized apply_ridge_chain(Eigen::MatrixXd matrix, Shrinkage shrinkage, double ridge_scale) {
  Regularized out;
  const auto d = matrix.rows();
  if (shrinkage == Shrinkage::Ridge ||
      (shrinkage == Shrinkage::LedoitWolf && !cholesky_ok(matrix))) {
    out.ridge = ridge_for(matrix, ridge_scale);
    matrix += out.ridge * Eigen::MatrixXd::Identity(d, d);
  }
  out.matrix = std::move(matrix);
  return out;
}

struct Precisions {
  Eigen::MatrixXd cov;
  Eigen::MatrixXd corr;
  ShrinkageUsed used;
};

// Regularizes and inverts covariance and correlation. `lw_shrunk` is the
// Ledoit-Wolf estimate when that mode is active (and samples were available).
Precisions make_precisions(const Eigen::MatrixXd& covariance, const Eigen::MatrixXd& correlation,
                           const ShrunkCovariance* lw_shrunk, const GeometryConfig& config) {
  Precisions out;
  Shrinkage mode = config.shrinkage;
  Eigen::MatrixXd cov_base = covariance;
  Eigen::MatrixXd corr_base = correlation;
  const auto d = covariance.rows();

  if (mode == Shrinkage::LedoitWolf) {
    if (lw_shrunk != nullptr) {
      const double alpha = lw_shrunk->coefficient;
      cov_base = lw_shrunk->covariance;
      corr_base = (1.0 - alpha) * correlation + alpha * Eigen::MatrixXd::Identity(d, d);
      out.used.coefficient = alpha;
    }
    out.used.kind = Shrinkage::LedoitWolf;
  } else {
    out.used.kind = mode;
  }

  auto cov_reg = apply_ridge_chain(std::move(cov_base), mode, config.ridge_scale);
  auto corr_reg = apply_ridge_chain(std::move(corr_base), mode, config.ridge_scale);
  out.used.ridge_epsilon = cov_reg.ridge;

  const PrecisionOptions cov_opts{config.fallback, ridge_for(cov_reg.matrix, config.ridge_scale)};
  const PrecisionOptions corr_opts{config.fallback, ridge_for(corr_reg.matrix, config.ridge_scale)};
  out.cov = precision(cov_reg.matrix, cov_opts);
  out.corr = precision(corr_reg.matrix, corr_opts);
  return out;
}

Eigen::MatrixXd centered_rows(const MatrixRef& samples, const Eigen::VectorXd& mu) {
  return samples.rowwise() - mu.transpose();
}

}  // namespace

Eigen::VectorXd centroid(const MatrixRef& samples) {
  if (samples.rows() == 0) throw Error(ErrorCode::EmptyClass, "centroid of an empty sample set");
  return samples.colwise().mean().transpose();
}

Eigen::MatrixXd covariance_mle(const MatrixRef& samples, bool unbiased) {
  const auto n = samples.rows();
  if (n == 0) throw Error(ErrorCode::EmptyClass, "covariance of an empty sample set");
  if (unbiased && n < 2) {
    throw Error(ErrorCode::InsufficientSamples, "unbiased covariance needs at least 2 samples");
  }
  const Eigen::MatrixXd residuals = centered_rows(samples, centroid(samples));
  const double norm = unbiased ? static_cast<double>(n - 1) : static_cast<double>(n);
  return symmetrized(residuals.transpose() * residuals / norm);
}

Eigen::MatrixXd correlation_matrix(const MatrixRef& covariance) {
  const auto d = covariance.rows();
  if (covariance.cols() != d) throw Error(ErrorCode::DimensionMismatch, "covariance must be square");
  Eigen::VectorXd sd(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double v = covariance(i, i);
    sd(i) = v > 0.0 ? std::sqrt(v) : 0.0;
  }
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    r(i, i) = 1.0;
    if (sd(i) == 0.0) continue;
    for (Eigen::Index j = i + 1; j < d; ++j) {
      if (sd(j) == 0.0) continue;
      const double v = covariance(i, j) / (sd(i) * sd(j));
      r(i, j) = v;
      r(j, i) = v;
    }
  }
  return r;
}

ShrunkCovariance shrink_ledoit_wolf_centered(const MatrixRef& residuals) {
  const auto n = residuals.rows();
  const auto d = residuals.cols();
  if (n < 2) {
    throw Error(ErrorCode::InsufficientSamples,
                "Ledoit-Wolf shrinkage needs at least 2 samples, got " + std::to_string(n));
  }
  const double nd = static_cast<double>(n);
  const Eigen::MatrixXd s = symmetrized(residuals.transpose() * residuals / nd);
  const double mu = s.trace() / static_cast<double>(d);
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(d, d);

  // Squared distance of S from its target, and the variance of the
  // per-observation outer products around S (both per dimension).
  const double delta = (s - mu * identity).squaredNorm() / static_cast<double>(d);
  const double s_norm2 = s.squaredNorm();
  const Eigen::VectorXd sq = residuals.rowwise().squaredNorm();
  const Eigen::VectorXd quad = (residuals * s).cwiseProduct(residuals).rowwise().sum();
  double beta_sum = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) beta_sum += sq(t) * sq(t) - 2.0 * quad(t) + s_norm2;
  const double beta_bar = std::max(0.0, beta_sum) / (nd * nd * static_cast<double>(d));

  double alpha = 0.0;
  if (delta > 0.0) alpha = std::min(beta_bar, delta) / delta;
  alpha = std::clamp(alpha, 0.0, 1.0);

  ShrunkCovariance out;
  out.coefficient = alpha;
  out.covariance = (1.0 - alpha) * s + alpha * mu * identity;
  return out;
}

ShrunkCovariance shrink_ledoit_wolf(const MatrixRef& samples) {
  if (samples.rows() < 2) {
    throw Error(ErrorCode::InsufficientSamples,
                "Ledoit-Wolf shrinkage needs at least 2 samples, got " +
                    std::to_string(samples.rows()));
  }
  return shrink_ledoit_wolf_centered(centered_rows(samples, centroid(samples)));
}

double symmetric_condition_number(const MatrixRef& matrix) {
  if (matrix.rows() == 0) return 1.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(matrix, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  const Eigen::VectorXd mags = eig.eigenvalues().cwiseAbs();
  const double hi = mags.maxCoeff();
  const double lo = mags.minCoeff();
  if (hi == 0.0) return std::numeric_limits<double>::infinity();
  if (lo == 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

Eigen::MatrixXd precision(const MatrixRef& matrix, PrecisionOptions options) {
  const auto d = matrix.rows();
  if (matrix.cols() != d) throw Error(ErrorCode::DimensionMismatch, "precision of a non-square matrix");
  if (!matrix.allFinite()) throw Error(ErrorCode::NumericalError, "matrix has non-finite entries");
  const Eigen::MatrixXd m = symmetrized(matrix);
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(d, d);

  if (symmetric_condition_number(m) <= kMaxDirectCondition) {
    return symmetrized(m.ldlt().solve(identity));
  }
  switch (options.mode) {
    case PrecisionMode::Direct:
      throw Error(ErrorCode::SingularMatrix,
                  "matrix is singular or too ill-conditioned for a direct inverse");
    case PrecisionMode::Ridge: {
      const Eigen::MatrixXd lifted = m + options.ridge_epsilon * identity;
      if (symmetric_condition_number(lifted) > kMaxDirectCondition) {
        throw Error(ErrorCode::SingularMatrix, "ridge-regularized matrix is still singular");
      }
      return symmetrized(lifted.ldlt().solve(identity));
    }
    case PrecisionMode::PseudoInverse: {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
      if (eig.info() != Eigen::Success) {
        throw Error(ErrorCode::NumericalError, "eigendecomposition failed");
      }
      const Eigen::VectorXd& lambda = eig.eigenvalues();
      const double cutoff = lambda.cwiseAbs().maxCoeff() / kMaxDirectCondition;
      Eigen::VectorXd inv = Eigen::VectorXd::Zero(d);
      for (Eigen::Index i = 0; i < d; ++i) {
        if (std::abs(lambda(i)) > cutoff) inv(i) = 1.0 / lambda(i);
      }
      const Eigen::MatrixXd& v = eig.eigenvectors();
      return symmetrized(v * inv.asDiagonal() * v.transpose());
    }
  }
  return {};
}

GeometryModel::GeometryModel(std::vector<ClassGeometry> geometries, GeometryConfig config)
    : geometries_(std::move(geometries)), config_(config) {
  std::sort(geometries_.begin(), geometries_.end(),
            [](const ClassGeometry& a, const ClassGeometry& b) { return a.label < b.label; });
  for (std::size_t i = 0; i < geometries_.size(); ++i) {
    if (i > 0 && geometries_[i].label == geometries_[i - 1].label) {
      throw Error(ErrorCode::InvalidArgument, "duplicate class '" + geometries_[i].label + "'");
    }
    const auto d = geometries_[i].centroid.size();
    if (i == 0) dim_ = d;
    if (d != dim_) throw Error(ErrorCode::DimensionMismatch, "class geometries disagree on dimension");
    labels_.push_back(geometries_[i].label);
  }
}

std::size_t GeometryModel::index_of(const std::string& label) const {
  const auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
  if (it == labels_.end() || *it != label) {
    throw Error(ErrorCode::UnknownClass, "class '" + label + "' is not in the model");
  }
  return static_cast<std::size_t>(it - labels_.begin());
}

bool GeometryModel::contains(const std::string& label) const noexcept {
  return std::binary_search(labels_.begin(), labels_.end(), label);
}

bool GeometryModel::has_precision() const noexcept {
  return !geometries_.empty() &&
         std::all_of(geometries_.begin(), geometries_.end(),
                     [](const ClassGeometry& g) { return g.has_precision(); });
}

ClassGeometry geometry_from_moments(std::string label, std::size_t count,
                                   const Eigen::VectorXd& mean,
                                   const Eigen::MatrixXd& covariance,
                                   const GeometryConfig& config) {
  if (covariance.rows() != mean.size() || covariance.cols() != mean.size()) {
    throw Error(ErrorCode::DimensionMismatch, "mean and covariance disagree on dimension");
  }
  ClassGeometry g;
  g.label = std::move(label);
  g.count = count;
  g.centroid = mean;
  g.covariance = symmetrized(covariance);
  g.correlation = correlation_matrix(g.covariance);
  if (config.with_precision) {
    auto p = make_precisions(g.covariance, g.correlation, nullptr, config);
    g.precision_cov = std::move(p.cov);
    g.precision_corr = std::move(p.corr);
    g.shrinkage_used = p.used;
  }
  return g;
}

GeometryModel fit(const EmbeddedDataset& dataset, const GeometryConfig& config) {
  if (dataset.empty()) throw Error(ErrorCode::EmptyDataset, "cannot fit an empty dataset");
  const auto& classes = dataset.classes();
  const auto counts = dataset.class_counts();
  const auto d = dataset.dim();

  if (config.with_precision && !config.pooled) {
    for (std::size_t c = 0; c < classes.size(); ++c) {
      if (counts[c] < 2) {
        throw Error(ErrorCode::InsufficientSamples,
                    "class '" + classes[c] + "' has " + std::to_string(counts[c]) +
                        " sample(s); Mahalanobis geometry needs 2 per class or pooled covariance");
      }
    }
  }

  std::vector<Eigen::MatrixXd> samples(classes.size());
  for (std::size_t c = 0; c < classes.size(); ++c) samples[c] = dataset.class_samples(classes[c]);

  std::vector<ClassGeometry> geometries(classes.size());
  detail::parallel_for(
      classes.size(),
      [&](std::size_t c) {
        auto& g = geometries[c];
        g.label = classes[c];
        g.count = counts[c];
        g.centroid = centroid(samples[c]);
        if (!config.pooled) {
          g.covariance = covariance_mle(samples[c], config.unbiased);
          g.correlation = correlation_matrix(g.covariance);
        }
      },
      1);

  if (config.pooled) {
    const auto n = static_cast<Eigen::Index>(dataset.size());
    Eigen::MatrixXd residuals(n, d);
    Eigen::Index row = 0;
    for (std::size_t c = 0; c < classes.size(); ++c) {
      const auto m = samples[c].rows();
      residuals.middleRows(row, m) = centered_rows(samples[c], geometries[c].centroid);
      row += m;
    }
    const auto k = static_cast<Eigen::Index>(classes.size());
    if (config.unbiased && n <= k) {
      throw Error(ErrorCode::InsufficientSamples, "unbiased pooled covariance needs N > K");
    }
    const double norm = config.unbiased ? static_cast<double>(n - k) : static_cast<double>(n);
    const Eigen::MatrixXd pooled = symmetrized(residuals.transpose() * residuals / norm);
    const Eigen::MatrixXd corr = correlation_matrix(pooled);
    Precisions p;
    if (config.with_precision) {
      ShrunkCovariance lw;
      const ShrunkCovariance* lw_ptr = nullptr;
      if (config.shrinkage == Shrinkage::LedoitWolf) {
        lw = shrink_ledoit_wolf_centered(residuals);
        if (config.unbiased) lw.covariance *= static_cast<double>(n) / norm;
        lw_ptr = &lw;
      }
      p = make_precisions(pooled, corr, lw_ptr, config);
    }
    for (auto& g : geometries) {
      g.covariance = pooled;
      g.correlation = corr;
      g.precision_cov = p.cov;
      g.precision_corr = p.corr;
      g.shrinkage_used = p.used;
    }
  } else if (config.with_precision) {
    detail::parallel_for(
        classes.size(),
        [&](std::size_t c) {
          auto& g = geometries[c];
          ShrunkCovariance lw;
          const ShrunkCovariance* lw_ptr = nullptr;
          if (config.shrinkage == Shrinkage::LedoitWolf) {
            lw = shrink_ledoit_wolf(samples[c]);
            if (config.unbiased) {
              const double n = static_cast<double>(g.count);
              lw.covariance *= n / (n - 1.0);
            }
            lw_ptr = &lw;
          }
          auto p = make_precisions(g.covariance, g.correlation, lw_ptr, config);
          g.precision_cov = std::move(p.cov);
          g.precision_corr = std::move(p.corr);
          g.shrinkage_used = p.used;
        },
        1);
  }
  return GeometryModel(std::move(geometries), config);
}

}  // namespace cmx
