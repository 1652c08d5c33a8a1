#include "cmx/synth.hpp"

#include <cmath>
#include <limits>

#include "cmx/errors.hpp"
#include "cmx/parallel.hpp"

namespace cmx {

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  double u = 0.0;
  double v = 0.0;
  double s = 0.0;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * scale;
  return u * scale;
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) return 0;
  // Rejection keeps the result unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r = 0;
  do {
    r = engine_();
  } while (r >= limit);
  return r % bound;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

Eigen::MatrixXd sampling_factor(const GaussianSpec& spec) {
  const auto d = spec.mean.size();
  const auto& cov = spec.covariance;
  if (d < 1 || cov.rows() != d || cov.cols() != d) {
    throw Error(ErrorCode::InvalidSpec, "spec '" + spec.label + "': mean/covariance shape mismatch");
  }
  if (!cov.allFinite() || !spec.mean.allFinite()) {
    throw Error(ErrorCode::InvalidSpec, "spec '" + spec.label + "' has non-finite parameters");
  }
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw Error(ErrorCode::InvalidSpec, "spec '" + spec.label + "': covariance is not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) return llt.matrixL();

  // Semi-definite covariances have no Cholesky factor; use the symmetric square root.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::VectorXd lambda = eig.eigenvalues();
  if (lambda.minCoeff() < -1e-12 * std::max(1.0, lambda.cwiseAbs().maxCoeff())) {
    throw Error(ErrorCode::InvalidSpec,
                "spec '" + spec.label + "': covariance is not positive semi-definite");
  }
  const Eigen::VectorXd root = lambda.cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

Eigen::MatrixXd rotated(double major_var, double minor_var, double degrees) {
  const double t = degrees * 3.14159265358979323846 / 180.0;
  Eigen::Matrix2d r;
  r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  const Eigen::Matrix2d diag = Eigen::Vector2d(major_var, minor_var).asDiagonal();
  Eigen::Matrix2d out = r * diag * r.transpose();
  out(0, 1) = out(1, 0) = 0.5 * (out(0, 1) + out(1, 0));
  return out;
}

GaussianSpec spec2(std::string label, double mx, double my, Eigen::MatrixXd cov, std::size_t n) {
  return GaussianSpec{std::move(label), Eigen::Vector2d(mx, my), std::move(cov), n};
}

}  // namespace

EmbeddedDataset generate(const std::vector<GaussianSpec>& specs, std::uint64_t seed) {
  if (specs.size() < 2) throw Error(ErrorCode::InvalidSpec, "need at least two Gaussian specs");
  const auto d = specs.front().mean.size();
  std::vector<Eigen::MatrixXd> factors;
  std::size_t total = 0;
  for (const auto& s : specs) {
    if (s.count < 2) throw Error(ErrorCode::InvalidSpec, "spec '" + s.label + "' needs count >= 2");
    if (s.mean.size() != d) throw Error(ErrorCode::InvalidSpec, "specs disagree on dimension");
    factors.push_back(sampling_factor(s));
    total += s.count;
  }

  std::vector<std::size_t> offsets(specs.size(), 0);
  for (std::size_t k = 1; k < specs.size(); ++k) offsets[k] = offsets[k - 1] + specs[k - 1].count;

  Eigen::MatrixXd vectors(static_cast<Eigen::Index>(total), d);
  std::vector<std::string> ids(total);
  std::vector<std::string> labels(total);
  detail::parallel_for(
      specs.size(),
      [&](std::size_t k) {
        const auto& s = specs[k];
        Rng rng(mix_seed(seed, k));
        Eigen::VectorXd z(d);
        for (std::size_t i = 0; i < s.count; ++i) {
          for (Eigen::Index j = 0; j < d; ++j) z(j) = rng.normal();
          const auto row = static_cast<Eigen::Index>(offsets[k] + i);
          vectors.row(row) = (s.mean + factors[k] * z).transpose();
          ids[offsets[k] + i] = s.label + "_" + std::to_string(i);
          labels[offsets[k] + i] = s.label;
        }
      },
      1);
  return {std::move(ids), std::move(labels), std::move(vectors)};
}

Preset parse_preset(std::string_view name) {
  if (name == "two_equal") return Preset::TwoEqual;
  if (name == "circle_ellipse") return Preset::CircleEllipse;
  if (name == "three_single_overlap") return Preset::ThreeSingleOverlap;
  if (name == "three_two_overlaps") return Preset::ThreeTwoOverlaps;
  throw Error(ErrorCode::UnknownPreset, "unknown preset '" + std::string(name) + "'");
}

std::string_view to_string(Preset preset) noexcept {
  switch (preset) {
    case Preset::TwoEqual: return "two_equal";
    case Preset::CircleEllipse: return "circle_ellipse";
    case Preset::ThreeSingleOverlap: return "three_single_overlap";
    case Preset::ThreeTwoOverlaps: return "three_two_overlaps";
  }
  return "unknown";
}

std::vector<GaussianSpec> preset(Preset which) {
  const Eigen::MatrixXd unit = Eigen::Matrix2d::Identity();
  switch (which) {
    case Preset::TwoEqual:
      // Mirror images under x -> -x; Bayes accuracy Phi(1.55) ~ 0.939.
      return {spec2("c0", -1.55, 0.0, unit, 500), spec2("c1", 1.55, 0.0, unit, 500)};
    case Preset::CircleEllipse:
      // Ellipse axis standard deviations 2.4 and 0.6 (ratio 4), tilted 45 degrees.
      return {spec2("c0", 0.0, 0.0, unit, 500),
              spec2("c1", 2.2, 0.0, rotated(5.76, 0.36, 45.0), 500)};
    case Preset::ThreeSingleOverlap:
      // Equilateral triangle of unit circles around the origin, radius 1.83.
      return {spec2("c0", 0.0, 1.83, unit, 500), spec2("c1", -1.5848, -0.915, unit, 500),
              spec2("c2", 1.5848, -0.915, unit, 500)};
    case Preset::ThreeTwoOverlaps:
      // Round c0 overlaps the left tips of two horizontal ellipses that do not touch each other.
      return {spec2("c0", 0.0, 0.0, unit, 500),
              spec2("c1", 3.5, 2.2, rotated(4.0, 0.25, 0.0), 500),
              spec2("c2", 3.5, -2.2, rotated(4.0, 0.25, 0.0), 500)};
  }
  throw Error(ErrorCode::UnknownPreset, "unknown preset");
}

GeometryModel model_from_specs(const std::vector<GaussianSpec>& specs, const GeometryConfig& config) {
  std::vector<ClassGeometry> geometries;
  geometries.reserve(specs.size());
  for (const auto& s : specs) {
    geometries.push_back(geometry_from_moments(s.label, s.count, s.mean, s.covariance, config));
  }
  return GeometryModel(std::move(geometries), config);
}

double HeatmapGrid::x(std::size_t ix) const noexcept {
  if (nx < 2) return 0.5 * (x_range.lo + x_range.hi);
  return x_range.lo + (x_range.hi - x_range.lo) * static_cast<double>(ix) / static_cast<double>(nx - 1);
}

double HeatmapGrid::y(std::size_t iy) const noexcept {
  if (ny < 2) return 0.5 * (y_range.lo + y_range.hi);
  return y_range.lo + (y_range.hi - y_range.lo) * static_cast<double>(iy) / static_cast<double>(ny - 1);
}

HeatmapGrid heatmap(const GeometryModel& model, Interval x_range, Interval y_range, std::size_t nx,
                    std::size_t ny, const HeatmapOptions& options) {
  if (model.dim() != 2) {
    throw Error(ErrorCode::DimensionMismatch,
                "heatmap needs a 2-D model, got dimension " + std::to_string(model.dim()));
  }
  if (nx == 0 || ny == 0) throw Error(ErrorCode::InvalidArgument, "heatmap resolution must be positive");
  if (!(x_range.lo <= x_range.hi) || !(y_range.lo <= y_range.hi)) {
    throw Error(ErrorCode::InvalidArgument, "heatmap ranges must satisfy lo <= hi");
  }
  if (model.num_classes() < 2) throw Error(ErrorCode::InvalidArgument, "heatmap needs two classes");
  std::optional<std::size_t> fixed;
  if (options.fixed_label) fixed = model.index_of(*options.fixed_label);

  HeatmapGrid grid;
  grid.x_range = x_range;
  grid.y_range = y_range;
  grid.nx = nx;
  grid.ny = ny;
  grid.kind = options.kind;
  grid.value = options.value;
  grid.values.assign(nx * ny, 0.0);
  detail::parallel_for(
      ny,
      [&](std::size_t iy) {
        Eigen::MatrixXd points(static_cast<Eigen::Index>(nx), 2);
        for (std::size_t ix = 0; ix < nx; ++ix) points.row(static_cast<Eigen::Index>(ix)) << grid.x(ix), grid.y(iy);
        const Eigen::MatrixXd dm = distance_matrix(points, model, options.kind, options.scoring);
        std::vector<double> d(model.num_classes());
        for (std::size_t ix = 0; ix < nx; ++ix) {
          for (std::size_t c = 0; c < d.size(); ++c) {
            d[c] = dm(static_cast<Eigen::Index>(ix), static_cast<Eigen::Index>(c));
          }
          const std::size_t label = fixed ? *fixed : argmin_index(d);
          const double h = complexity_from_distances(d, label);
          grid.values[iy * nx + ix] = options.value == HeatmapValue::Complexity ? h : std::exp(-h);
        }
      },
      4);
  return grid;
}

}  // namespace cmx
