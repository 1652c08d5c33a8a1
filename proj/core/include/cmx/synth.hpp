#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cmx/analysis.hpp"
#include "cmx/dataset.hpp"
#include "cmx/geometry.hpp"
#include "cmx/scoring.hpp"

namespace cmx {

/// Seeded generator with a fixed algorithm: std::mt19937_64 (bit-exact by the
/// standard) feeding hand-written uniform and normal transforms, so streams do
/// not depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via the Marsaglia polar method.
  double normal();
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

/// SplitMix64 finalizer, used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

struct GaussianSpec {
  std::string label;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  std::size_t count = 0;
};

/// Draws count samples per spec as mean + L z with L a Cholesky factor of the
/// covariance. Rows are grouped by spec in spec order; ids are "<label>_<k>".
/// Throws InvalidSpec on fewer than two specs, count < 2, or a covariance
/// that is not symmetric positive semi-definite.
EmbeddedDataset generate(const std::vector<GaussianSpec>& specs, std::uint64_t seed);

enum class Preset { TwoEqual, CircleEllipse, ThreeSingleOverlap, ThreeTwoOverlaps };

Preset parse_preset(std::string_view name);
std::string_view to_string(Preset preset) noexcept;
/// Frozen 2-D class parameters for each synthetic experiment.
std::vector<GaussianSpec> preset(Preset which);

/// Geometry model built directly from generating parameters.
GeometryModel model_from_specs(const std::vector<GaussianSpec>& specs,
                               const GeometryConfig& config = {});

enum class HeatmapValue { Complexity, Confidence };

struct HeatmapGrid {
  Interval x_range;
  Interval y_range;
  std::size_t nx = 0;
  std::size_t ny = 0;
  DistanceKind kind = DistanceKind::MahalanobisCov;
  HeatmapValue value = HeatmapValue::Complexity;
  /// Row-major: values[iy * nx + ix] at (x(ix), y(iy)).
  std::vector<double> values;

  [[nodiscard]] double x(std::size_t ix) const noexcept;
  [[nodiscard]] double y(std::size_t iy) const noexcept;
  [[nodiscard]] double at(std::size_t ix, std::size_t iy) const { return values.at(iy * nx + ix); }
};

struct HeatmapOptions {
  DistanceKind kind = DistanceKind::MahalanobisCov;
  HeatmapValue value = HeatmapValue::Complexity;
  /// Score every point against this class; by default each point is scored
  /// against its own baseline prediction (the minimum complexity over classes).
  std::optional<std::string> fixed_label;
  ScoringOptions scoring;
};

/// Evaluates complexity (or baseline confidence exp(-h)) exactly at each
/// point of an nx by ny grid spanning the closed ranges. Requires a 2-D model.
HeatmapGrid heatmap(const GeometryModel& model, Interval x_range, Interval y_range,
                    std::size_t nx, std::size_t ny, const HeatmapOptions& options = {});

}  // namespace cmx
