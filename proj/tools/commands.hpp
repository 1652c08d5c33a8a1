#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cmx::cli {

/// Flags shared by every subcommand.
struct GlobalOptions {
  std::string metric = "mahalanobis_cov";
  std::string shrinkage = "ledoit_wolf";
  std::uint64_t seed = 0;
  std::optional<double> split;  // train fraction; unset means no split
  std::optional<std::size_t> min_support;
  std::size_t grid = 32;
  std::string predictions;
  std::string output;
  std::string format;
  bool pooled = false;
  bool unbiased = false;
  bool literal_cosine = false;
};

struct SynthOptions {
  std::string preset;
};

struct DataOptions {
  std::string data;
  std::string model;
  std::vector<std::string> kinds;
};

struct SlicesOptions {
  std::string records;
  std::string data;
  std::size_t max_results = 20;
  std::size_t coordinate_dims = 2;
};

struct HeatmapOptions {
  std::string data;
  std::string model;
  std::string preset;
  std::vector<double> x_range;
  std::vector<double> y_range;
  std::vector<std::size_t> resolution{101, 101};
  std::string label;
  std::string value = "complexity";
};

int run_synth(const GlobalOptions& g, const SynthOptions& o);
int run_stats(const GlobalOptions& g, const DataOptions& o);
int run_fit(const GlobalOptions& g, const DataOptions& o);
int run_score(const GlobalOptions& g, const DataOptions& o);
int run_slices(const GlobalOptions& g, const SlicesOptions& o);
int run_heatmap(const GlobalOptions& g, const HeatmapOptions& o);
int run_report(const GlobalOptions& g, const DataOptions& d, const SlicesOptions& s);

}  // namespace cmx::cli
