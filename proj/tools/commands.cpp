#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <unordered_map>

#include "cmx/cmx.hpp"

namespace cmx::cli {

namespace {

GeometryConfig geometry_config(const GlobalOptions& g) {
  GeometryConfig c;
  c.shrinkage = io::parse_shrinkage(g.shrinkage);
  c.pooled = g.pooled;
  c.unbiased = g.unbiased;
  return c;
}

ScoringOptions scoring_options(const GlobalOptions& g) { return ScoringOptions{g.literal_cosine}; }

std::vector<DistanceKind> kinds_from(const std::vector<std::string>& names, DistanceKind metric) {
  std::vector<DistanceKind> kinds;
  if (names.empty()) {
    kinds.assign(kAllDistanceKinds.begin(), kAllDistanceKinds.end());
  } else {
    for (const auto& n : names) kinds.push_back(parse_distance_kind(n));
  }
  if (std::find(kinds.begin(), kinds.end(), metric) == kinds.end()) kinds.push_back(metric);
  std::sort(kinds.begin(), kinds.end());
  kinds.erase(std::unique(kinds.begin(), kinds.end()), kinds.end());
  return kinds;
}

// Writes through `fn` to --output, or to stdout when no output is given.
template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  auto out = io::open_output(path);
  fn(out);
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path + "'");
}

struct Prepared {
  EmbeddedDataset fit_set;
  EmbeddedDataset score_set;
  GeometryModel model;
};

// Loads data and resolves the fitted model: an explicit --model, otherwise a
// fit on the data (or on its training part when --split is given, in which
// case the held-out part is scored).
Prepared prepare(const GlobalOptions& g, const DataOptions& o) {
  if (o.data.empty()) throw Error(ErrorCode::InvalidArgument, "--data is required");
  Prepared p;
  auto data = io::read_dataset(o.data);
  if (g.split) {
    auto parts = io::split(data, io::SplitSpec{*g.split, g.seed, true});
    p.fit_set = std::move(parts.train);
    p.score_set = std::move(parts.test);
  } else {
    p.fit_set = data;
    p.score_set = std::move(data);
  }
  if (!o.model.empty()) {
    auto in = io::open_input(o.model);
    p.model = io::parse_model_json(in);
  } else {
    p.fit_set.require_classification();
    p.model = fit(p.fit_set, geometry_config(g));
  }
  return p;
}

std::map<std::string, std::string> config_echo(const GlobalOptions& g, std::size_t min_support,
                                               const std::vector<DistanceKind>& kinds) {
  std::string kind_list;
  for (auto k : kinds) kind_list += (kind_list.empty() ? "" : ",") + std::string(to_string(k));
  return {{"metric", std::string(to_string(parse_distance_kind(g.metric)))},
          {"kinds", kind_list},
          {"shrinkage", g.shrinkage},
          {"pooled", g.pooled ? "true" : "false"},
          {"unbiased", g.unbiased ? "true" : "false"},
          {"literal_cosine", g.literal_cosine ? "true" : "false"},
          {"seed", std::to_string(g.seed)},
          {"split", g.split ? io::format_double(*g.split) : "none"},
          {"min_support", std::to_string(min_support)},
          {"grid", std::to_string(g.grid)},
          {"predictions", g.predictions.empty() ? "none" : "external"}};
}

struct SliceRun {
  std::vector<Slice> slices;
  std::size_t min_support = 0;
};

SliceRun run_slice_search(const GlobalOptions& g, const std::vector<ComplexityRecord>& records,
                          const Eigen::MatrixXd* coordinates, std::size_t max_results) {
  std::optional<io::PredictionsFile> predictions;
  if (!g.predictions.empty()) predictions = io::read_predictions(g.predictions);
  io::AnalysisInputs inputs;
  inputs.error_kind = parse_distance_kind(g.metric);
  inputs.predictions = predictions ? &*predictions : nullptr;
  inputs.coordinates = coordinates;
  const auto table = io::build_analysis_table(records, inputs);

  SliceSearchOptions opts;
  opts.min_support = g.min_support.value_or(default_min_support(table.size()));
  opts.grid = g.grid;
  opts.max_results = max_results;
  std::vector<std::pair<std::string, std::string>> pairs;
  if (coordinates != nullptr && coordinates->cols() == 2) pairs.emplace_back("x1", "x2");
  return {find_all_slices(table, pairs, opts), opts.min_support};
}

// Coordinates of each record, looked up by id, when the data is low-dimensional.
std::optional<Eigen::MatrixXd> coordinates_for(const std::vector<ComplexityRecord>& records,
                                               const EmbeddedDataset& data, std::size_t max_dims) {
  if (data.dim() > static_cast<Eigen::Index>(max_dims)) return std::nullopt;
  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < data.size(); ++i) row_of.emplace(data.ids()[i], i);
  Eigen::MatrixXd coords(static_cast<Eigen::Index>(records.size()), data.dim());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto it = row_of.find(records[i].id);
    if (it == row_of.end()) {
      throw Error(ErrorCode::JoinError, "record id '" + records[i].id + "' not found in --data");
    }
    coords.row(static_cast<Eigen::Index>(i)) = data.vectors().row(static_cast<Eigen::Index>(it->second));
  }
  return coords;
}

void require_format(const GlobalOptions& g, std::initializer_list<std::string_view> allowed) {
  if (g.format.empty()) return;
  for (auto a : allowed) {
    if (g.format == a) return;
  }
  throw Error(ErrorCode::InvalidArgument, "unsupported --format '" + g.format + "' for this command");
}

}  // namespace

int run_synth(const GlobalOptions& g, const SynthOptions& o) {
  require_format(g, {"csv", "bin"});
  const auto specs = preset(parse_preset(o.preset));
  const auto data = generate(specs, g.seed);
  if (g.format == "bin") {
    if (g.output.empty()) throw Error(ErrorCode::InvalidArgument, "binary output needs --output");
    io::write_dataset(data, g.output, io::DatasetFormat::Binary);
  } else {
    with_output(g.output, [&](std::ostream& out) { io::write_dataset_csv(data, out); });
  }
  return 0;
}

int run_stats(const GlobalOptions& g, const DataOptions& o) {
  require_format(g, {"csv", "json"});
  const auto p = prepare(g, o);
  const auto stats = dataset_stats(p.score_set, p.model, parse_distance_kind(g.metric), scoring_options(g));
  with_output(g.output, [&](std::ostream& out) {
    if (g.format == "json") {
      io::Report r;
      r.config = config_echo(g, 0, {});
      r.classes = p.model.labels();
      r.stats = stats;
      io::write_report_json(r, out);
    } else {
      io::write_stats_csv(stats, out);
    }
  });
  return 0;
}

int run_fit(const GlobalOptions& g, const DataOptions& o) {
  require_format(g, {"json"});
  DataOptions fit_only = o;
  fit_only.model.clear();
  const auto p = prepare(g, fit_only);
  with_output(g.output, [&](std::ostream& out) { io::write_model_json(p.model, out); });
  return 0;
}

int run_score(const GlobalOptions& g, const DataOptions& o) {
  require_format(g, {"csv"});
  const auto p = prepare(g, o);
  const auto kinds = kinds_from(o.kinds, parse_distance_kind(g.metric));
  const auto records = score_dataset(p.score_set, p.model, kinds, scoring_options(g));
  with_output(g.output, [&](std::ostream& out) { io::write_records_csv(records, p.model.labels(), out); });
  return 0;
}

int run_slices(const GlobalOptions& g, const SlicesOptions& o) {
  require_format(g, {"csv", "json"});
  if (o.records.empty()) throw Error(ErrorCode::InvalidArgument, "--records is required");
  io::RecordsFile rf;
  {
    auto in = io::open_input(o.records);
    rf = io::parse_records_csv(in);
  }
  std::optional<Eigen::MatrixXd> coords;
  if (!o.data.empty()) coords = coordinates_for(rf.records, io::read_dataset(o.data), o.coordinate_dims);
  const auto run = run_slice_search(g, rf.records, coords ? &*coords : nullptr, o.max_results);
  with_output(g.output, [&](std::ostream& out) {
    if (g.format == "json") {
      io::Report r;
      r.config = config_echo(g, run.min_support, {});
      r.classes = rf.classes;
      r.slices = run.slices;
      io::write_report_json(r, out);
    } else {
      io::write_slices_csv(run.slices, out);
    }
  });
  return 0;
}

int run_heatmap(const GlobalOptions& g, const HeatmapOptions& o) {
  require_format(g, {"csv"});
  GeometryModel model;
  if (!o.preset.empty()) {
    model = model_from_specs(preset(parse_preset(o.preset)), geometry_config(g));
  } else if (!o.model.empty()) {
    auto in = io::open_input(o.model);
    model = io::parse_model_json(in);
  } else if (!o.data.empty()) {
    DataOptions d{o.data, {}, {}};
    model = prepare(g, d).model;
  } else {
    throw Error(ErrorCode::InvalidArgument, "heatmap needs --preset, --model or --data");
  }
  if (model.dim() != 2) throw Error(ErrorCode::DimensionMismatch, "heatmap needs a 2-D model");

  // Default window: every centroid padded by four standard deviations of the widest class.
  double spread = 0.0;
  Eigen::Vector2d lo = Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector2d hi = -lo;
  for (const auto& geo : model.geometries()) {
    spread = std::max(spread, std::sqrt(geo.covariance.diagonal().maxCoeff()));
    lo = lo.cwiseMin(geo.centroid);
    hi = hi.cwiseMax(geo.centroid);
  }
  const double pad = 4.0 * std::max(spread, 1e-3);
  const auto range = [](const std::vector<double>& given, double a, double b) {
    if (given.empty()) return Interval{a, b};
    if (given.size() != 2) throw Error(ErrorCode::InvalidArgument, "ranges take two values: lo hi");
    return Interval{given[0], given[1]};
  };
  if (o.resolution.size() != 2) throw Error(ErrorCode::InvalidArgument, "--resolution takes nx ny");

  cmx::HeatmapOptions opts;
  opts.kind = parse_distance_kind(g.metric);
  opts.scoring = scoring_options(g);
  if (!o.label.empty()) opts.fixed_label = o.label;
  if (o.value == "confidence") {
    opts.value = HeatmapValue::Confidence;
  } else if (o.value != "complexity") {
    throw Error(ErrorCode::InvalidArgument, "--value must be complexity or confidence");
  }
  const auto grid = heatmap(model, range(o.x_range, lo(0) - pad, hi(0) + pad),
                            range(o.y_range, lo(1) - pad, hi(1) + pad), o.resolution[0],
                            o.resolution[1], opts);
  with_output(g.output, [&](std::ostream& out) { io::write_heatmap_csv(grid, out); });
  return 0;
}

int run_report(const GlobalOptions& g, const DataOptions& d, const SlicesOptions& s) {
  const auto format = io::parse_report_format(g.format.empty() ? "json" : g.format);
  if (g.output.empty()) throw Error(ErrorCode::InvalidArgument, "report needs --output");
  const auto p = prepare(g, d);
  const auto metric = parse_distance_kind(g.metric);
  const auto kinds = kinds_from(d.kinds, metric);

  io::Report report;
  report.classes = p.model.labels();
  report.stats = dataset_stats(p.score_set, p.model, metric, scoring_options(g));
  report.records = score_dataset(p.score_set, p.model, kinds, scoring_options(g));
  const auto coords = coordinates_for(report.records, p.score_set, s.coordinate_dims);
  auto run = run_slice_search(g, report.records, coords ? &*coords : nullptr, s.max_results);
  report.slices = std::move(run.slices);
  report.config = config_echo(g, run.min_support, kinds);
  io::emit_report(report, format, g.output);
  return 0;
}

}  // namespace cmx::cli
