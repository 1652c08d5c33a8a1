// cmx: per-sample classification complexity, baseline accuracy and error slices.

#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "cmx/errors.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace cmx::cli;

  CLI::App app{"Class-geometry complexity scoring, baseline classifier and error-slice mining"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--metric", g.metric,
                 "Distance for the baseline classifier: euclidean, cosine, mahalanobis_cov, mahalanobis_corr")
      ->capture_default_str();
  app.add_option("--shrinkage", g.shrinkage, "Covariance regularization: ledoit_wolf, ridge, none")
      ->capture_default_str();
  app.add_option("--seed", g.seed, "Random seed for synthesis and splitting")->capture_default_str();
  app.add_option("--split", g.split, "Train fraction; fit on the train part and score the rest")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--min-support", g.min_support, "Minimum slice size (default max(10, 1% of rows))");
  app.add_option("--grid", g.grid, "Quantile bins per feature for 2-D slices")->capture_default_str();
  app.add_option("--predictions", g.predictions, "External predictions CSV: id,predicted_label[,confidence]");
  app.add_option("--output,-o", g.output, "Output file (directory for csv_bundle); stdout when omitted");
  app.add_option("--format", g.format, "Output format (synth: csv|bin, report: json|csv_bundle, ...)");
  app.add_flag("--pooled", g.pooled, "Share one pooled covariance across classes");
  app.add_flag("--unbiased", g.unbiased, "Normalize covariance by n-1 instead of n");
  app.add_flag("--literal-cosine", g.literal_cosine, "Use raw cosine similarity instead of 1 - similarity");

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a seeded synthetic 2-D dataset");
  synth_cmd->add_option("--preset", synth.preset,
                        "two_equal, circle_ellipse, three_single_overlap, three_two_overlaps")
      ->required();

  DataOptions stats_opts;
  auto* stats_cmd = app.add_subcommand("stats", "Class counts, normalized entropy, median class size, baseline accuracy");
  stats_cmd->add_option("--data", stats_opts.data, "Dataset file (CSV or CPLX1)")->required();
  stats_cmd->add_option("--model", stats_opts.model, "Fitted model JSON (fits on --data otherwise)");

  DataOptions fit_opts;
  auto* fit_cmd = app.add_subcommand("fit", "Fit per-class geometry and write it as JSON");
  fit_cmd->add_option("--data", fit_opts.data, "Dataset file (CSV or CPLX1)")->required();

  DataOptions score_opts;
  auto* score_cmd = app.add_subcommand("score", "Per-sample distances, complexity and baseline predictions");
  score_cmd->add_option("--data", score_opts.data, "Dataset to score")->required();
  score_cmd->add_option("--model", score_opts.model, "Fitted model JSON (fits on --data otherwise)");
  score_cmd->add_option("--kinds", score_opts.kinds, "Distance kinds to score (default all)")->delimiter(',');

  SlicesOptions slice_opts;
  auto* slices_cmd = app.add_subcommand("slices", "Mine ranked error-concentration slices from scored records");
  slices_cmd->add_option("--records", slice_opts.records, "Records CSV written by `score`")->required();
  slices_cmd->add_option("--data", slice_opts.data, "Dataset for coordinate columns x1, x2, ...");
  slices_cmd->add_option("--max-results", slice_opts.max_results, "Slices kept per feature or pair")
      ->capture_default_str();
  slices_cmd->add_option("--coordinate-dims", slice_opts.coordinate_dims,
                         "Add coordinates as features only up to this dimension")
      ->capture_default_str();

  HeatmapOptions heat;
  auto* heat_cmd = app.add_subcommand("heatmap", "Evaluate complexity on a dense 2-D grid");
  heat_cmd->add_option("--preset", heat.preset, "Use the exact generating parameters of a preset");
  heat_cmd->add_option("--model", heat.model, "Fitted 2-D model JSON");
  heat_cmd->add_option("--data", heat.data, "2-D dataset to fit");
  heat_cmd->add_option("--x-range", heat.x_range, "lo hi")->expected(2);
  heat_cmd->add_option("--y-range", heat.y_range, "lo hi")->expected(2);
  heat_cmd->add_option("--resolution", heat.resolution, "nx ny")->expected(2)->capture_default_str();
  heat_cmd->add_option("--label", heat.label, "Score every point against this class");
  heat_cmd->add_option("--value", heat.value, "complexity or confidence")->capture_default_str();

  DataOptions report_data;
  SlicesOptions report_slices;
  auto* report_cmd = app.add_subcommand("report", "Stats, records and slices in one report");
  report_cmd->add_option("--data", report_data.data, "Dataset file")->required();
  report_cmd->add_option("--model", report_data.model, "Fitted model JSON (fits on --data otherwise)");
  report_cmd->add_option("--kinds", report_data.kinds, "Distance kinds to score (default all)")->delimiter(',');
  report_cmd->add_option("--max-results", report_slices.max_results, "Slices kept per feature or pair")
      ->capture_default_str();
  report_cmd->add_option("--coordinate-dims", report_slices.coordinate_dims,
                         "Add coordinates as features only up to this dimension")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*synth_cmd) return run_synth(g, synth);
    if (*stats_cmd) return run_stats(g, stats_opts);
    if (*fit_cmd) return run_fit(g, fit_opts);
    if (*score_cmd) return run_score(g, score_opts);
    if (*slices_cmd) return run_slices(g, slice_opts);
    if (*heat_cmd) return run_heatmap(g, heat);
    if (*report_cmd) return run_report(g, report_data, report_slices);
  } catch (const cmx::Error& e) {
    std::cerr << "cmx: " << e.what() << '\n';
    return cmx::exit_code_for(e.category());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "cmx: " << e.what() << '\n';
    return cmx::exit_code_for(cmx::ErrorCategory::Io);
  } catch (const std::exception& e) {
    std::cerr << "cmx: internal error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
