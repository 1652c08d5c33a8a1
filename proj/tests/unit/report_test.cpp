#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cmx/errors.hpp"
#include "cmx/io.hpp"
#include "cmx/report.hpp"
#include "cmx/synth.hpp"

namespace cmx::io {
namespace {

namespace fs = std::filesystem;

Report sample_report(std::uint64_t seed) {
  const auto data = generate(preset(Preset::ThreeSingleOverlap), seed);
  const auto model = fit(data);
  Report r;
  r.config = {{"metric", "mahalanobis_cov"}, {"seed", std::to_string(seed)}};
  r.classes = model.labels();
  r.stats = dataset_stats(data, model, DistanceKind::MahalanobisCov);
  r.records = score_dataset(data, model, kAllDistanceKinds);
  const auto table = build_analysis_table(r.records);
  const std::vector<std::pair<std::string, std::string>> pairs;
  r.slices = find_all_slices(table, pairs);
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

TEST(ReportJson, RoundTripIsExact) {
  const auto report = sample_report(1);
  ASSERT_FALSE(report.slices.empty());
  std::stringstream buf;
  write_report_json(report, buf);
  const auto parsed = parse_report_json(buf);
  EXPECT_EQ(parsed, report);
  std::ostringstream again;
  write_report_json(parsed, again);
  EXPECT_EQ(again.str(), buf.str());
}

TEST(ReportJson, EmptySliceListIsPresent) {
  auto report = sample_report(2);
  report.slices.clear();
  std::ostringstream out;
  write_report_json(report, out);
  EXPECT_NE(out.str().find("\"slices\": []"), std::string::npos);
  EXPECT_NE(out.str().find("\"format_version\": \"cmx-report/1\""), std::string::npos);
}

TEST(ReportJson, MalformedInput) {
  std::istringstream in("{\"format_version\": \"cmx-report/1\"");
  EXPECT_THROW((void)parse_report_json(in), Error);
}

TEST(ReportCsv, BundleFiles) {
  const auto dir = fs::temp_directory_path() / "cmx_report_bundle";
  fs::remove_all(dir);
  auto report = sample_report(3);
  emit_report(report, parse_report_format("csv_bundle"), dir);
  for (const auto* name : {"stats.csv", "records.csv", "slices.csv"}) {
    EXPECT_TRUE(fs::exists(dir / name)) << name;
  }
  const auto stats = slurp(dir / "stats.csv");
  EXPECT_EQ(stats.rfind("key,value\nnum_classes,3\nnum_samples,1500\n", 0), 0u);
  const auto slices = slurp(dir / "slices.csv");
  EXPECT_EQ(slices.rfind("features,slice,accuracy,size,rank,errors,error_precision,error_recall\n", 0), 0u);

  std::ifstream records(dir / "records.csv");
  const auto parsed = parse_records_csv(records);
  EXPECT_EQ(parsed.classes, report.classes);
  EXPECT_EQ(parsed.records, report.records);
  fs::remove_all(dir);
}

TEST(ReportCsv, SliceRangesAreTildeSeparated) {
  Slice s;
  s.features = {"compl_mah", "x1"};
  s.ranges = {{0.5, 1.25}, {-2, 0}};
  s.support = 12;
  s.errors = 6;
  s.slice_accuracy = 0.5;
  s.error_precision = 0.5;
  s.error_recall = 1;
  s.rank = 2.0 / 3.0;
  std::ostringstream out;
  write_slices_csv({s}, out);
  EXPECT_NE(out.str().find("\"compl_mah,x1\",0.5 ~ 1.25; -2 ~ 0,0.5,12,0.66666666666666663,6,0.5,1\n"),
            std::string::npos);
}

TEST(ModelJson, RoundTripScoresIdentically) {
  const auto data = generate(preset(Preset::CircleEllipse), 4);
  GeometryConfig config;
  config.unbiased = true;
  const auto model = fit(data, config);
  std::stringstream buf;
  write_model_json(model, buf);
  const auto parsed = parse_model_json(buf);
  EXPECT_EQ(parsed.labels(), model.labels());
  EXPECT_EQ(parsed.config(), model.config());
  EXPECT_EQ(score_dataset(data, parsed, kAllDistanceKinds), score_dataset(data, model, kAllDistanceKinds));
}

TEST(Formats, ParseNames) {
  EXPECT_EQ(parse_report_format("json"), ReportFormat::Json);
  EXPECT_EQ(parse_report_format("csv"), ReportFormat::CsvBundle);
  EXPECT_EQ(parse_shrinkage("lw"), Shrinkage::LedoitWolf);
  EXPECT_EQ(to_string(Shrinkage::Ridge), "ridge");
  EXPECT_THROW((void)parse_report_format("xml"), Error);
}

}  // namespace
}  // namespace cmx::io
