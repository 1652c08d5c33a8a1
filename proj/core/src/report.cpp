#include "cmx/report.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "cmx/errors.hpp"
#include "cmx/io.hpp"
#include "json.hpp"

namespace cmx::io {

using Json = nlohmann::ordered_json;

namespace {

std::string short_name(DistanceKind kind) {
  return std::string(column_name(kind).substr(std::string_view("compl_").size()));
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return {};
  const auto cols = static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw Error(ErrorCode::ParseError, "ragged matrix in JSON");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

Json vector_to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from_json(const Json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j.at(i).get<double>();
  return v;
}

std::string_view to_string(PrecisionMode mode) noexcept {
  switch (mode) {
    case PrecisionMode::Direct: return "direct";
    case PrecisionMode::PseudoInverse: return "pseudo_inverse";
    case PrecisionMode::Ridge: return "ridge";
  }
  return "unknown";
}

PrecisionMode parse_precision_mode(std::string_view text) {
  if (text == "direct") return PrecisionMode::Direct;
  if (text == "pseudo_inverse") return PrecisionMode::PseudoInverse;
  if (text == "ridge") return PrecisionMode::Ridge;
  throw Error(ErrorCode::ParseError, "unknown precision mode '" + std::string(text) + "'");
}

Json stats_to_json(const DatasetStats& s) {
  Json counts = Json::object();
  for (const auto& [label, n] : s.class_counts) counts[label] = n;
  return Json{{"num_classes", s.num_classes},
              {"num_samples", s.num_samples},
              {"normalized_entropy", s.normalized_entropy},
              {"median_class_size", s.median_class_size},
              {"baseline_accuracy", s.baseline_accuracy},
              {"class_counts", std::move(counts)}};
}

DatasetStats stats_from_json(const Json& j) {
  DatasetStats s;
  s.num_classes = j.at("num_classes").get<std::size_t>();
  s.num_samples = j.at("num_samples").get<std::size_t>();
  s.normalized_entropy = j.at("normalized_entropy").get<double>();
  s.median_class_size = j.at("median_class_size").get<std::size_t>();
  s.baseline_accuracy = j.at("baseline_accuracy").get<double>();
  for (const auto& [label, n] : j.at("class_counts").items()) s.class_counts[label] = n.get<std::size_t>();
  return s;
}

Json record_to_json(const ComplexityRecord& r) {
  Json scores = Json::object();
  for (const auto& [kind, s] : r.scores) {
    scores[std::string(to_string(kind))] = Json{{"complexity", s.complexity},
                                                {"prediction", s.prediction},
                                                {"prediction_nll", s.prediction_nll},
                                                {"distances", s.distances}};
  }
  Json out{{"id", r.id}, {"true_label", r.true_label}, {"scores", std::move(scores)}};
  out["ood_score"] = r.ood_score ? Json(*r.ood_score) : Json(nullptr);
  return out;
}

ComplexityRecord record_from_json(const Json& j) {
  ComplexityRecord r;
  r.id = j.at("id").get<std::string>();
  r.true_label = j.at("true_label").get<std::string>();
  for (const auto& [name, s] : j.at("scores").items()) {
    KindScore k;
    k.complexity = s.at("complexity").get<double>();
    k.prediction = s.at("prediction").get<std::string>();
    k.prediction_nll = s.at("prediction_nll").get<double>();
    k.distances = s.at("distances").get<std::vector<double>>();
    r.scores.emplace(parse_distance_kind(name), std::move(k));
  }
  if (!j.at("ood_score").is_null()) r.ood_score = j.at("ood_score").get<double>();
  return r;
}

Json slice_to_json(const Slice& s) {
  Json ranges = Json::array();
  for (const auto& r : s.ranges) ranges.push_back(Json::array({r.lo, r.hi}));
  return Json{{"features", s.features},
              {"ranges", std::move(ranges)},
              {"support", s.support},
              {"errors", s.errors},
              {"slice_accuracy", s.slice_accuracy},
              {"error_precision", s.error_precision},
              {"error_recall", s.error_recall},
              {"rank", s.rank}};
}

Slice slice_from_json(const Json& j) {
  Slice s;
  s.features = j.at("features").get<std::vector<std::string>>();
  for (const auto& r : j.at("ranges")) s.ranges.push_back({r.at(0).get<double>(), r.at(1).get<double>()});
  s.support = j.at("support").get<std::size_t>();
  s.errors = j.at("errors").get<std::size_t>();
  s.slice_accuracy = j.at("slice_accuracy").get<double>();
  s.error_precision = j.at("error_precision").get<double>();
  s.error_recall = j.at("error_recall").get<double>();
  s.rank = j.at("rank").get<double>();
  return s;
}

template <typename Fn>
auto parse_json_guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("invalid JSON document: ") + e.what());
  }
}

}  // namespace

std::string_view to_string(Shrinkage shrinkage) noexcept {
  switch (shrinkage) {
    case Shrinkage::None: return "none";
    case Shrinkage::LedoitWolf: return "ledoit_wolf";
    case Shrinkage::Ridge: return "ridge";
  }
  return "unknown";
}

Shrinkage parse_shrinkage(std::string_view text) {
  if (text == "none") return Shrinkage::None;
  if (text == "ledoit_wolf" || text == "lw") return Shrinkage::LedoitWolf;
  if (text == "ridge") return Shrinkage::Ridge;
  throw Error(ErrorCode::InvalidArgument, "unknown shrinkage '" + std::string(text) + "'");
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "json") return ReportFormat::Json;
  if (text == "csv_bundle" || text == "csv") return ReportFormat::CsvBundle;
  throw Error(ErrorCode::InvalidArgument, "unknown report format '" + std::string(text) + "'");
}

void write_report_json(const Report& report, std::ostream& out) {
  Json records = Json::array();
  for (const auto& r : report.records) records.push_back(record_to_json(r));
  Json slices = Json::array();
  for (const auto& s : report.slices) slices.push_back(slice_to_json(s));
  Json config = Json::object();
  for (const auto& [k, v] : report.config) config[k] = v;
  const Json doc{{"format_version", report.format_version},
                 {"config", std::move(config)},
                 {"classes", report.classes},
                 {"stats", stats_to_json(report.stats)},
                 {"records", std::move(records)},
                 {"slices", std::move(slices)}};
  out << doc.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "failed writing report JSON");
}

Report parse_report_json(std::istream& in) {
  return parse_json_guarded([&] {
    const Json doc = Json::parse(in);
    Report r;
    r.format_version = doc.at("format_version").get<std::string>();
    if (r.format_version != kReportVersion) {
      throw Error(ErrorCode::ParseError, "unsupported report version '" + r.format_version + "'");
    }
    for (const auto& [k, v] : doc.at("config").items()) r.config[k] = v.get<std::string>();
    r.classes = doc.at("classes").get<std::vector<std::string>>();
    r.stats = stats_from_json(doc.at("stats"));
    for (const auto& j : doc.at("records")) r.records.push_back(record_from_json(j));
    for (const auto& j : doc.at("slices")) r.slices.push_back(slice_from_json(j));
    return r;
  });
}

void write_stats_csv(const DatasetStats& stats, std::ostream& out) {
  out << "key,value\n";
  out << "num_classes," << stats.num_classes << '\n';
  out << "num_samples," << stats.num_samples << '\n';
  out << "normalized_entropy," << format_double(stats.normalized_entropy) << '\n';
  out << "median_class_size," << stats.median_class_size << '\n';
  out << "baseline_accuracy," << format_double(stats.baseline_accuracy) << '\n';
  for (const auto& [label, n] : stats.class_counts) {
    out << csv_field("class_count:" + label) << ',' << n << '\n';
  }
}

void write_slices_csv(const std::vector<Slice>& slices, std::ostream& out) {
  out << "features,slice,accuracy,size,rank,errors,error_precision,error_recall\n";
  for (const auto& s : slices) {
    std::string features;
    std::string ranges;
    for (std::size_t k = 0; k < s.features.size(); ++k) {
      if (k > 0) {
        features += ',';
        ranges += "; ";
      }
      features += s.features[k];
      ranges += format_double(s.ranges[k].lo) + " ~ " + format_double(s.ranges[k].hi);
    }
    out << csv_field(features) << ',' << csv_field(ranges) << ',' << format_double(s.slice_accuracy)
        << ',' << s.support << ',' << format_double(s.rank) << ',' << s.errors << ','
        << format_double(s.error_precision) << ',' << format_double(s.error_recall) << '\n';
  }
}

void write_records_csv(const std::vector<ComplexityRecord>& records,
                       const std::vector<std::string>& classes, std::ostream& out) {
  std::vector<DistanceKind> kinds;
  if (!records.empty()) {
    for (const auto& [kind, s] : records.front().scores) kinds.push_back(kind);
  }
  out << "id,true_label";
  for (const auto kind : kinds) {
    const auto s = short_name(kind);
    out << ",compl_" << s << ",pred_" << s << ",nll_" << s;
    for (const auto& c : classes) out << ',' << csv_field("dist_" + s + ":" + c);
  }
  out << ",ood_score\n";
  for (const auto& r : records) {
    out << csv_field(r.id) << ',' << csv_field(r.true_label);
    for (const auto kind : kinds) {
      const auto& s = r.scores.at(kind);
      out << ',' << format_double(s.complexity) << ',' << csv_field(s.prediction) << ','
          << format_double(s.prediction_nll);
      for (double d : s.distances) out << ',' << format_double(d);
    }
    out << ',' << (r.ood_score ? format_double(*r.ood_score) : std::string()) << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing records CSV");
}

RecordsFile parse_records_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(ParseError::Kind::MalformedHeader, 1, "empty records file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line, 1);
  if (header.size() < 3 || header[0] != "id" || header[1] != "true_label" ||
      header.back() != "ood_score") {
    throw ParseError(ParseError::Kind::MalformedHeader, 1,
                     "records header must start with id,true_label and end with ood_score");
  }

  // Column layout per kind: compl_, pred_, nll_, then one dist_ column per class.
  struct KindColumns {
    DistanceKind kind;
    std::size_t first;
  };
  std::vector<KindColumns> layout;
  RecordsFile out;
  std::size_t col = 2;
  const std::size_t end = header.size() - 1;
  while (col < end) {
    const auto& h = header[col];
    if (h.rfind("compl_", 0) != 0) {
      throw ParseError(ParseError::Kind::MalformedHeader, 1, "unexpected column '" + h + "'");
    }
    const auto s = h.substr(6);
    KindColumns kc{parse_distance_kind(s), col};
    if (col + 2 >= end || header[col + 1] != "pred_" + s || header[col + 2] != "nll_" + s) {
      throw ParseError(ParseError::Kind::MalformedHeader, 1, "incomplete columns for kind '" + s + "'");
    }
    col += 3;
    std::vector<std::string> classes;
    const std::string prefix = "dist_" + s + ":";
    while (col < end && header[col].rfind(prefix, 0) == 0) {
      classes.push_back(header[col].substr(prefix.size()));
      ++col;
    }
    if (layout.empty()) {
      out.classes = classes;
    } else if (classes != out.classes) {
      throw ParseError(ParseError::Kind::MalformedHeader, 1, "kinds disagree on class columns");
    }
    layout.push_back(kc);
  }

  std::size_t line_number = 1;
  const auto number = [&](const std::string& text) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
      throw ParseError(ParseError::Kind::BadNumber, line_number, "bad number '" + text + "'");
    }
    return v;
  };
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line, line_number);
    if (f.size() != header.size()) {
      throw ParseError(ParseError::Kind::RaggedRow, line_number, "wrong field count");
    }
    ComplexityRecord r;
    r.id = f[0];
    r.true_label = f[1];
    for (const auto& kc : layout) {
      KindScore s;
      s.complexity = number(f[kc.first]);
      s.prediction = f[kc.first + 1];
      s.prediction_nll = number(f[kc.first + 2]);
      for (std::size_t c = 0; c < out.classes.size(); ++c) s.distances.push_back(number(f[kc.first + 3 + c]));
      r.scores.emplace(kc.kind, std::move(s));
    }
    if (!f.back().empty()) r.ood_score = number(f.back());
    out.records.push_back(std::move(r));
  }
  return out;
}

void write_report_csv_bundle(const Report& report, const std::filesystem::path& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create directory '" + directory.string() + "'");
  {
    auto out = open_output(directory / "stats.csv");
    write_stats_csv(report.stats, out);
  }
  {
    auto out = open_output(directory / "records.csv");
    write_records_csv(report.records, report.classes, out);
  }
  {
    auto out = open_output(directory / "slices.csv");
    write_slices_csv(report.slices, out);
  }
}

void emit_report(const Report& report, ReportFormat format, const std::filesystem::path& output) {
  if (format == ReportFormat::CsvBundle) {
    write_report_csv_bundle(report, output);
    return;
  }
  auto out = open_output(output);
  write_report_json(report, out);
}

void write_model_json(const GeometryModel& model, std::ostream& out) {
  const auto& c = model.config();
  Json classes = Json::array();
  for (const auto& g : model.geometries()) {
    classes.push_back(Json{{"label", g.label},
                           {"count", g.count},
                           {"centroid", vector_to_json(g.centroid)},
                           {"covariance", matrix_to_json(g.covariance)},
                           {"correlation", matrix_to_json(g.correlation)},
                           {"precision_cov", matrix_to_json(g.precision_cov)},
                           {"precision_corr", matrix_to_json(g.precision_corr)},
                           {"shrinkage_used", Json{{"kind", to_string(g.shrinkage_used.kind)},
                                                   {"coefficient", g.shrinkage_used.coefficient},
                                                   {"ridge_epsilon", g.shrinkage_used.ridge_epsilon}}}});
  }
  const Json doc{{"format_version", kModelVersion},
                 {"dim", model.dim()},
                 {"config", Json{{"shrinkage", to_string(c.shrinkage)},
                                 {"ridge_scale", c.ridge_scale},
                                 {"pooled", c.pooled},
                                 {"unbiased", c.unbiased},
                                 {"fallback", to_string(c.fallback)},
                                 {"with_precision", c.with_precision}}},
                 {"classes", std::move(classes)}};
  out << doc.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "failed writing model JSON");
}

GeometryModel parse_model_json(std::istream& in) {
  return parse_json_guarded([&] {
    const Json doc = Json::parse(in);
    if (doc.at("format_version").get<std::string>() != kModelVersion) {
      throw Error(ErrorCode::ParseError, "unsupported model version");
    }
    const auto& jc = doc.at("config");
    GeometryConfig config;
    config.shrinkage = parse_shrinkage(jc.at("shrinkage").get<std::string>());
    config.ridge_scale = jc.at("ridge_scale").get<double>();
    config.pooled = jc.at("pooled").get<bool>();
    config.unbiased = jc.at("unbiased").get<bool>();
    config.fallback = parse_precision_mode(jc.at("fallback").get<std::string>());
    config.with_precision = jc.at("with_precision").get<bool>();
    std::vector<ClassGeometry> geometries;
    for (const auto& j : doc.at("classes")) {
      ClassGeometry g;
      g.label = j.at("label").get<std::string>();
      g.count = j.at("count").get<std::size_t>();
      g.centroid = vector_from_json(j.at("centroid"));
      g.covariance = matrix_from_json(j.at("covariance"));
      g.correlation = matrix_from_json(j.at("correlation"));
      g.precision_cov = matrix_from_json(j.at("precision_cov"));
      g.precision_corr = matrix_from_json(j.at("precision_corr"));
      const auto& s = j.at("shrinkage_used");
      g.shrinkage_used = {parse_shrinkage(s.at("kind").get<std::string>()),
                          s.at("coefficient").get<double>(), s.at("ridge_epsilon").get<double>()};
      geometries.push_back(std::move(g));
    }
    return GeometryModel(std::move(geometries), config);
  });
}

}  // namespace cmx::io
