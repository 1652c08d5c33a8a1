#include "cmx/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "cmx/errors.hpp"

namespace cmx::io {

std::string format_double(double v) {
  std::array<char, 40> buf{};
  const int n = std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return std::string(buf.data(), static_cast<std::size_t>(n));
}

std::ifstream open_input(const std::filesystem::path& path, bool binary) {
  std::ifstream in(path, binary ? std::ios::in | std::ios::binary : std::ios::in);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path, bool binary) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, binary ? std::ios::out | std::ios::binary | std::ios::trunc
                                 : std::ios::out | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  return out;
}

std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_number) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      if (!cur.empty() || was_quoted) {
        throw ParseError(ParseError::Kind::BadField, line_number, "stray quote in field");
      }
      quoted = true;
      was_quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
      was_quoted = false;
    } else {
      if (was_quoted) throw ParseError(ParseError::Kind::BadField, line_number, "text after closing quote");
      cur += ch;
    }
  }
  if (quoted) throw ParseError(ParseError::Kind::BadField, line_number, "unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

std::string csv_field(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

namespace {

bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

double parse_number(const std::string& text, std::size_t line_number, std::string_view what) {
  double v = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (!text.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ParseError(ParseError::Kind::BadNumber, line_number,
                     "cannot parse " + std::string(what) + " '" + text + "' as a number");
  }
  if (!std::isfinite(v)) {
    throw ParseError(ParseError::Kind::NonFiniteValue, line_number,
                     "non-finite " + std::string(what) + " '" + text + "'");
  }
  return v;
}

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<unsigned char, sizeof(T)> bytes{};
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

template <typename T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!in) throw Error(ErrorCode::ParseError, "truncated binary dataset");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

std::string get_string(std::istream& in) {
  const auto len = get_le<std::uint32_t>(in);
  std::string s(len, '\0');
  in.read(s.data(), static_cast<std::streamsize>(len));
  if (!in) throw Error(ErrorCode::ParseError, "truncated binary dataset string table");
  return s;
}

void put_string(std::ostream& out, const std::string& s) {
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

}  // namespace

EmbeddedDataset parse_dataset_csv(std::istream& in) {
  std::string line;
  std::size_t line_number = 1;
  if (!next_line(in, line)) {
    throw ParseError(ParseError::Kind::MalformedHeader, 1, "empty file, expected header");
  }
  const auto header = split_csv_line(line, line_number);
  if (header.size() < 3 || header[0] != "id" || header[1] != "label") {
    throw ParseError(ParseError::Kind::MalformedHeader, 1,
                     "header must be id,label,e0,...,e{d-1}");
  }
  const std::size_t d = header.size() - 2;
  for (std::size_t j = 0; j < d; ++j) {
    if (header[j + 2] != "e" + std::to_string(j)) {
      throw ParseError(ParseError::Kind::MalformedHeader, 1,
                       "expected column 'e" + std::to_string(j) + "', found '" + header[j + 2] + "'");
    }
  }

  std::vector<std::string> ids;
  std::vector<std::string> labels;
  std::vector<double> values;
  std::unordered_set<std::string> seen;
  while (next_line(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    auto fields = split_csv_line(line, line_number);
    if (fields.size() != d + 2) {
      throw ParseError(ParseError::Kind::RaggedRow, line_number,
                       "expected " + std::to_string(d + 2) + " fields, found " +
                           std::to_string(fields.size()));
    }
    if (fields[0].empty()) throw ParseError(ParseError::Kind::BadField, line_number, "empty id");
    if (fields[1].empty()) throw ParseError(ParseError::Kind::BadField, line_number, "empty label");
    if (!seen.insert(fields[0]).second) {
      throw ParseError(ParseError::Kind::DuplicateId, line_number, "duplicate id '" + fields[0] + "'");
    }
    for (std::size_t j = 0; j < d; ++j) values.push_back(parse_number(fields[j + 2], line_number, "value"));
    ids.push_back(std::move(fields[0]));
    labels.push_back(std::move(fields[1]));
  }
  const auto n = static_cast<Eigen::Index>(ids.size());
  Eigen::MatrixXd vectors =
      Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          values.data(), n, static_cast<Eigen::Index>(d));
  return {std::move(ids), std::move(labels), std::move(vectors)};
}

void write_dataset_csv(const EmbeddedDataset& dataset, std::ostream& out) {
  out << "id,label";
  for (Eigen::Index j = 0; j < dataset.dim(); ++j) out << ",e" << j;
  out << '\n';
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    out << csv_field(dataset.ids()[i]) << ',' << csv_field(dataset.labels()[i]);
    for (Eigen::Index j = 0; j < dataset.dim(); ++j) {
      out << ',' << format_double(dataset.vectors()(static_cast<Eigen::Index>(i), j));
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing dataset CSV");
}

EmbeddedDataset parse_dataset_binary(std::istream& in) {
  std::array<char, 5> magic{};
  in.read(magic.data(), magic.size());
  if (!in || std::string_view(magic.data(), magic.size()) != kBinaryMagic) {
    throw Error(ErrorCode::ParseError, "missing CPLX1 magic bytes");
  }
  const auto n = get_le<std::uint32_t>(in);
  const auto d = get_le<std::uint32_t>(in);
  if (n > 0 && d == 0) throw Error(ErrorCode::ParseError, "binary dataset has dimension 0");
  std::vector<std::string> ids(n);
  std::vector<std::string> labels(n);
  for (auto& s : ids) s = get_string(in);
  for (auto& s : labels) s = get_string(in);
  Eigen::MatrixXd vectors(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < d; ++j) {
      const auto v = static_cast<double>(get_le<float>(in));
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::ParseError, "non-finite value in row " + std::to_string(i));
      }
      vectors(i, j) = v;
    }
  }
  return {std::move(ids), std::move(labels), std::move(vectors)};
}

void write_dataset_binary(const EmbeddedDataset& dataset, std::ostream& out) {
  out.write(kBinaryMagic.data(), static_cast<std::streamsize>(kBinaryMagic.size()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dataset.size()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dataset.dim()));
  for (const auto& s : dataset.ids()) put_string(out, s);
  for (const auto& s : dataset.labels()) put_string(out, s);
  for (Eigen::Index i = 0; i < dataset.vectors().rows(); ++i) {
    for (Eigen::Index j = 0; j < dataset.dim(); ++j) {
      const auto v = static_cast<float>(dataset.vectors()(i, j));
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::InvalidArgument,
                    "value in row " + std::to_string(i) + " does not fit a 32-bit float");
      }
      put_le<float>(out, v);
    }
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing binary dataset");
}

EmbeddedDataset read_dataset(const std::filesystem::path& path) {
  auto in = open_input(path, true);
  std::array<char, 5> magic{};
  in.read(magic.data(), magic.size());
  const bool binary = in.gcount() == 5 && std::string_view(magic.data(), 5) == kBinaryMagic;
  in.clear();
  in.seekg(0);
  return binary ? parse_dataset_binary(in) : parse_dataset_csv(in);
}

void write_dataset(const EmbeddedDataset& dataset, const std::filesystem::path& path,
                   DatasetFormat format) {
  auto out = open_output(path, format == DatasetFormat::Binary);
  if (format == DatasetFormat::Binary) {
    write_dataset_binary(dataset, out);
  } else {
    write_dataset_csv(dataset, out);
  }
}

PredictionsFile parse_predictions_csv(std::istream& in) {
  std::string line;
  std::size_t line_number = 1;
  if (!next_line(in, line)) {
    throw ParseError(ParseError::Kind::MalformedHeader, 1, "empty predictions file");
  }
  const auto header = split_csv_line(line, 1);
  const bool two = header.size() == 2 && header[0] == "id" && header[1] == "predicted_label";
  const bool three = header.size() == 3 && header[0] == "id" && header[1] == "predicted_label" &&
                     header[2] == "confidence";
  if (!two && !three) {
    throw ParseError(ParseError::Kind::MalformedHeader, 1,
                     "header must be id,predicted_label[,confidence]");
  }
  PredictionsFile out;
  out.has_confidence = three;
  std::unordered_set<std::string> seen;
  while (next_line(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    auto fields = split_csv_line(line, line_number);
    if (fields.size() != header.size()) {
      throw ParseError(ParseError::Kind::RaggedRow, line_number,
                       "expected " + std::to_string(header.size()) + " fields");
    }
    if (!seen.insert(fields[0]).second) {
      throw ParseError(ParseError::Kind::DuplicateId, line_number, "duplicate id '" + fields[0] + "'");
    }
    Prediction p{std::move(fields[0]), std::move(fields[1]), std::nullopt};
    if (three) {
      const double c = parse_number(fields[2], line_number, "confidence");
      if (c < 0.0 || c > 1.0) {
        throw ParseError(ParseError::Kind::BadNumber, line_number, "confidence outside [0, 1]");
      }
      p.confidence = c;
    }
    out.rows.push_back(std::move(p));
  }
  return out;
}

PredictionsFile read_predictions(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_predictions_csv(in);
}

SplitResult split(const EmbeddedDataset& dataset, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "train fraction must lie in (0, 1)");
  }
  if (dataset.size() < 2) throw Error(ErrorCode::InvalidArgument, "split needs at least two samples");

  const auto take_train = [&](std::size_t n) {
    const auto k = static_cast<std::size_t>(std::llround(static_cast<double>(n) * spec.train_fraction));
    return std::clamp<std::size_t>(k, 1, n - 1);
  };
  const auto shuffle = [](std::vector<std::size_t>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
  };

  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  if (spec.stratified) {
    const auto& classes = dataset.classes();
    std::vector<std::vector<std::size_t>> members(classes.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      const auto it = std::lower_bound(classes.begin(), classes.end(), dataset.labels()[i]);
      members[static_cast<std::size_t>(it - classes.begin())].push_back(i);
    }
    for (std::size_t c = 0; c < classes.size(); ++c) {
      auto& m = members[c];
      if (m.size() < 2) {
        throw Error(ErrorCode::StratificationError,
                    "class '" + classes[c] + "' has a single sample and cannot be stratified");
      }
      Rng rng(mix_seed(spec.seed, c));
      shuffle(m, rng);
      const auto k = take_train(m.size());
      train.insert(train.end(), m.begin(), m.begin() + static_cast<std::ptrdiff_t>(k));
      test.insert(test.end(), m.begin() + static_cast<std::ptrdiff_t>(k), m.end());
    }
  } else {
    std::vector<std::size_t> all(dataset.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    Rng rng(mix_seed(spec.seed, 0));
    shuffle(all, rng);
    const auto k = take_train(all.size());
    train.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k));
    test.assign(all.begin() + static_cast<std::ptrdiff_t>(k), all.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {dataset.subset(train), dataset.subset(test)};
}

AnalysisTable build_analysis_table(const std::vector<ComplexityRecord>& records,
                                   const AnalysisInputs& inputs) {
  const std::size_t n = records.size();
  std::vector<std::string> ids;
  std::vector<std::string> truth;
  std::vector<std::string> predicted;
  ids.reserve(n);
  truth.reserve(n);
  predicted.reserve(n);

  std::vector<const Prediction*> joined(n, nullptr);
  if (inputs.predictions != nullptr) {
    std::unordered_map<std::string, const Prediction*> by_id;
    for (const auto& p : inputs.predictions->rows) by_id.emplace(p.id, &p);
    std::vector<std::string> missing;
    for (std::size_t i = 0; i < n; ++i) {
      const auto it = by_id.find(records[i].id);
      if (it == by_id.end()) {
        missing.push_back(records[i].id);
      } else {
        joined[i] = it->second;
      }
    }
    if (!missing.empty()) {
      std::string list;
      for (std::size_t k = 0; k < missing.size() && k < 10; ++k) list += (k ? ", " : "") + missing[k];
      if (missing.size() > 10) list += ", ... (" + std::to_string(missing.size()) + " total)";
      throw Error(ErrorCode::JoinError, "record ids missing from predictions: " + list);
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back(records[i].id);
    truth.push_back(records[i].true_label);
    if (joined[i] != nullptr) {
      predicted.push_back(joined[i]->predicted_label);
    } else {
      const auto it = records[i].scores.find(inputs.error_kind);
      if (it == records[i].scores.end()) {
        throw Error(ErrorCode::InvalidArgument, "records were not scored with the error kind '" +
                                                    std::string(to_string(inputs.error_kind)) + "'");
      }
      predicted.push_back(it->second.prediction);
    }
  }

  AnalysisTable table(std::move(ids), std::move(truth), std::move(predicted));
  for (const auto kind : kAllDistanceKinds) {
    const bool present = n > 0 && std::all_of(records.begin(), records.end(), [&](const auto& r) {
                           return r.scores.count(kind) > 0;
                         });
    if (!present) continue;
    std::vector<double> column(n);
    for (std::size_t i = 0; i < n; ++i) column[i] = records[i].scores.at(kind).complexity;
    table.add_feature(std::string(column_name(kind)), std::move(column));
  }
  if (inputs.predictions != nullptr && inputs.predictions->has_confidence) {
    std::vector<double> column(n);
    for (std::size_t i = 0; i < n; ++i) column[i] = joined[i]->confidence.value_or(0.0);
    table.add_feature("confidence", std::move(column));
  }
  if (inputs.coordinates != nullptr) {
    const auto& c = *inputs.coordinates;
    if (static_cast<std::size_t>(c.rows()) != n) {
      throw Error(ErrorCode::DimensionMismatch, "coordinates do not align with records");
    }
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
      std::vector<double> column(n);
      for (std::size_t i = 0; i < n; ++i) column[i] = c(static_cast<Eigen::Index>(i), j);
      table.add_feature("x" + std::to_string(j + 1), std::move(column));
    }
  }
  return table;
}

void write_heatmap_csv(const HeatmapGrid& grid, std::ostream& out) {
  out << "x,y,value\n";
  for (std::size_t iy = 0; iy < grid.ny; ++iy) {
    const auto y = format_double(grid.y(iy));
    for (std::size_t ix = 0; ix < grid.nx; ++ix) {
      out << format_double(grid.x(ix)) << ',' << y << ',' << format_double(grid.at(ix, iy)) << '\n';
    }
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing heatmap CSV");
}

}  // namespace cmx::io
