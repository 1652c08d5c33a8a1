#include "cmx/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <tuple>

#include "cmx/errors.hpp"
#include "cmx/parallel.hpp"

namespace cmx {

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

double normalized_entropy(std::span<const std::size_t> class_counts) {
  if (class_counts.size() < 2) {
    throw Error(ErrorCode::UndefinedEntropy,
                "normalized entropy needs at least two classes (log(1) = 0)");
  }
  double total = 0.0;
  for (auto c : class_counts) {
    if (c == 0) throw Error(ErrorCode::InvalidArgument, "class counts must be positive");
    total += static_cast<double>(c);
  }
  const bool uniform = std::adjacent_find(class_counts.begin(), class_counts.end(),
                                          std::not_equal_to<>()) == class_counts.end();
  if (uniform) return 1.0;
  double h = 0.0;
  for (auto c : class_counts) {
    const double p = static_cast<double>(c) / total;
    h -= p * std::log(p);
  }
  const double v = h / std::log(static_cast<double>(class_counts.size()));
  return std::clamp(v, 0.0, 1.0);
}

std::size_t median_class_size(std::span<const std::size_t> class_counts) {
  if (class_counts.empty()) throw Error(ErrorCode::EmptyDataset, "no classes");
  std::vector<std::size_t> sorted(class_counts.begin(), class_counts.end());
  std::sort(sorted.begin(), sorted.end());
  return sorted[(sorted.size() - 1) / 2];
}

DatasetStats dataset_stats(const EmbeddedDataset& dataset, const GeometryModel& model,
                           DistanceKind kind, const ScoringOptions& options) {
  dataset.require_classification();
  const auto counts = dataset.class_counts();
  DatasetStats s;
  s.num_classes = dataset.classes().size();
  s.num_samples = dataset.size();
  s.normalized_entropy = normalized_entropy(counts);
  s.median_class_size = median_class_size(counts);
  s.baseline_accuracy = baseline_accuracy(dataset, model, kind, options);
  for (std::size_t c = 0; c < counts.size(); ++c) s.class_counts.emplace(dataset.classes()[c], counts[c]);
  return s;
}

// ---------------------------------------------------------------------------
// Analysis table
// ---------------------------------------------------------------------------

AnalysisTable::AnalysisTable(std::vector<std::string> ids, std::vector<std::string> true_labels,
                             std::vector<std::string> predicted_labels)
    : ids_(std::move(ids)),
      true_labels_(std::move(true_labels)),
      predicted_labels_(std::move(predicted_labels)) {
  if (true_labels_.size() != ids_.size() || predicted_labels_.size() != ids_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "analysis table columns disagree on row count");
  }
  is_error_.resize(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    is_error_[i] = true_labels_[i] != predicted_labels_[i] ? 1 : 0;
    error_count_ += static_cast<std::size_t>(is_error_[i]);
  }
}

void AnalysisTable::add_feature(std::string name, std::vector<double> values) {
  if (has_feature(name)) throw Error(ErrorCode::InvalidArgument, "duplicate feature '" + name + "'");
  if (values.size() != ids_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "feature '" + name + "' has the wrong length");
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::InvalidArgument, "feature '" + name + "' has non-finite values");
    }
  }
  names_.push_back(std::move(name));
  columns_.push_back(std::move(values));
}

bool AnalysisTable::has_feature(const std::string& name) const noexcept {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

const std::vector<double>& AnalysisTable::feature(const std::string& name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw Error(ErrorCode::InvalidArgument, "no feature named '" + name + "'");
  return columns_[static_cast<std::size_t>(it - names_.begin())];
}

// ---------------------------------------------------------------------------
// Slices
// ---------------------------------------------------------------------------

double slice_rank(std::size_t errors_in_slice, std::size_t support, std::size_t total_errors) {
  if (errors_in_slice == 0 || support == 0 || total_errors == 0) return 0.0;
  // 2PR/(P+R) with P = e/support, R = e/total simplifies to 2e/(support + total).
  return 2.0 * static_cast<double>(errors_in_slice) /
         static_cast<double>(support + total_errors);
}

std::size_t default_min_support(std::size_t rows) noexcept {
  return std::max<std::size_t>(10, (rows + 99) / 100);
}

namespace {

Slice make_slice(std::vector<std::string> features, std::vector<Interval> ranges,
                 std::size_t support, std::size_t errors, std::size_t total_errors) {
  Slice s;
  s.features = std::move(features);
  s.ranges = std::move(ranges);
  s.support = support;
  s.errors = errors;
  if (support > 0) {
    s.slice_accuracy = 1.0 - static_cast<double>(errors) / static_cast<double>(support);
    s.error_precision = static_cast<double>(errors) / static_cast<double>(support);
  }
  if (total_errors > 0) s.error_recall = static_cast<double>(errors) / static_cast<double>(total_errors);
  s.rank = slice_rank(errors, support, total_errors);
  return s;
}

struct Bin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  std::size_t errors = 0;
};

struct Binned {
  std::vector<Bin> bins;
  std::vector<std::uint32_t> row_bin;
};

// Groups rows by distinct value in ascending order. When there are more
// distinct values than max_bins, consecutive values are merged by row
// quantile so that each bin holds roughly N / max_bins rows. Equal values
// always share a bin, so a value range [bin_i.lo, bin_j.hi] selects exactly
// the rows of bins i..j.
Binned bin_feature(const AnalysisTable& table, const std::vector<double>& values,
                   std::size_t max_bins) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  std::size_t distinct = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k == 0 || values[order[k]] != values[order[k - 1]]) ++distinct;
  }
  const bool compress = distinct > max_bins;

  Binned out;
  out.row_bin.resize(n);
  std::size_t current_key = static_cast<std::size_t>(-1);
  for (std::size_t k = 0; k < n;) {
    const double v = values[order[k]];
    std::size_t end = k;
    while (end < n && values[order[end]] == v) ++end;
    const std::size_t key = compress ? std::min(max_bins - 1, k * max_bins / n) : k;
    if (out.bins.empty() || key != current_key) {
      out.bins.push_back(Bin{v, v, 0, 0});
      current_key = key;
    }
    auto& bin = out.bins.back();
    bin.hi = v;
    for (std::size_t t = k; t < end; ++t) {
      out.row_bin[order[t]] = static_cast<std::uint32_t>(out.bins.size() - 1);
      ++bin.count;
      if (table.is_error(order[t])) ++bin.errors;
    }
    k = end;
  }
  return out;
}

struct Candidate {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t support = 0;
  std::size_t errors = 0;
  double rank = -1.0;

  [[nodiscard]] bool valid() const noexcept { return rank >= 0.0; }
};

// Strict "better than" among candidates: rank, then support, then position.
bool better(const Candidate& a, const Candidate& b) {
  if (!b.valid()) return a.valid();
  if (!a.valid()) return false;
  if (a.rank != b.rank) return a.rank > b.rank;
  if (a.support != b.support) return a.support > b.support;
  return std::tie(a.i, a.j) < std::tie(b.i, b.j);
}

Candidate best_interval(const std::vector<std::size_t>& cum_count,
                        const std::vector<std::size_t>& cum_err, std::size_t first,
                        std::size_t last, std::size_t min_support, std::size_t total_errors) {
  Candidate best;
  for (std::size_t i = first; i <= last; ++i) {
    for (std::size_t j = i; j <= last; ++j) {
      const std::size_t support = cum_count[j + 1] - cum_count[i];
      if (support < min_support) continue;
      const std::size_t errors = cum_err[j + 1] - cum_err[i];
      if (errors == 0) continue;
      Candidate c{i, j, support, errors, slice_rank(errors, support, total_errors)};
      if (better(c, best)) best = c;
    }
  }
  return best;
}

}  // namespace

Slice evaluate_slice(const AnalysisTable& table, std::vector<std::string> features,
                     std::vector<Interval> ranges) {
  if (features.size() != ranges.size() || features.empty()) {
    throw Error(ErrorCode::InvalidArgument, "slice needs one range per feature");
  }
  std::vector<const std::vector<double>*> columns;
  for (const auto& f : features) columns.push_back(&table.feature(f));
  std::size_t support = 0;
  std::size_t errors = 0;
  for (std::size_t r = 0; r < table.size(); ++r) {
    bool inside = true;
    for (std::size_t k = 0; k < columns.size() && inside; ++k) {
      inside = ranges[k].contains((*columns[k])[r]);
    }
    if (inside) {
      ++support;
      if (table.is_error(r)) ++errors;
    }
  }
  return make_slice(std::move(features), std::move(ranges), support, errors, table.error_count());
}

std::vector<Slice> find_slices_1d(const AnalysisTable& table, const std::string& feature,
                                  const SliceSearchOptions& options) {
  const auto& values = table.feature(feature);
  const std::size_t total_errors = table.error_count();
  if (total_errors == 0 || table.size() < options.min_support || options.max_results == 0) {
    return {};
  }
  const auto binned = bin_feature(table, values, std::max<std::size_t>(1, options.max_unique));
  const auto& bins = binned.bins;
  const std::size_t u = bins.size();
  std::vector<std::size_t> cum_count(u + 1, 0);
  std::vector<std::size_t> cum_err(u + 1, 0);
  for (std::size_t b = 0; b < u; ++b) {
    cum_count[b + 1] = cum_count[b] + bins[b].count;
    cum_err[b + 1] = cum_err[b] + bins[b].errors;
  }

  struct Segment {
    std::size_t first;
    std::size_t last;
    Candidate best;
  };
  const auto segment = [&](std::size_t first, std::size_t last) {
    return Segment{first, last,
                   best_interval(cum_count, cum_err, first, last, options.min_support, total_errors)};
  };

  std::vector<Segment> free_segments{segment(0, u - 1)};
  std::vector<Slice> out;
  while (out.size() < options.max_results) {
    std::size_t pick = free_segments.size();
    for (std::size_t s = 0; s < free_segments.size(); ++s) {
      if (!free_segments[s].best.valid()) continue;
      if (pick == free_segments.size() || better(free_segments[s].best, free_segments[pick].best)) {
        pick = s;
      }
    }
    if (pick == free_segments.size()) break;
    const Segment chosen = free_segments[pick];
    const Candidate& c = chosen.best;
    out.push_back(make_slice({feature}, {Interval{bins[c.i].lo, bins[c.j].hi}}, c.support, c.errors,
                             total_errors));
    free_segments.erase(free_segments.begin() + static_cast<std::ptrdiff_t>(pick));
    if (c.i > chosen.first) free_segments.push_back(segment(chosen.first, c.i - 1));
    if (c.j < chosen.last) free_segments.push_back(segment(c.j + 1, chosen.last));
  }
  return out;
}

std::vector<Slice> find_slices_2d(const AnalysisTable& table, const std::string& first,
                                  const std::string& second, const SliceSearchOptions& options) {
  if (options.grid < 4) throw Error(ErrorCode::InvalidArgument, "2-D slice grid must be >= 4");
  const auto& v1 = table.feature(first);
  const auto& v2 = table.feature(second);
  const std::size_t total_errors = table.error_count();
  if (total_errors == 0 || table.size() < options.min_support || options.max_results == 0) {
    return {};
  }
  const auto b1 = bin_feature(table, v1, options.grid);
  const auto b2 = bin_feature(table, v2, options.grid);
  const std::size_t n1 = b1.bins.size();
  const std::size_t n2 = b2.bins.size();

  // 2-D prefix sums over the bin grid, (n1 + 1) x (n2 + 1).
  const std::size_t stride = n2 + 1;
  std::vector<std::size_t> cnt((n1 + 1) * stride, 0);
  std::vector<std::size_t> err((n1 + 1) * stride, 0);
  for (std::size_t r = 0; r < table.size(); ++r) {
    const std::size_t a = b1.row_bin[r] + 1;
    const std::size_t b = b2.row_bin[r] + 1;
    ++cnt[a * stride + b];
    if (table.is_error(r)) ++err[a * stride + b];
  }
  for (std::size_t a = 1; a <= n1; ++a) {
    for (std::size_t b = 1; b <= n2; ++b) {
      cnt[a * stride + b] += cnt[(a - 1) * stride + b] + cnt[a * stride + b - 1] -
                             cnt[(a - 1) * stride + b - 1];
      err[a * stride + b] += err[(a - 1) * stride + b] + err[a * stride + b - 1] -
                             err[(a - 1) * stride + b - 1];
    }
  }
  const auto rect = [stride](const std::vector<std::size_t>& p, std::size_t i1, std::size_t j1,
                             std::size_t i2, std::size_t j2) {
    return p[(j1 + 1) * stride + (j2 + 1)] - p[i1 * stride + (j2 + 1)] -
           p[(j1 + 1) * stride + i2] + p[i1 * stride + i2];
  };

  struct Rect {
    std::size_t i1, j1, i2, j2;
  };
  std::vector<Rect> taken;
  const auto overlaps_taken = [&](std::size_t i1, std::size_t j1, std::size_t i2, std::size_t j2) {
    for (const auto& t : taken) {
      if (i1 <= t.j1 && t.i1 <= j1 && i2 <= t.j2 && t.i2 <= j2) return true;
    }
    return false;
  };

  std::vector<Slice> out;
  while (out.size() < options.max_results) {
    Candidate best;
    Rect best_rect{};
    for (std::size_t i1 = 0; i1 < n1; ++i1) {
      for (std::size_t j1 = i1; j1 < n1; ++j1) {
        const std::size_t strip_support = rect(cnt, i1, j1, 0, n2 - 1);
        const std::size_t strip_errors = rect(err, i1, j1, 0, n2 - 1);
        if (strip_support < options.min_support || strip_errors == 0) continue;
        // No rectangle inside the strip can beat precision 1 at the strip's recall.
        if (best.valid() && slice_rank(strip_errors, strip_errors, total_errors) < best.rank) continue;
        for (std::size_t i2 = 0; i2 < n2; ++i2) {
          for (std::size_t j2 = i2; j2 < n2; ++j2) {
            const std::size_t support = rect(cnt, i1, j1, i2, j2);
            if (support < options.min_support) continue;
            const std::size_t errors = rect(err, i1, j1, i2, j2);
            if (errors == 0) continue;
            if (overlaps_taken(i1, j1, i2, j2)) continue;
            Candidate c{i1 * n1 + j1, i2 * n2 + j2, support, errors,
                        slice_rank(errors, support, total_errors)};
            if (better(c, best)) {
              best = c;
              best_rect = Rect{i1, j1, i2, j2};
            }
          }
        }
      }
    }
    if (!best.valid()) break;
    taken.push_back(best_rect);
    out.push_back(make_slice({first, second},
                             {Interval{b1.bins[best_rect.i1].lo, b1.bins[best_rect.j1].hi},
                              Interval{b2.bins[best_rect.i2].lo, b2.bins[best_rect.j2].hi}},
                             best.support, best.errors, total_errors));
  }
  return out;
}

std::vector<Slice> rank_slices(std::vector<Slice> slices) {
  const auto joined = [](const Slice& s) {
    std::string out;
    for (const auto& f : s.features) {
      if (!out.empty()) out += ',';
      out += f;
    }
    return out;
  };
  const auto bounds = [](const Slice& s) {
    std::vector<double> out;
    for (const auto& r : s.ranges) {
      out.push_back(r.lo);
      out.push_back(r.hi);
    }
    return out;
  };
  std::stable_sort(slices.begin(), slices.end(), [&](const Slice& a, const Slice& b) {
    if (a.rank != b.rank) return a.rank > b.rank;
    if (a.support != b.support) return a.support > b.support;
    const auto fa = joined(a);
    const auto fb = joined(b);
    if (fa != fb) return fa < fb;
    return bounds(a) < bounds(b);
  });
  return slices;
}

std::vector<Slice> find_all_slices(const AnalysisTable& table,
                                   std::span<const std::pair<std::string, std::string>> pairs,
                                   const SliceSearchOptions& options) {
  const auto& names = table.feature_names();
  const std::size_t tasks = names.size() + pairs.size();
  std::vector<std::vector<Slice>> results(tasks);
  detail::parallel_for(
      tasks,
      [&](std::size_t t) {
        if (t < names.size()) {
          results[t] = find_slices_1d(table, names[t], options);
        } else {
          const auto& p = pairs[t - names.size()];
          results[t] = find_slices_2d(table, p.first, p.second, options);
        }
      },
      1);
  std::vector<Slice> merged;
  for (auto& r : results) merged.insert(merged.end(), r.begin(), r.end());
  return rank_slices(std::move(merged));
}

}  // namespace cmx
