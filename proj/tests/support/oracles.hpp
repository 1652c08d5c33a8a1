#pragma once

// Independent reference computations for tests. Nothing here calls into the
// library's numerical routines; each oracle is the direct textbook formula.

#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cmx/analysis.hpp"

namespace cmx::oracle {

/// Covariance by explicit double loop over dimensions and samples, 1/n normalization.
inline Eigen::MatrixXd covariance_loops(const Eigen::MatrixXd& x) {
  const auto n = x.rows();
  const auto d = x.cols();
  std::vector<double> mean(static_cast<std::size_t>(d), 0.0);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) mean[static_cast<std::size_t>(j)] += x(i, j);
    mean[static_cast<std::size_t>(j)] /= static_cast<double>(n);
  }
  Eigen::MatrixXd c(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = 0; b < d; ++b) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        s += (x(i, a) - mean[static_cast<std::size_t>(a)]) * (x(i, b) - mean[static_cast<std::size_t>(b)]);
      }
      c(a, b) = s / static_cast<double>(n);
    }
  }
  return c;
}

inline Eigen::MatrixXd correlation_elementwise(const Eigen::MatrixXd& cov) {
  Eigen::MatrixXd r(cov.rows(), cov.cols());
  for (Eigen::Index i = 0; i < cov.rows(); ++i) {
    for (Eigen::Index j = 0; j < cov.cols(); ++j) {
      r(i, j) = cov(i, j) / std::sqrt(cov(i, i) * cov(j, j));
    }
  }
  return r;
}

/// -log(softmax) evaluated literally, in long double.
inline double complexity_naive(const std::vector<double>& distances, std::size_t own) {
  long double denom = 0.0L;
  for (double d : distances) denom += std::exp(-static_cast<long double>(d));
  const long double p = std::exp(-static_cast<long double>(distances[own])) / denom;
  return static_cast<double>(-std::log(p));
}

/// Brute-force slice statistics: every row is tested against every range.
struct SliceCounts {
  std::size_t support = 0;
  std::size_t errors = 0;
};

inline SliceCounts count_slice(const AnalysisTable& table, const Slice& s) {
  SliceCounts out;
  for (std::size_t r = 0; r < table.size(); ++r) {
    bool inside = true;
    for (std::size_t k = 0; k < s.features.size(); ++k) {
      const double v = table.feature(s.features[k])[r];
      inside = inside && s.ranges[k].lo <= v && v <= s.ranges[k].hi;
    }
    if (inside) {
      ++out.support;
      out.errors += table.is_error(r) ? 1 : 0;
    }
  }
  return out;
}

/// Random matrix with entries in [-1, 1) from a test-local engine.
inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = u(rng);
  }
  return m;
}

inline Eigen::MatrixXd random_spd(std::mt19937_64& rng, Eigen::Index d) {
  const Eigen::MatrixXd a = random_matrix(rng, d, d);
  return a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(d, d);
}

}  // namespace cmx::oracle
