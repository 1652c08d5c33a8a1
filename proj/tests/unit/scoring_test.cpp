#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "cmx/errors.hpp"
#include "cmx/scoring.hpp"
#include "cmx/synth.hpp"
#include "oracles.hpp"

namespace cmx {
namespace {

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected cmx::Error";
  return ErrorCode::IoError;
}

ClassGeometry moments(std::string label, Eigen::Vector2d mean, Eigen::Matrix2d cov) {
  return geometry_from_moments(std::move(label), 10, mean, cov);
}

GeometryModel two_class_model(Eigen::Vector2d a, Eigen::Vector2d b,
                              Eigen::Matrix2d cov = Eigen::Matrix2d::Identity()) {
  return GeometryModel({moments("a", a, cov), moments("b", b, cov)}, {});
}

TEST(Distance, EuclideanThreeFourFive) {
  const auto g = moments("c", {0, 0}, Eigen::Matrix2d::Identity());
  EXPECT_DOUBLE_EQ(distance(Eigen::Vector2d(3, 4), g, DistanceKind::Euclidean), 5.0);
}

TEST(Distance, CosineOfOrthogonalVectors) {
  const auto g = moments("c", {0, 1}, Eigen::Matrix2d::Identity());
  EXPECT_DOUBLE_EQ(distance(Eigen::Vector2d(1, 0), g, DistanceKind::Cosine), 1.0);
  EXPECT_NEAR(distance(Eigen::Vector2d(0, 3), g, DistanceKind::Cosine), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(distance(Eigen::Vector2d(1, 0), g, DistanceKind::Cosine, {.literal_cosine = true}), 0.0);
}

TEST(Distance, CosineRejectsZeroVectors) {
  const auto g = moments("c", {0, 1}, Eigen::Matrix2d::Identity());
  EXPECT_EQ(code_of([&] { (void)distance(Eigen::Vector2d(0, 0), g, DistanceKind::Cosine); }),
            ErrorCode::DegenerateVector);
  const auto origin = moments("o", {0, 0}, Eigen::Matrix2d::Identity());
  EXPECT_EQ(code_of([&] { (void)distance(Eigen::Vector2d(1, 0), origin, DistanceKind::Cosine); }),
            ErrorCode::DegenerateVector);
}

TEST(Distance, MahalanobisClosedForm) {
  Eigen::Matrix2d cov;
  cov << 4, 0, 0, 1;
  const auto g = moments("c", {1, 1}, cov);
  EXPECT_NEAR(distance(Eigen::Vector2d(3, 1), g, DistanceKind::MahalanobisCov), 1.0, 1e-15);
  // Correlation is the identity, so the raw residual norm is used.
  EXPECT_NEAR(distance(Eigen::Vector2d(3, 1), g, DistanceKind::MahalanobisCorr), 2.0, 1e-15);
}

TEST(Distance, NegativeQuadraticForm) {
  auto g = moments("c", {0, 0}, Eigen::Matrix2d::Identity());
  g.precision_cov = -1e-10 * Eigen::Matrix2d::Identity();
  EXPECT_EQ(distance(Eigen::Vector2d(1, 0), g, DistanceKind::MahalanobisCov), 0.0);
  g.precision_cov = -1.0 * Eigen::Matrix2d::Identity();
  EXPECT_EQ(code_of([&] { (void)distance(Eigen::Vector2d(1, 0), g, DistanceKind::MahalanobisCov); }),
            ErrorCode::NumericalError);
}

TEST(Distance, DimensionMismatch) {
  const auto g = moments("c", {0, 0}, Eigen::Matrix2d::Identity());
  EXPECT_EQ(code_of([&] { (void)distance(Eigen::Vector3d(1, 0, 0), g, DistanceKind::Euclidean); }),
            ErrorCode::DimensionMismatch);
}

TEST(DistanceKind, NamesAndAliases) {
  for (const auto k : kAllDistanceKinds) EXPECT_EQ(parse_distance_kind(to_string(k)), k);
  EXPECT_EQ(parse_distance_kind("mah_corr"), DistanceKind::MahalanobisCorr);
  EXPECT_EQ(column_name(DistanceKind::MahalanobisCov), "compl_mah");
  EXPECT_EQ(code_of([] { (void)parse_distance_kind("manhattan"); }), ErrorCode::InvalidArgument);
}

TEST(Complexity, EquidistantIsLogTwo) {
  const auto model = two_class_model({-1, 0}, {1, 0});
  for (const auto kind : {DistanceKind::Euclidean, DistanceKind::MahalanobisCov,
                          DistanceKind::MahalanobisCorr}) {
    EXPECT_NEAR(complexity(Eigen::Vector2d(0, 3), "a", model, kind), std::log(2.0), 1e-15);
    EXPECT_NEAR(complexity(Eigen::Vector2d(0, 3), "b", model, kind), std::log(2.0), 1e-15);
  }
}

// Reference values evaluated at 50 significant digits.
TEST(Complexity, ScalarReferenceValues) {
  const std::vector<double> near = {0.0, 10.0};
  EXPECT_NEAR(complexity_from_distances(near, 0), 4.5398899216864647e-05, 1e-18);
  const std::vector<double> far = {710.0, 720.0};
  const double h = complexity_from_distances(far, 0);
  EXPECT_TRUE(std::isfinite(h));
  EXPECT_NEAR(h, 4.5398899216864647e-05, 1e-18);
  EXPECT_NEAR(complexity_from_distances(far, 1), 10.0 + 4.5398899216864647e-05, 1e-12);
}

TEST(Complexity, MatchesNaiveEvaluation) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 20.0);
  std::uniform_int_distribution<int> k(2, 10);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> d(static_cast<std::size_t>(k(rng)));
    for (auto& v : d) v = u(rng);
    for (std::size_t own = 0; own < d.size(); ++own) {
      EXPECT_NEAR(complexity_from_distances(d, own), oracle::complexity_naive(d, own), 1e-9);
    }
  }
}

TEST(Complexity, LargeDistancesStayFinite) {
  const std::vector<double> d = {1e6, 1e6 - 3.0, 5e5};
  for (std::size_t own = 0; own < d.size(); ++own) {
    const double h = complexity_from_distances(d, own);
    EXPECT_TRUE(std::isfinite(h));
    EXPECT_GE(h, 0.0);
  }
  EXPECT_NEAR(log_sum_exp_neg(d), -5e5, 1e-9);
}

TEST(Complexity, UnknownClass) {
  const auto model = two_class_model({-1, 0}, {1, 0});
  EXPECT_EQ(code_of([&] { (void)complexity(Eigen::Vector2d(0, 0), "zzz", model, DistanceKind::Euclidean); }),
            ErrorCode::UnknownClass);
}

TEST(OodScore, MaxOfNegativeDistances) {
  Eigen::Matrix2d cov = Eigen::Matrix2d::Identity();
  const auto model = two_class_model({0, 0}, {7, 0}, cov);
  EXPECT_DOUBLE_EQ(ood_score(Eigen::Vector2d(2, 0), model), -2.0);
  EXPECT_DOUBLE_EQ(ood_score(Eigen::Vector2d(0, 0), model), 0.0);
}

TEST(OodScore, FarOutlier) {
  const auto data = generate(preset(Preset::ThreeSingleOverlap), 17);
  const auto model = fit(data);
  Eigen::Vector2d far(0.0, 0.0);
  double max_sd = 0.0;
  for (const auto& g : model.geometries()) {
    max_sd = std::max(max_sd, std::sqrt(g.covariance.diagonal().maxCoeff()));
    far = far.cwiseMax(g.centroid);
  }
  far += Eigen::Vector2d(50.0 * max_sd, 50.0 * max_sd);
  EXPECT_LT(ood_score(far, model), -30.0);
}

TEST(Baseline, NearestCentroidAndTieBreak) {
  const auto model = two_class_model({0, 0}, {3, 0});
  EXPECT_EQ(baseline_predict(Eigen::Vector2d(0, 0), model, DistanceKind::Euclidean).label, "a");
  EXPECT_EQ(baseline_predict(Eigen::Vector2d(3, 0), model, DistanceKind::Euclidean).label, "b");
  const auto tie = baseline_predict(Eigen::Vector2d(1.5, 1), model, DistanceKind::Euclidean);
  EXPECT_EQ(tie.label, "a");
  EXPECT_NEAR(tie.nll, std::log(2.0), 1e-15);
}

TEST(Baseline, CentroidsThemselvesAreClassifiedPerfectly) {
  Eigen::MatrixXd x(2, 2);
  x << 0, 0, 10, 10;
  const EmbeddedDataset data({"p", "q"}, {"a", "b"}, x);
  const auto model = two_class_model({0, 0}, {10, 10});
  EXPECT_EQ(baseline_accuracy(data, model, DistanceKind::Euclidean), 1.0);
  EXPECT_EQ(code_of([&] { (void)baseline_accuracy(EmbeddedDataset{}, model, DistanceKind::Euclidean); }),
            ErrorCode::EmptyDataset);
}

TEST(Baseline, ShuffledLabelsGiveChanceAccuracy) {
  std::vector<GaussianSpec> specs = {
      {"a", Eigen::Vector2d(-5, 0), Eigen::Matrix2d::Identity(), 500},
      {"b", Eigen::Vector2d(5, 0), Eigen::Matrix2d::Identity(), 500}};
  const auto data = generate(specs, 8);
  const auto model = model_from_specs(specs);
  EXPECT_GT(baseline_accuracy(data, model, DistanceKind::Euclidean), 0.99);

  auto labels = data.labels();
  std::mt19937_64 rng(8);
  std::shuffle(labels.begin(), labels.end(), rng);
  const EmbeddedDataset shuffled(data.ids(), labels, data.vectors());
  EXPECT_NEAR(baseline_accuracy(shuffled, model, DistanceKind::Euclidean), 0.5, 0.05);
}

TEST(Baseline, TwoEqualPresetAccuracyRegime) {
  const auto data = generate(preset(Preset::TwoEqual), 42);
  const auto model = fit(data);
  const double acc = baseline_accuracy(data, model, DistanceKind::MahalanobisCov);
  EXPECT_GE(acc, 0.90);
  EXPECT_LE(acc, 0.97);
}

TEST(ScoreDataset, RecordsSatisfyInvariants) {
  const auto data = generate(preset(Preset::ThreeTwoOverlaps), 4);
  const auto model = fit(data);
  const auto records = score_dataset(data, model, kAllDistanceKinds);
  ASSERT_EQ(records.size(), data.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    EXPECT_EQ(r.id, data.ids()[i]);
    ASSERT_TRUE(r.ood_score.has_value());
    for (const auto& [kind, s] : r.scores) {
      EXPECT_GE(s.complexity, 0.0);
      EXPECT_EQ(s.prediction, model.labels()[argmin_index(s.distances)]);
      double total = 0.0;
      for (std::size_t c = 0; c < s.distances.size(); ++c) {
        const double h = complexity_from_distances(s.distances, c);
        EXPECT_LE(s.prediction_nll, h);
        total += std::exp(-h);
      }
      EXPECT_NEAR(total, 1.0, 1e-9);
    }
  }
}

TEST(ScoreDataset, TestLabelsOnlyAffectOwnComplexity) {
  const auto data = generate(preset(Preset::ThreeSingleOverlap), 6);
  const auto model = fit(data);
  auto labels = data.labels();
  std::rotate(labels.begin(), labels.begin() + 1, labels.end());
  const EmbeddedDataset relabeled(data.ids(), labels, data.vectors());
  const auto a = score_dataset(data, model, kAllDistanceKinds);
  const auto b = score_dataset(relabeled, model, kAllDistanceKinds);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].ood_score, b[i].ood_score);
    for (const auto kind : kAllDistanceKinds) {
      EXPECT_EQ(a[i].scores.at(kind).distances, b[i].scores.at(kind).distances);
      EXPECT_EQ(a[i].scores.at(kind).prediction, b[i].scores.at(kind).prediction);
      EXPECT_EQ(a[i].scores.at(kind).prediction_nll, b[i].scores.at(kind).prediction_nll);
    }
  }
}

TEST(ScoreDataset, DimensionMismatch) {
  const auto model = two_class_model({0, 0}, {1, 1});
  const EmbeddedDataset data({"p"}, {"a"}, Eigen::MatrixXd::Zero(1, 3));
  const std::array kinds = {DistanceKind::Euclidean};
  EXPECT_EQ(code_of([&] { (void)score_dataset(data, model, kinds); }), ErrorCode::DimensionMismatch);
}

}  // namespace
}  // namespace cmx
