#include "oracles.hpp"

#include "ifl/dataset.hpp"
#include "ifl/errors.hpp"
#include "ifl/features.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

using namespace ifl;
using namespace ifl::testing;

namespace {

dec::ClusterModel model_with(const Matrix& centroids, const std::vector<std::size_t>& sizes) {
  Labels a;
  for (std::size_t j = 0; j < sizes.size(); ++j) a.insert(a.end(), sizes[j], j);
  dec::ClusterModel m;
  m.centroids = centroids;
  m.hard = cluster::HardClustering::from_assignment(a, sizes.size(), centroids);
  return m;
}

Eigen::RowVectorXd row(std::initializer_list<double> v) {
  Eigen::RowVectorXd r(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) r(i++) = x;
  return r;
}

core::IflConfig small_config() {
  core::IflConfig cfg;
  cfg.s = 3;
  cfg.r = 4;
  cfg.hidden_dims = {16};
  cfg.latent_dim = 3;
  cfg.autoencoder.epochs = 25;
  cfg.autoencoder.batch_size = 32;
  cfg.autoencoder.adam.learning_rate = 3e-3;
  cfg.dec.batch_size = 32;
  cfg.dec.max_iter = 200;
  cfg.seed = 5;
  return cfg;
}

}  // namespace

// ---- inner folding

TEST(InnerFolding, BalancedPartition) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const std::size_t r = 2 + seed % 9;
    const std::size_t n = r + seed * 3;
    const auto f = core::inner_folding(n, r, seed);
    std::vector<std::size_t> seen(n, 0);
    for (std::size_t j = 0; j < r; ++j)
      for (auto id : f.fold(j)) ++seen[id];
    EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](auto c) { return c == 1; }));
    const auto sizes = f.fold_sizes();
    EXPECT_LE(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()), 1u);
    EXPECT_EQ(f.complement(0).size() + f.fold(0).size(), n);
  }
}

TEST(InnerFolding, FiveThreesAndFiveTwos) {
  auto sizes = core::inner_folding(25, 10, 3).fold_sizes();
  std::sort(sizes.begin(), sizes.end());
  EXPECT_EQ(sizes, (std::vector<std::size_t>{2, 2, 2, 2, 2, 3, 3, 3, 3, 3}));
}

TEST(InnerFolding, SingletonFolds) {
  for (auto s : core::inner_folding(10, 10, 1).fold_sizes()) EXPECT_EQ(s, 1u);
}

TEST(InnerFolding, Errors) {
  EXPECT_THROW(core::inner_folding(5, 6, 0), ConfigError);
  EXPECT_THROW(core::inner_folding(5, 1, 0), ConfigError);
}

// ---- error features

TEST(Confidence, DirectRatio) {
  Matrix c(2, 1);
  c << 0.0, 10.0;
  EXPECT_DOUBLE_EQ(core::confidence(row({1.0}), model_with(c, {90, 10})), 0.9);
  EXPECT_DOUBLE_EQ(core::confidence(row({3.0}), model_with(Matrix::Zero(1, 1), {7})), 1.0);
}

TEST(Confidence, TieGoesToFirstCluster) {
  Matrix c(2, 1);
  c << -1.0, 1.0;
  EXPECT_DOUBLE_EQ(core::confidence(row({0.0}), model_with(c, {30, 70})), 0.3);
}

TEST(Confidence, RatiosSumToOne) {
  Matrix c(3, 1);
  c << 0.0, 5.0, 10.0;
  const auto m = model_with(c, {11, 23, 5});
  double total = 0.0;
  for (double z : {0.0, 5.0, 10.0}) {
    const double conf = core::confidence(row({z}), m);
    EXPECT_GT(conf, 0.0);
    EXPECT_LE(conf, 1.0);
    total += conf;
  }
  EXPECT_NEAR(total, 1.0, 1e-15);
}

TEST(Weight, PythagoreanValues) {
  Matrix c(2, 2);
  c << 3, 4, 0, 1;
  const auto w = core::weight(row({0.0, 0.0}), model_with(c, {1, 1}));
  EXPECT_DOUBLE_EQ(w[0], 5.0);
  EXPECT_DOUBLE_EQ(w[1], 1.0);
  EXPECT_DOUBLE_EQ(core::weight(row({3.0, 4.0}), model_with(c, {1, 1}))[0], 0.0);
}

TEST(Weight, MatchesDistanceOracle) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 100; ++t) {
    const Matrix c = random_matrix(4, 3, rng, 5.0);
    const Matrix z = random_matrix(1, 3, rng, 5.0);
    const auto w = core::weight(z.row(0), model_with(c, {1, 1, 1, 1}));
    const auto zt = to_table(z)[0];
    const auto ct = to_table(c);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(w[j], naive_distance(zt, ct[j]), 1e-12);
  }
}

TEST(Weight, PermutationEquivariant) {
  std::mt19937_64 rng(8);
  const Matrix c = random_matrix(4, 2, rng, 3.0);
  const std::vector<std::size_t> perm{2, 0, 3, 1};
  Matrix relabeled(4, 2);
  for (std::size_t j = 0; j < 4; ++j) relabeled.row(static_cast<Eigen::Index>(perm[j])) = c.row(static_cast<Eigen::Index>(j));
  const Matrix z = random_matrix(1, 2, rng);
  const auto w = core::weight(z.row(0), model_with(c, {1, 1, 1, 1}));
  const auto w_rel = core::weight(z.row(0), model_with(relabeled, {1, 1, 1, 1}));
  EXPECT_EQ(core::align_weights(w, perm), w_rel);
}

TEST(Weight, DimensionMismatchThrows) {
  EXPECT_THROW(core::weight(row({1.0}), model_with(Matrix::Zero(2, 2), {1, 1})), ShapeError);
}

TEST(AccuracyFeature, NearestClusterAccuracy) {
  Matrix c(2, 1);
  c << 0.0, 10.0;
  // Cluster 0: labels {0,0,1} -> 2/3; cluster 1: {1,1} -> 1.
  const auto m = model_with(c, {3, 2});
  const auto per = cluster::per_cluster_accuracy(m.hard, Labels{0, 0, 1, 1, 1});
  EXPECT_NEAR(core::accuracy_feature(row({1.0}), m, per), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(core::accuracy_feature(row({9.0}), m, per), 1.0);
  const auto unlabeled = core::error_features(row({1.0}), m);
  EXPECT_FALSE(unlabeled.accuracy.has_value());
  EXPECT_TRUE(core::error_features(row({1.0}), m, &per).accuracy.has_value());
}

// ---- tracking

TEST(Tracking, Thresholds) {
  EXPECT_NEAR(core::trackability_threshold(10, 4), 0.35, 1e-15);
  EXPECT_NEAR(core::trackability_threshold(10, 10), 0.20, 1e-15);
}

TEST(Tracking, IdentityAndSwap) {
  core::ClusterMembership ref{{0, 1, 2, 3, 4, 5}, {0, 0, 1, 1, 2, 2}, 3};
  core::ClusterMembership same{{2, 3, 4, 5, 6}, {1, 1, 2, 2, 0}, 3};
  auto t = core::track_clusters(ref, same, 10);
  EXPECT_EQ(t.permutation, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(t.shared, 4u);
  EXPECT_EQ(t.overlap, 1.0);
  EXPECT_TRUE(t.trackable);

  core::ClusterMembership swapped{{0, 1, 2, 3, 4, 5}, {1, 1, 0, 0, 2, 2}, 3};
  t = core::track_clusters(ref, swapped, 10);
  EXPECT_EQ(t.permutation, (std::vector<std::size_t>{1, 0, 2}));
}

TEST(Tracking, MatchesPermutationEnumeration) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> d(0, 2);
    core::ClusterMembership ref, cur;
    ref.s = cur.s = 3;
    for (std::size_t i = 0; i < 30; ++i) {
      ref.instance_ids.push_back(i);
      ref.assignment.push_back(d(rng));
      cur.instance_ids.push_back(i + 5);
      cur.assignment.push_back(d(rng));
    }
    Matrix cost = Matrix::Zero(3, 3);
    for (std::size_t k = 0; k < 25; ++k)
      cost(static_cast<Eigen::Index>(cur.assignment[k]), static_cast<Eigen::Index>(ref.assignment[k + 5])) -= 1.0;
    const auto brute = brute_force_assignment(cost);
    const auto t = core::track_clusters(ref, cur, 10);
    EXPECT_EQ(t.shared, 25u);
    EXPECT_DOUBLE_EQ(t.overlap * 25.0, -brute.second) << "seed " << seed;
    std::set<std::size_t> image(t.permutation.begin(), t.permutation.end());
    EXPECT_EQ(image.size(), 3u);
  }
}

TEST(Tracking, LabelAccuracyDrivesThreshold) {
  core::ClusterMembership ref{{0, 1}, {0, 1}, 2};
  auto t = core::track_clusters(ref, ref, 10, 0.5);
  EXPECT_EQ(t.agreement, 0.5);
  EXPECT_NEAR(t.threshold, 0.6, 1e-15);
  EXPECT_FALSE(t.trackable);
}

TEST(Tracking, NoSharedInstancesThrows) {
  core::ClusterMembership a{{0, 1}, {0, 1}, 2}, b{{2, 3}, {0, 1}, 2};
  EXPECT_THROW(core::track_clusters(a, b, 10), DataError);
}

// ---- packaging

namespace {

core::IflFeatureTable raw_table(std::size_t n, std::size_t s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  core::IflFeatureTable t;
  t.mode = core::FeatureMode::ClassificationRaw;
  t.s = s;
  t.columns = core::feature_columns(t.mode, s);
  t.features = random_matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(s + 2), rng).cwiseAbs();
  t.labels.emplace();
  for (std::size_t i = 0; i < n; ++i) {
    t.instance_id.push_back(i);
    t.labels->push_back(i % s);
  }
  return t;
}

}  // namespace

TEST(Packaging, Widths) {
  EXPECT_EQ(core::feature_columns(core::FeatureMode::Clustering, 4).size(), 5u);
  EXPECT_EQ(core::feature_columns(core::FeatureMode::Technique1, 4).size(), 3u);
  EXPECT_EQ(core::feature_columns(core::FeatureMode::Technique2, 6).size(), 8u);
  EXPECT_EQ(core::feature_columns(core::FeatureMode::ClassificationRaw, 6).size(), 8u);
}

TEST(Packaging, TechniqueOneVersions) {
  const auto raw = raw_table(100, 4, 1);
  const auto t1 = core::package_technique1(raw);
  t1.validate();
  ASSERT_EQ(t1.rows(), 400u);
  EXPECT_EQ(t1.features.cols(), 3);
  for (std::size_t k = 0; k < t1.rows(); ++k) {
    const auto i = static_cast<Eigen::Index>(t1.instance_id[k]);
    const auto v = static_cast<Eigen::Index>(t1.version_id[k]);
    const auto kk = static_cast<Eigen::Index>(k);
    EXPECT_EQ(t1.features(kk, 0), raw.features(i, 0));
    EXPECT_EQ(t1.features(kk, 1), raw.features(i, 1 + v));
    EXPECT_EQ(t1.features(kk, 2), raw.features(i, 5));
    EXPECT_EQ((*t1.labels)[k], (*raw.labels)[static_cast<std::size_t>(i)]);
  }
}

TEST(Packaging, TechniqueTwoOrder) {
  const auto raw = raw_table(10, 6, 2);
  const auto t2 = core::package_technique2(raw);
  t2.validate();
  EXPECT_EQ(t2.rows(), 10u);
  EXPECT_EQ(t2.features.cols(), 8);
  EXPECT_EQ(t2.features.col(0), raw.features.col(0));
  EXPECT_EQ(t2.features.col(1), raw.features.col(7));
  EXPECT_EQ(t2.features.middleCols(2, 6), raw.features.middleCols(1, 6));
  EXPECT_EQ(t2.columns[1], "accuracy");
}

TEST(Packaging, RejectsWrongMode) {
  auto raw = raw_table(3, 2, 3);
  const auto t2 = core::package_technique2(raw);
  EXPECT_THROW(core::package_technique1(t2), DataError);
}

// ---- aggregation

TEST(Aggregate, SumThenArgmax) {
  Matrix scores(2, 2);
  scores << 0.6, 0.4, 0.1, 0.9;
  const auto out = core::aggregate_versions(scores, {7, 7}, {0, 1}, 2);
  EXPECT_EQ(out.instance_id, (std::vector<std::size_t>{7}));
  EXPECT_EQ(out.label, (Labels{1}));
}

TEST(Aggregate, UnanimityAndTies) {
  Matrix scores(4, 3);
  scores << 0, 0, 1, 0, 0, 1, 0.5, 0.5, 0, 0.5, 0.5, 0;
  const auto out = core::aggregate_versions(scores, {0, 0, 1, 1}, {0, 1, 0, 1}, 2);
  EXPECT_EQ(out.label, (Labels{2, 0}));
}

TEST(Aggregate, MissingVersionThrows) {
  EXPECT_THROW(core::aggregate_versions(Matrix::Zero(3, 2), {0, 0, 1}, {0, 1, 0}, 2), DataError);
}

TEST(Aggregate, VotesTieBrokenBySmallestWeight) {
  // Two versions, votes 1 vs 0; version predicting 1 is closer.
  const auto out = core::aggregate_votes({0, 1}, {2.5, 0.5}, {4, 4}, {0, 1}, 2);
  EXPECT_EQ(out.label, (Labels{1}));
  const auto majority = core::aggregate_votes({2, 2, 0}, {0.1, 0.2, 0.01}, {0, 0, 0}, {0, 1, 2}, 3);
  EXPECT_EQ(majority.label, (Labels{2}));
}

// ---- pipelines

class PipelineOnBlobs : public ::testing::Test {
 protected:
  Dataset data = make_blobs({120, 6, 3, 1.0, 10.0, 21});
  core::IflConfig cfg = small_config();
};

TEST_F(PipelineOnBlobs, ClusteringTableShape) {
  const auto t = core::ifl_cluster_features(data.x, cfg);
  t.validate();
  EXPECT_EQ(t.rows(), 120u);
  EXPECT_EQ(t.features.cols(), 4);
  std::vector<std::size_t> ids(120);
  std::iota(ids.begin(), ids.end(), 0);
  EXPECT_EQ(t.instance_id, ids);
  EXPECT_EQ(t.runs.size(), 4u);
  EXPECT_FALSE(t.labels.has_value());
  for (Eigen::Index i = 0; i < t.features.rows(); ++i) {
    EXPECT_GT(t.features(i, 0), 0.0);
    EXPECT_LE(t.features(i, 0), 1.0);
    for (Eigen::Index j = 1; j < 4; ++j) EXPECT_GE(t.features(i, j), 0.0);
  }
}

TEST_F(PipelineOnBlobs, ClusteringIsDeterministic) {
  const auto a = core::ifl_cluster_features(data.x, cfg);
  const auto b = core::ifl_cluster_features(data.x, cfg);
  EXPECT_EQ(a.features, b.features);
  cfg.threads = 2;
  const auto c = core::ifl_cluster_features(data.x, cfg);
  EXPECT_EQ(a.features, c.features);
}

TEST_F(PipelineOnBlobs, ClassificationTrainAndTest) {
  const auto [train, test] = train_test_split(data, 0.25, 2);
  const auto raw = core::ifl_classification_train_features(train.x, *train.labels, cfg);
  raw.validate();
  EXPECT_EQ(raw.rows(), train.n());
  EXPECT_EQ(raw.features.cols(), 5);
  ASSERT_TRUE(raw.labels);
  for (Eigen::Index i = 0; i < raw.features.rows(); ++i) {
    EXPECT_GE(raw.features(i, 4), 0.0);
    EXPECT_LE(raw.features(i, 4), 1.0);
  }

  ASSERT_TRUE(raw.reference);
  const auto tf = core::ifl_classification_test_features(train.x, *train.labels, test.x, cfg, &*raw.reference);
  EXPECT_EQ(tf.rows(), test.n());
  EXPECT_EQ(tf.features.cols(), 5);

  const auto empty = core::ifl_classification_test_features(train.x, *train.labels, Matrix(0, 6), cfg);
  EXPECT_EQ(empty.rows(), 0u);
}

TEST_F(PipelineOnBlobs, PureClustersGivePerfectAccuracyColumn) {
  const auto wide = make_blobs({120, 6, 3, 1.0, 20.0, 21});
  const auto raw = core::ifl_classification_train_features(wide.x, *wide.labels, cfg);
  for (const auto& run : raw.runs) ASSERT_EQ(run.inner_accuracy, 1.0);
  EXPECT_EQ(raw.features.col(4).minCoeff(), 1.0);
}

TEST_F(PipelineOnBlobs, TooFewInstancesPerFold) {
  cfg.s = 3;
  cfg.r = 4;
  EXPECT_THROW(core::ifl_cluster_features(data.x.topRows(3), cfg), ConfigError);
}
