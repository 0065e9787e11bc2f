#include "ifl/dataset.hpp"
#include "ifl/errors.hpp"
#include "ifl/io.hpp"

#include <gtest/gtest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>

using namespace ifl;
namespace fs = std::filesystem;

namespace {

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir = fs::temp_directory_path() / (std::string("ifl_io_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  fs::path write(const std::string& name, const std::string& text) {
    const auto p = dir / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }

  fs::path write_bytes(const std::string& name, const std::vector<unsigned char>& bytes) {
    const auto p = dir / name;
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    return p;
  }

  fs::path dir;
};

void put_u32(std::vector<unsigned char>& b, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) b.push_back(static_cast<unsigned char>((v >> s) & 0xFF));
}

std::vector<unsigned char> idx_images(std::uint32_t n, std::uint32_t rows, std::uint32_t cols) {
  std::vector<unsigned char> b;
  put_u32(b, 0x803);
  put_u32(b, n);
  put_u32(b, rows);
  put_u32(b, cols);
  for (std::uint32_t i = 0; i < n * rows * cols; ++i) b.push_back(static_cast<unsigned char>((i * 37) % 256));
  return b;
}

std::vector<unsigned char> idx_labels(const std::vector<unsigned char>& labels) {
  std::vector<unsigned char> b;
  put_u32(b, 0x801);
  put_u32(b, static_cast<std::uint32_t>(labels.size()));
  b.insert(b.end(), labels.begin(), labels.end());
  return b;
}

}  // namespace

using Csv = TempDir;
using Idx = TempDir;
using Features = TempDir;
using Report = TempDir;
using Projection = TempDir;

TEST_F(Csv, HeaderAndNamedLabel) {
  const auto p = write("a.csv", "f1,f2,class\n1,2,7\n3,4,-1\n5,6,7\n");
  io::CsvOptions opts;
  opts.label_column = "class";
  const auto d = io::load_csv(p, opts);
  EXPECT_EQ(d.n(), 3u);
  EXPECT_EQ(d.dim(), 2u);
  EXPECT_EQ(*d.labels, (Labels{1, 0, 1}));
  EXPECT_EQ(d.label_values, (std::vector<long long>{-1, 7}));
  EXPECT_EQ(d.x(2, 1), 6.0);
}

TEST_F(Csv, NoHeaderNegativeIndex) {
  const auto p = write("b.csv", "0, 1.5, 2\n1, 2.5, 0\n");
  io::CsvOptions opts;
  opts.label_column = "-1";
  const auto d = io::load_csv(p, opts);
  EXPECT_EQ(d.n(), 2u);
  EXPECT_EQ(d.dim(), 2u);
  EXPECT_EQ(*d.labels, (Labels{1, 0}));
  EXPECT_EQ(d.x(1, 1), 2.5);
}

TEST_F(Csv, NoLabels) {
  const auto d = io::load_csv(write("c.csv", "1,2\n3,4\n"));
  EXPECT_FALSE(d.labels.has_value());
  EXPECT_EQ(d.x(1, 0), 3.0);
}

TEST_F(Csv, ErrorsNameTheLine) {
  try {
    io::load_csv(write("d.csv", "a,b\n1,2\n3,x\n"));
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("d.csv:3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(io::load_csv(write("e.csv", "1,2\n3\n")), DataError);
  EXPECT_THROW(io::load_csv(write("f.csv", "")), DataError);
  EXPECT_THROW(io::load_csv(dir / "missing.csv"), DataError);
  io::CsvOptions opts;
  opts.label_column = "nope";
  EXPECT_THROW(io::load_csv(write("g.csv", "a,b\n1,2\n"), opts), DataError);
  opts.label_column = "1";
  EXPECT_THROW(io::load_csv(write("h.csv", "1,2.5\n"), opts), DataError);
}

TEST_F(Csv, Scaling) {
  io::CsvOptions opts;
  opts.scaling = io::Scaling::DivideByMax;
  auto d = io::load_csv(write("s.csv", "1,-4\n2,2\n"), opts);
  EXPECT_DOUBLE_EQ(d.x(0, 1), -1.0);
  EXPECT_DOUBLE_EQ(d.x(1, 0), 0.5);
  opts.scaling = io::Scaling::DivideByTwo;
  d = io::load_csv(write("t.csv", "1,-4\n"), opts);
  EXPECT_DOUBLE_EQ(d.x(0, 1), -2.0);
  EXPECT_EQ(io::scaling_from_string(io::to_string(io::Scaling::DivideByTwo)), io::Scaling::DivideByTwo);
}

TEST_F(Idx, LoadsImagesAndLabels) {
  const auto images = write_bytes("img", idx_images(3, 2, 2));
  const auto labels = write_bytes("lab", idx_labels({5, 1, 5}));
  const auto d = io::load_idx(images, labels, io::Scaling::None);
  EXPECT_EQ(d.n(), 3u);
  EXPECT_EQ(d.dim(), 4u);
  EXPECT_EQ(d.x(1, 0), 4 * 37 % 256);
  EXPECT_EQ(*d.labels, (Labels{1, 0, 1}));
  const auto scaled = io::load_idx(images, labels);
  EXPECT_LE(scaled.x.maxCoeff(), 1.0);
  EXPECT_DOUBLE_EQ(scaled.x.maxCoeff(), 1.0);
}

TEST_F(Idx, RejectsCorruptFiles) {
  auto images = idx_images(3, 2, 2);
  const auto labels = write_bytes("lab", idx_labels({0, 1, 2}));
  auto truncated = images;
  truncated.resize(truncated.size() - 1);
  EXPECT_THROW(io::load_idx(write_bytes("t", truncated), labels), DataError);
  auto bad_magic = images;
  bad_magic[3] = 0x01;
  EXPECT_THROW(io::load_idx(write_bytes("m", bad_magic), labels), DataError);
  EXPECT_THROW(io::load_idx(write_bytes("i", images), write_bytes("l2", idx_labels({0, 1}))), DataError);
  EXPECT_THROW(io::load_idx(write_bytes("short", {0, 0}), labels), DataError);
}

namespace {

core::IflFeatureTable table_for(core::FeatureMode mode, std::size_t s, bool labels) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> d;
  core::IflFeatureTable t;
  t.mode = mode;
  t.s = s;
  t.columns = core::feature_columns(mode, s);
  const std::size_t n = 4;
  const std::size_t rows = mode == core::FeatureMode::Technique1 ? n * s : n;
  t.features.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(t.columns.size()));
  for (Eigen::Index i = 0; i < t.features.size(); ++i) t.features.data()[i] = d(rng) / 3.0;
  if (labels) t.labels.emplace();
  for (std::size_t k = 0; k < rows; ++k) {
    t.instance_id.push_back(mode == core::FeatureMode::Technique1 ? k / s : k);
    if (mode == core::FeatureMode::Technique1) t.version_id.push_back(k % s);
    if (labels) t.labels->push_back(k % 2);
  }
  return t;
}

}  // namespace

TEST_F(Features, RoundTripEveryMode) {
  for (auto mode : {core::FeatureMode::Clustering, core::FeatureMode::ClassificationRaw, core::FeatureMode::Technique1,
                    core::FeatureMode::Technique2}) {
    const bool labels = mode != core::FeatureMode::Clustering;
    const auto t = table_for(mode, 3, labels);
    const auto p = dir / ("t_" + core::to_string(mode) + ".csv");
    io::export_features(t, p);
    const auto back = io::load_features(p);
    EXPECT_EQ(back.mode, mode);
    EXPECT_EQ(back.s, 3u);
    EXPECT_EQ(back.features, t.features);  // 17 significant digits round-trip exactly
    EXPECT_EQ(back.instance_id, t.instance_id);
    EXPECT_EQ(back.version_id, t.version_id);
    EXPECT_EQ(back.labels, t.labels);
  }
}

TEST_F(Features, HeaderLayout) {
  const auto p = dir / "h.csv";
  io::export_features(table_for(core::FeatureMode::Technique1, 2, true), p);
  std::ifstream in(p);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "instance_id,version_id,confidence,weight,accuracy,label");
}

TEST_F(Features, RejectsUnknownLayout) {
  EXPECT_THROW(io::load_features(write("x.csv", "id,a,b\n0,1,2\n")), DataError);
}

namespace {

eval::ExperimentReport sample_report() {
  eval::ExperimentReport r;
  r.config.task = eval::Task::Clustering;
  r.config.methods = {eval::Method::KMeans, eval::Method::Dec};
  r.config.feature_modes = {eval::InputMode::Primary, eval::InputMode::PrimaryIfl};
  r.config.repeats = 2;
  r.config.master_seed = 77;
  r.config.ifl.s = 4;
  r.config.ifl.hidden_dims = {64, 32};
  r.config.ifl.latent_dim = 5;
  r.config.ifl.dec.tol = 0.002;
  r.config.rescale_ifl = true;
  r.inputs = {{"data", "blobs.csv"}};
  r.seeds = {77, 1077};
  eval::Cell c;
  c.method = "dec";
  c.feature_mode = "primary";
  c.input_width = 20;
  c.raw = {0.9, 0.1 + 0.2};
  c.init_raw = {0.8, 0.85};
  eval::finalize(c);
  r.cells.push_back(c);
  eval::Cell failed;
  failed.method = "kmeans";
  failed.feature_mode = "primary+ifl";
  failed.errors = {"repeat 0: boom"};
  r.cells.push_back(failed);
  r.warnings = {"repeat 1: run 3 not trackable"};
  r.repeat_seconds = {1.5, 2.5};
  r.total_seconds = 4.0;
  return r;
}

}  // namespace

TEST_F(Report, JsonRoundTrip) {
  const auto r = sample_report();
  const auto p = dir / "r.json";
  io::export_report(r, p);
  const auto back = io::load_report(p);
  EXPECT_EQ(io::report_to_json(back), io::report_to_json(r));
  EXPECT_EQ(back.config.ifl.hidden_dims, r.config.ifl.hidden_dims);
  EXPECT_EQ(back.cells[0].raw, r.cells[0].raw);
  EXPECT_EQ(back.cells[0].init_raw, r.cells[0].init_raw);
  EXPECT_EQ(back.total_seconds, 4.0);
}

TEST_F(Report, TimingOptional) {
  const auto with = io::report_to_json(sample_report());
  const auto without = io::report_to_json(sample_report(), {false});
  EXPECT_NE(with.find("\"timing\""), std::string::npos);
  EXPECT_EQ(without.find("\"timing\""), std::string::npos);
}

TEST_F(Report, MalformedJson) {
  EXPECT_THROW(io::load_report(write("bad.json", "{\"config\": 3")), DataError);
  EXPECT_THROW(io::load_report(write("empty.json", "{}")), DataError);
}

TEST_F(Projection, LineProjectsOntoFirstAxis) {
  Matrix z(3, 2);
  z << 0, 0, 1, 1, 2, 2;
  const Matrix xy = io::pca_2d(z);
  EXPECT_NEAR(xy(0, 0), -std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(xy(2, 0), std::sqrt(2.0), 1e-12);
  for (Eigen::Index i = 0; i < 3; ++i) EXPECT_NEAR(xy(i, 1), 0.0, 1e-12);
}

TEST_F(Projection, OneDimensionalInput) {
  Matrix z(2, 1);
  z << 1, 3;
  const Matrix xy = io::pca_2d(z);
  EXPECT_NEAR(xy(1, 0), 1.0, 1e-12);
  EXPECT_EQ(xy(1, 1), 0.0);
}

TEST_F(Projection, CsvRows) {
  Matrix z(2, 2);
  z << 0, 0, 2, 0;
  const auto p = dir / "p.csv";
  io::export_projection(z, {0, 1}, p);
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "x,y,cluster");
  std::getline(in, line);
  EXPECT_EQ(line.substr(line.rfind(',') + 1), "0");
  EXPECT_THROW(io::export_projection(z, {0}, p), ShapeError);
}

TEST_F(Csv, SparseLabelValuesBecomeContiguous) {
  const auto p = write("l.csv", "9,0.5\n7,1.5\n9,2.5\n");
  io::CsvOptions opts;
  opts.label_column = "0";
  const auto d = io::load_csv(p, opts);
  EXPECT_EQ(*d.labels, (Labels{1, 0, 1}));
  EXPECT_EQ(d.label_values, (std::vector<long long>{7, 9}));
  EXPECT_EQ(d.dim(), 1u);
}

TEST_F(Idx, BlankImagesStayZero) {
  std::vector<unsigned char> b;
  put_u32(b, 0x803);
  put_u32(b, 2);
  put_u32(b, 3);
  put_u32(b, 3);
  b.resize(b.size() + 18, 0);
  const auto d = io::load_idx(write_bytes("blank", b), write_bytes("lab", idx_labels({4, 4})));
  EXPECT_EQ(d.x.rows(), 2);
  EXPECT_EQ(d.x.cols(), 9);
  EXPECT_TRUE(d.x.isZero(0.0));
  EXPECT_EQ(*d.labels, (Labels{0, 0}));
}

TEST_F(Projection, PlanarInputKeepsPairwiseDistances) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix z(15, 2);
    for (Eigen::Index i = 0; i < z.rows(); ++i) z.row(i) << g(rng), 0.3 * g(rng);
    const Matrix xy = io::pca_2d(z);
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      for (Eigen::Index j = i + 1; j < z.rows(); ++j) {
        EXPECT_NEAR((xy.row(i) - xy.row(j)).norm(), (z.row(i) - z.row(j)).norm(), 1e-9);
      }
    }
    EXPECT_NEAR(xy.col(0).sum(), 0.0, 1e-9);
    EXPECT_GE(xy.col(0).squaredNorm(), xy.col(1).squaredNorm() - 1e-9);
  }
}

TEST_F(Projection, ConstantEmbeddingMapsToOrigin) {
  const Matrix xy = io::pca_2d(Matrix::Constant(4, 3, 2.5));
  EXPECT_TRUE(xy.isZero(1e-12));
}

TEST_F(Projection, SeparatedBlobsSpreadMoreBetweenThanWithin) {
  const auto data = make_blobs({120, 5, 3, 1.0, 12.0, 21});
  const Matrix xy = io::pca_2d(data.x);
  const auto& y = *data.labels;
  Matrix centers = Matrix::Zero(3, 2);
  std::vector<double> counts(3, 0.0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    centers.row(static_cast<Eigen::Index>(y[i])) += xy.row(static_cast<Eigen::Index>(i));
    counts[y[i]] += 1.0;
  }
  for (Eigen::Index k = 0; k < 3; ++k) centers.row(k) /= counts[static_cast<std::size_t>(k)];
  double within = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    within += (xy.row(static_cast<Eigen::Index>(i)) - centers.row(static_cast<Eigen::Index>(y[i]))).squaredNorm();
  within /= static_cast<double>(y.size());
  const Eigen::RowVector2d mean = centers.colwise().mean();
  double between = 0.0;
  for (Eigen::Index k = 0; k < 3; ++k) between += (centers.row(k) - mean).squaredNorm() / 3.0;
  EXPECT_GT(between, 10.0 * within);
}

TEST_F(Csv, ExportedMatrixReloadsExactly) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1e3);
  Matrix x(7, 3);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = g(rng) / 7.0;
  const auto p = dir / "m.csv";
  io::export_matrix(x, {"a", "b", "c"}, p);
  EXPECT_EQ(io::load_csv(p).x, x);
}
