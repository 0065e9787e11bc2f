#include "ifl/io.hpp"

#include "ifl/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cstdio>
#include <fstream>

namespace ifl::io {

Matrix pca_2d(const Matrix& z) {
  Matrix out = Matrix::Zero(z.rows(), 2);
  if (z.rows() == 0 || z.cols() == 0) return out;
  const Eigen::RowVectorXd mean = z.colwise().mean();
  const Matrix centered = z.rowwise() - mean;
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(z.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericError("pca_2d: eigen decomposition failed");

  // Eigenvalues come back ascending.
  const Eigen::Index dims = std::min<Eigen::Index>(2, z.cols());
  for (Eigen::Index k = 0; k < dims; ++k) {
    Eigen::VectorXd axis = eig.eigenvectors().col(z.cols() - 1 - k);
    Eigen::Index peak = 0;
    axis.cwiseAbs().maxCoeff(&peak);
    if (axis(peak) < 0.0) axis = -axis;
    out.col(k) = centered * axis;
  }
  return out;
}

void export_projection(const Matrix& z, const Labels& assignments, const std::filesystem::path& path) {
  if (assignments.size() != static_cast<std::size_t>(z.rows())) {
    throw ShapeError("export_projection: assignment count != row count");
  }
  const Matrix xy = pca_2d(z);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  out << "x,y,cluster\n";
  char buf[80];
  for (Eigen::Index i = 0; i < xy.rows(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,", xy(i, 0), xy(i, 1));
    out << buf << assignments[static_cast<std::size_t>(i)] << '\n';
  }
  if (!out) throw DataError(path.string() + ": write failed");
}

}  // namespace ifl::io
