#include "bpi/matrix.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "bpi/kernels.hpp"

namespace bpi {

MaskedMatrix::MaskedMatrix(Matrix values) : values_(std::move(values)) {
  mask_ = values_.array().isNaN().select(false, Mask::Constant(values_.rows(), values_.cols(), true));
}

MaskedMatrix::MaskedMatrix(Matrix values, Mask mask) : values_(std::move(values)), mask_(std::move(mask)) {
  if (values_.rows() != mask_.rows() || values_.cols() != mask_.cols()) {
    throw DimensionError("MaskedMatrix: values and mask shapes differ");
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (Index c = 0; c < values_.cols(); ++c) {
    for (Index r = 0; r < values_.rows(); ++r) {
      if (!mask_(r, c)) {
        values_(r, c) = nan;
      } else if (std::isnan(values_(r, c))) {
        throw DataError("MaskedMatrix: observed cell (" + std::to_string(r) + ", " + std::to_string(c) +
                        ") holds NaN");
      }
    }
  }
}

MaskedMatrix MaskedMatrix::fully_observed(Matrix values) {
  Mask mask = Mask::Constant(values.rows(), values.cols(), true);
  return MaskedMatrix(std::move(values), std::move(mask));
}

std::size_t MaskedMatrix::missing_count() const {
  return static_cast<std::size_t>(mask_.size() - mask_.count());
}

Matrix MaskedMatrix::filled(double fill) const {
  return mask_.select(values_, Matrix::Constant(rows(), cols(), fill));
}

std::pair<Matrix, Vector> center_columns(const Matrix &x) {
  if (x.rows() == 0 || x.cols() == 0) throw DimensionError("center_columns: empty matrix");
  Vector means = x.colwise().mean().transpose();
  Matrix centered = x.rowwise() - means.transpose();
  return {std::move(centered), std::move(means)};
}

Matrix covariance(const Matrix &x) {
  if (x.rows() < 2) {
    throw InsufficientSamples("covariance: need at least 2 samples, got " + std::to_string(x.rows()));
  }
  auto [centered, means] = center_columns(x);
  Matrix s = kernels::gram(centered);
  s /= static_cast<double>(x.rows() - 1);
  return s;
}

double asymmetry(const Matrix &s) {
  if (s.rows() != s.cols()) return std::numeric_limits<double>::infinity();
  return (s - s.transpose()).cwiseAbs().maxCoeff();
}

Spectrum sym_eig(const Matrix &s, SpectrumKind kind) {
  if (s.rows() != s.cols()) throw DimensionError("sym_eig: matrix is not square");
  if (s.rows() == 0) throw DimensionError("sym_eig: empty matrix");
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  if (asymmetry(s) > 1e-8 * scale) throw SymmetryError("sym_eig: matrix is not symmetric within 1e-8");

  Eigen::SelfAdjointEigenSolver<Matrix> solver(s);
  if (solver.info() != Eigen::Success) throw Error("sym_eig: eigensolver did not converge");

  const Index p = s.rows();
  Spectrum out{Vector(p), Matrix(p, p)};
  // Eigen returns ascending order.
  for (Index j = 0; j < p; ++j) {
    out.eigenvalues(j) = solver.eigenvalues()(p - 1 - j);
    out.eigenvectors.col(j) = solver.eigenvectors().col(p - 1 - j);
  }

  for (Index j = 0; j < p; ++j) {
    auto v = out.eigenvectors.col(j);
    Index arg = 0;
    double best = -1.0;
    for (Index i = 0; i < p; ++i) {
      if (std::abs(v(i)) > best) {
        best = std::abs(v(i));
        arg = i;
      }
    }
    if (v(arg) < 0) v = -v;
  }

  if (kind == SpectrumKind::Covariance) {
    const double top = std::max(0.0, out.eigenvalues(0));
    for (Index j = 0; j < p; ++j) {
      double &lambda = out.eigenvalues(j);
      if (lambda >= 0) continue;
      if (lambda >= -1e-9 * top) {
        lambda = 0.0;
      } else {
        throw SpectrumError("sym_eig: covariance eigenvalue " + std::to_string(lambda) +
                            " is below the clamping tolerance");
      }
    }
  }
  return out;
}

Matrix principal_submatrix(const Matrix &s, std::span<const std::size_t> indices) {
  const auto p = static_cast<std::size_t>(s.rows());
  std::vector<bool> seen(p, false);
  for (std::size_t idx : indices) {
    if (idx >= p) throw IndexError("principal_submatrix: index " + std::to_string(idx) + " out of range");
    if (seen[idx]) throw IndexError("principal_submatrix: duplicate index " + std::to_string(idx));
    seen[idx] = true;
  }
  const auto m = static_cast<Index>(indices.size());
  Matrix out(m, m);
  for (Index a = 0; a < m; ++a) {
    for (Index b = 0; b < m; ++b) {
      out(a, b) = s(static_cast<Index>(indices[static_cast<std::size_t>(a)]),
                    static_cast<Index>(indices[static_cast<std::size_t>(b)]));
    }
  }
  return out;
}

} // namespace bpi
