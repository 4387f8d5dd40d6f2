#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bpi/errors.hpp"

namespace bpi {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Mask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;
using Index = Eigen::Index;

/// Dense samples-by-features matrix with an observedness mask (true = observed).
/// Unobserved value slots hold NaN and are never read by computations.
class MaskedMatrix {
public:
  MaskedMatrix() = default;

  /// NaN cells are taken as missing.
  explicit MaskedMatrix(Matrix values);
  MaskedMatrix(Matrix values, Mask mask);

  static MaskedMatrix fully_observed(Matrix values);

  Index rows() const noexcept { return values_.rows(); }
  Index cols() const noexcept { return values_.cols(); }

  bool observed(Index r, Index c) const { return mask_(r, c); }
  double value(Index r, Index c) const { return values_(r, c); }

  const Matrix &values() const noexcept { return values_; }
  const Mask &mask() const noexcept { return mask_; }

  std::size_t missing_count() const;
  bool complete() const { return missing_count() == 0; }

  /// Copy of the values with every missing cell set to `fill`.
  Matrix filled(double fill) const;

private:
  Matrix values_;
  Mask mask_;
};

/// Eigenpairs sorted by non-increasing eigenvalue; eigenvectors are columns.
struct Spectrum {
  Vector eigenvalues;
  Matrix eigenvectors;
};

enum class SpectrumKind {
  General,
  /// Eigenvalues within [-1e-9 * lambda_max, 0) are clamped to zero; anything
  /// more negative raises SpectrumError.
  Covariance,
};

std::pair<Matrix, Vector> center_columns(const Matrix &x);

/// Sample covariance with divisor n - 1.
Matrix covariance(const Matrix &x);

/// Symmetric eigendecomposition. Each eigenvector's largest-magnitude entry
/// is positive (ties broken by lowest index).
Spectrum sym_eig(const Matrix &s, SpectrumKind kind = SpectrumKind::General);

Matrix principal_submatrix(const Matrix &s, std::span<const std::size_t> indices);

/// Largest |s(i,j) - s(j,i)|.
double asymmetry(const Matrix &s);

} // namespace bpi
