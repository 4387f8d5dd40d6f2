#pragma once

#include <string>
#include <variant>
#include <vector>

#include "bpi/matrix.hpp"

namespace bpi {

struct FixedDim {
  Index q;
};

/// Smallest q whose explained variance reaches `ratio`; a ratio of 1 keeps
/// min(p, n) components.
struct VarianceTarget {
  double ratio;
};

/// q = min(p, n).
struct KeepAll {};

using RetentionRule = std::variant<FixedDim, VarianceTarget, KeepAll>;

std::string describe(const RetentionRule &rule);

struct PcaOptions {
  /// Scale columns to unit sample variance before the eigendecomposition.
  bool standardize = false;
};

struct PcaModel {
  Vector mean;
  /// Ones unless the model was fit with standardization.
  Vector scale;
  /// p x q, orthonormal columns.
  Matrix components;
  /// Full non-increasing spectrum of the (scaled) block covariance, length p.
  Vector eigenvalues;
  Index q = 0;
  std::vector<std::string> warnings;

  Index features() const { return mean.size(); }
};

PcaModel fit_pca(const Matrix &x, const RetentionRule &rule, const PcaOptions &options = {});

/// (X - mean) / scale * components.
Matrix transform(const PcaModel &model, const Matrix &x);

/// Z * components^T * scale + mean.
Matrix inverse_transform(const PcaModel &model, const Matrix &z);

/// Share of total variance carried by the leading q eigenvalues; 1 for a
/// zero-variance block.
double explained_variance(const PcaModel &model, Index q);

/// Same ratio computed from a bare non-increasing spectrum.
double explained_variance(const Vector &eigenvalues, Index q);

} // namespace bpi
