#pragma once

#include <memory>
#include <string>
#include <vector>

#include "bpi/matrix.hpp"

namespace bpi {

struct Imputation {
  Matrix completed;
  /// Iterations for iterative methods, 1 otherwise.
  int iterations = 1;
  bool converged = true;
};

/// Common interface for imputation algorithms. impute() returns a complete
/// matrix that equals the input at every observed cell.
///
/// Additional methods (for example a generative imputer) plug in by deriving
/// from this class; the pipeline and harness only see run(), name() and settings().
class Imputer {
public:
  virtual ~Imputer() = default;
  virtual Imputation run(const MaskedMatrix &m) const = 0;
  Matrix impute(const MaskedMatrix &m) const { return run(m).completed; }
  virtual std::string name() const = 0;
  /// Hyperparameters as "key=value" pairs, for reports.
  virtual std::vector<std::pair<std::string, std::string>> settings() const = 0;
};

Matrix impute_mean(const MaskedMatrix &m);

/// Observed-entry column means; throws AllMissingColumn.
Vector observed_column_means(const MaskedMatrix &m);

Matrix impute_knn(const MaskedMatrix &m, Index k);

struct SoftImputeOptions {
  double lambda = 0.0;
  /// Rank cap; 0 means min(n, p, 100).
  Index max_rank = 0;
  double tolerance = 1e-5;
  int max_iters = 200;
  /// Warm-start stages on a geometric lambda grid from sigma_max of the
  /// mean-filled matrix down to `lambda`; 0 solves at `lambda` directly.
  int path_steps = 0;
};

struct SoftImputeResult {
  Matrix completed;
  /// Total over all stages.
  int iterations = 0;
  bool converged = false;
  /// 0.5 * ||P_obs(X - Z_t)||_F^2 + lambda * ||Z_t||_* for each iterate Z_1, Z_2, ...
  /// at the target lambda (warm-start stages are not recorded).
  std::vector<double> objective;
  Index final_rank = 0;
};

SoftImputeResult soft_impute(const MaskedMatrix &m, const SoftImputeOptions &options);

/// Singular values of a dense matrix through the smaller Gram matrix; returns
/// them non-increasing.
Vector singular_values(const Matrix &x);

class MeanImputer final : public Imputer {
public:
  Imputation run(const MaskedMatrix &m) const override { return {impute_mean(m)}; }
  std::string name() const override { return "mean"; }
  std::vector<std::pair<std::string, std::string>> settings() const override { return {}; }
};

class KnnImputer final : public Imputer {
public:
  explicit KnnImputer(Index k);
  Imputation run(const MaskedMatrix &m) const override { return {impute_knn(m, k_)}; }
  std::string name() const override { return "knn"; }
  std::vector<std::pair<std::string, std::string>> settings() const override;

private:
  Index k_;
};

class SoftImputer final : public Imputer {
public:
  explicit SoftImputer(SoftImputeOptions options);
  Imputation run(const MaskedMatrix &m) const override;
  std::string name() const override { return "soft"; }
  std::vector<std::pair<std::string, std::string>> settings() const override;
  const SoftImputeOptions &options() const { return options_; }

private:
  SoftImputeOptions options_;
};

/// "mean", "knn" or "soft" with defaults; throws ConfigError otherwise.
std::unique_ptr<Imputer> make_imputer(const std::string &name, Index knn_k = 5, const SoftImputeOptions &soft = {});

} // namespace bpi
