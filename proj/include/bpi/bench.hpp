#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bpi/bounds.hpp"
#include "bpi/imputers.hpp"
#include "bpi/pipeline.hpp"
#include "bpi/synthetic.hpp"

namespace bpi {

std::vector<int> knn_classify(const Matrix &train_x, const std::vector<int> &train_y, const Matrix &test_x, Index k);

std::vector<int> nearest_centroid_classify(const Matrix &train_x, const std::vector<int> &train_y,
                                           const Matrix &test_x);

double accuracy(const std::vector<int> &predicted, const std::vector<int> &truth);

/// RMSE over the cells that are missing in `mask`.
double rmse_missing(const Matrix &imputed, const Matrix &truth, const Mask &mask);

enum class ClassifierKind { Knn, NearestCentroid };

std::string to_string(ClassifierKind kind);

struct ExperimentConfig {
  std::string name = "experiment";

  /// CSV dataset with a leading label column; synthetic data otherwise.
  std::optional<std::string> csv_path;
  MixtureSpec synthetic;

  std::vector<Index> missing_counts{75, 150, 225};

  std::string imputer = "soft";
  Index knn_impute_k = 5;
  SoftImputeOptions soft;
  /// When set, the SoftImpute shrinkage is this fraction of the largest
  /// singular value of the mean-filled matrix being imputed.
  std::optional<double> soft_lambda_ratio;

  BlockRetention retention;
  /// Baseline PCA rule; unset means FixedDim(total BPI dimension) per repeat.
  std::optional<RetentionRule> baseline_rule;

  ClassifierKind classifier = ClassifierKind::Knn;
  Index classifier_k = 5;

  int repeats = 10;
  double train_fraction = 0.8;
  std::uint64_t seed = 42;

  /// Evaluate the explained-variance bounds on the first repeat when the
  /// complete training data is known.
  bool bounds = true;

  void validate() const;
};

struct ArmTrial {
  double accuracy = 0.0;
  double imputation_seconds = 0.0;
  double pca_seconds = 0.0;
  int imputer_calls = 0;
  int iterations = 0;
  bool converged = true;
  Index dims = 0;
  /// RMSE on the originally missing training cells, in feature space.
  double rmse_missing = 0.0;
};

struct TrialRecord {
  int repeat = 0;
  std::uint64_t seed = 0;
  ArmTrial baseline;
  ArmTrial bpi;
  std::vector<Index> block_widths;
  std::vector<Index> block_counts;
  std::vector<Index> q;
  std::vector<double> block_ev;
  double mean_block_ev = 0.0;
  double baseline_ev = 0.0;
  std::optional<EvBoundsReport> bounds;
  /// Wall time of the whole repeat (data, both arms, classification).
  double trial_seconds = 0.0;
};

struct Summary {
  double mean = 0.0;
  double std = 0.0;
};

Summary summarize(const std::vector<double> &values);

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<std::pair<std::string, std::string>> imputer_settings;
  std::vector<TrialRecord> trials;
  Summary baseline_accuracy, bpi_accuracy;
  Summary baseline_seconds, bpi_seconds;
  std::vector<std::string> notes;
};

/// Everything one repeat produced, including fitted models (tests inspect them).
struct TrialOutput {
  TrialRecord record;
  CanonicalDataset train;
  ReducedStack stack;
  BaselineResult baseline;
};

/// One repeat on an explicit train/test split. The training matrix is masked
/// with generate_monotone_missing; test rows stay complete. Models are fit on
/// the training rows only.
TrialOutput run_trial(const ExperimentConfig &cfg, const Matrix &train_x, const std::vector<int> &train_y,
                      const Matrix &test_x, const std::vector<int> &test_y, std::uint64_t seed, int repeat = 0);

ExperimentReport run_experiment(const ExperimentConfig &cfg);

} // namespace bpi
