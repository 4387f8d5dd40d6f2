#pragma once

#include <optional>
#include <vector>

#include "bpi/imputers.hpp"
#include "bpi/monotone.hpp"
#include "bpi/pca.hpp"

namespace bpi {

/// Per-block retention policy. Blocks no wider than passthrough_width keep all
/// their dimensions unless an explicit override is given.
struct BlockRetention {
  RetentionRule default_rule = VarianceTarget{0.95};
  std::vector<std::optional<RetentionRule>> overrides;
  Index passthrough_width = 4;
  PcaOptions pca;

  /// Same rule on every block, no passthrough.
  static BlockRetention uniform(RetentionRule rule);
  /// One explicit rule per block.
  static BlockRetention per_block(std::vector<RetentionRule> rules);

  RetentionRule rule_for(std::size_t block, Index width) const;
};

/// Wall-clock of the imputer call alone.
struct ImputationTiming {
  double seconds = 0.0;
  /// 0 when there was nothing to impute and the imputer was not invoked.
  int calls = 0;
  int iterations = 0;
  bool converged = true;
};

struct ReducedStack {
  /// n_1 x sum(q_i); sample s observes block i scores iff s < n_i.
  MaskedMatrix z_star;
  std::vector<FeatureRange> block_score_ranges;
  std::vector<PcaModel> block_models;
  std::vector<double> block_ev;
  std::optional<Matrix> z;
  ImputationTiming timing;
  double pca_seconds = 0.0;

  Index total_q() const { return z_star.cols(); }
};

MaskedMatrix stack_with_missing(const std::vector<Matrix> &scores);

/// Per-block PCA on the observed sub-blocks and stacking; z is left empty.
ReducedStack bpi_reduce(const CanonicalDataset &ds, const BlockRetention &retention);

/// Imputes z* into z, timing only the imputer call.
void bpi_impute(ReducedStack &stack, const Imputer &imputer);

/// bpi_reduce followed by bpi_impute.
ReducedStack bpi_reduce_impute(const CanonicalDataset &ds, const BlockRetention &retention, const Imputer &imputer);

/// Reduces fully observed rows given in canonical feature order through every
/// block model and concatenates the scores.
Matrix bpi_project_complete(const ReducedStack &stack, const CanonicalDataset &ds, const Matrix &rows);

/// Feature-space approximation of z (requires z).
Matrix bpi_reconstruct(const ReducedStack &stack, const CanonicalDataset &ds);

struct BaselineResult {
  Matrix imputed;
  PcaModel model;
  Matrix scores;
  ImputationTiming timing;
  double pca_seconds = 0.0;
};

/// Imputes the whole masked matrix, then fits one PCA on the completed data.
BaselineResult baseline_impute_then_pca(const CanonicalDataset &ds, const Imputer &imputer, const RetentionRule &rule,
                                        const PcaOptions &options = {});

struct EvComparison {
  std::vector<Index> q;
  std::vector<double> block_ev;
  double mean_ev = 0.0;
};

EvComparison compare_ev(const CanonicalDataset &ds, const BlockRetention &retention);

} // namespace bpi
