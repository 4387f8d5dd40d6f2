#include "bpi/pipeline.hpp"

#include <chrono>
#include <exception>
#include <string>

namespace bpi {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<PcaModel> fit_blocks(const CanonicalDataset &ds, const BlockRetention &retention) {
  const auto blocks = partition_blocks(ds);
  const auto k = static_cast<long>(blocks.size());
  for (long i = 0; i < k; ++i) {
    if (blocks[static_cast<std::size_t>(i)].rows() < 2) {
      throw InsufficientSamples("block " + std::to_string(i + 1) + " has " +
                                std::to_string(blocks[static_cast<std::size_t>(i)].rows()) +
                                " observed samples; PCA needs at least 2");
    }
  }

  std::vector<PcaModel> models(blocks.size());
  std::vector<std::exception_ptr> errors(blocks.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < k; ++i) {
    const auto b = static_cast<std::size_t>(i);
    try {
      models[b] = fit_pca(blocks[b], retention.rule_for(b, blocks[b].cols()), retention.pca);
    } catch (...) {
      errors[b] = std::current_exception();
    }
  }
  for (const auto &e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return models;
}

ImputationTiming timed_impute(const Imputer &imputer, const MaskedMatrix &m, Matrix &out) {
  ImputationTiming timing;
  if (m.complete()) {
    out = m.values();
    return timing;
  }
  const auto start = Clock::now();
  Imputation result = imputer.run(m);
  timing.seconds = seconds_since(start);
  timing.calls = 1;
  timing.iterations = result.iterations;
  timing.converged = result.converged;
  out = std::move(result.completed);
  return timing;
}

} // namespace

BlockRetention BlockRetention::uniform(RetentionRule rule) {
  BlockRetention r;
  r.default_rule = rule;
  r.passthrough_width = 0;
  return r;
}

BlockRetention BlockRetention::per_block(std::vector<RetentionRule> rules) {
  BlockRetention r;
  r.passthrough_width = 0;
  for (auto &rule : rules) r.overrides.emplace_back(std::move(rule));
  return r;
}

RetentionRule BlockRetention::rule_for(std::size_t block, Index width) const {
  if (block < overrides.size() && overrides[block]) return *overrides[block];
  if (width <= passthrough_width) return KeepAll{};
  return default_rule;
}

MaskedMatrix stack_with_missing(const std::vector<Matrix> &scores) {
  if (scores.empty()) throw ConfigError("stack_with_missing: no blocks");
  Index total = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (i > 0 && scores[i].rows() > scores[i - 1].rows()) {
      throw OrderError("stack_with_missing: block " + std::to_string(i + 1) + " has more rows than block " +
                       std::to_string(i));
    }
    total += scores[i].cols();
  }
  const Index n = scores.front().rows();
  Matrix values = Matrix::Zero(n, total);
  Mask mask = Mask::Constant(n, total, false);
  Index col = 0;
  for (const auto &s : scores) {
    values.block(0, col, s.rows(), s.cols()) = s;
    mask.block(0, col, s.rows(), s.cols()).setConstant(true);
    col += s.cols();
  }
  return MaskedMatrix(std::move(values), std::move(mask));
}

ReducedStack bpi_reduce(const CanonicalDataset &ds, const BlockRetention &retention) {
  ReducedStack stack;
  const auto pca_start = Clock::now();
  stack.block_models = fit_blocks(ds, retention);
  const auto blocks = partition_blocks(ds);
  std::vector<Matrix> scores;
  scores.reserve(blocks.size());
  Index col = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const PcaModel &model = stack.block_models[i];
    scores.push_back(transform(model, blocks[i]));
    stack.block_score_ranges.push_back({col, model.q});
    stack.block_ev.push_back(explained_variance(model, model.q));
    col += model.q;
  }
  stack.pca_seconds = seconds_since(pca_start);

  stack.z_star = stack_with_missing(scores);
  return stack;
}

void bpi_impute(ReducedStack &stack, const Imputer &imputer) {
  Matrix z;
  stack.timing = timed_impute(imputer, stack.z_star, z);
  stack.z = std::move(z);
}

ReducedStack bpi_reduce_impute(const CanonicalDataset &ds, const BlockRetention &retention, const Imputer &imputer) {
  ReducedStack stack = bpi_reduce(ds, retention);
  bpi_impute(stack, imputer);
  return stack;
}

Matrix bpi_project_complete(const ReducedStack &stack, const CanonicalDataset &ds, const Matrix &rows) {
  if (rows.cols() != ds.data.cols()) throw DimensionError("bpi_project_complete: feature count mismatch");
  Matrix out(rows.rows(), stack.total_q());
  for (std::size_t i = 0; i < stack.block_models.size(); ++i) {
    const auto &fr = ds.spec.feature_ranges[i];
    const auto &sr = stack.block_score_ranges[i];
    out.middleCols(sr.begin, sr.width) = transform(stack.block_models[i], rows.middleCols(fr.begin, fr.width));
  }
  return out;
}

Matrix bpi_reconstruct(const ReducedStack &stack, const CanonicalDataset &ds) {
  if (!stack.z) throw ConfigError("bpi_reconstruct: stack has no imputed scores");
  Matrix out(stack.z->rows(), ds.data.cols());
  for (std::size_t i = 0; i < stack.block_models.size(); ++i) {
    const auto &fr = ds.spec.feature_ranges[i];
    const auto &sr = stack.block_score_ranges[i];
    out.middleCols(fr.begin, fr.width) = inverse_transform(stack.block_models[i], stack.z->middleCols(sr.begin, sr.width));
  }
  return out;
}

BaselineResult baseline_impute_then_pca(const CanonicalDataset &ds, const Imputer &imputer, const RetentionRule &rule,
                                        const PcaOptions &options) {
  BaselineResult result;
  result.timing = timed_impute(imputer, ds.data, result.imputed);
  const auto pca_start = Clock::now();
  result.model = fit_pca(result.imputed, rule, options);
  result.scores = transform(result.model, result.imputed);
  result.pca_seconds = seconds_since(pca_start);
  return result;
}

EvComparison compare_ev(const CanonicalDataset &ds, const BlockRetention &retention) {
  EvComparison out;
  const auto models = fit_blocks(ds, retention);
  double sum = 0.0;
  for (const auto &model : models) {
    out.q.push_back(model.q);
    out.block_ev.push_back(explained_variance(model, model.q));
    sum += out.block_ev.back();
  }
  out.mean_ev = sum / static_cast<double>(models.size());
  return out;
}

} // namespace bpi
