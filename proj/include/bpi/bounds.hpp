#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bpi/monotone.hpp"

namespace bpi {

/// Feature index sets; must partition {0, ..., p-1}.
using BlockSets = std::vector<std::vector<std::size_t>>;

BlockSets block_sets(const std::vector<FeatureRange> &ranges);

struct InterlacingRow {
  double upper;  // lambda_j of S
  double middle; // lambda_j of the principal sub-matrix
  double lower;  // lambda_{j + p - p_i} of S
  bool ok;
};

struct InterlacingCertificate {
  std::vector<InterlacingRow> rows;
  double tolerance = 0.0;
  bool ok = true;
};

struct TraceCertificate {
  double trace = 0.0;
  double block_trace_sum = 0.0;
  double eigenvalue_sum = 0.0;
  double block_eigenvalue_sum = 0.0;
  bool trace_ok = true;
  bool eigen_ok = true;
  bool ok() const { return trace_ok && eigen_ok; }
};

/// Explained-variance bounds for blockwise PCA over a single covariance matrix.
///
/// With lambda_1 >= ... >= lambda_p the spectrum of S (1-based), the mean of
/// the per-block explained variances lies in
///   [ k * lambda_{p - min_i(p_i - q_i)} / sum(lambda),  1 - k * lambda_p / sum(lambda) ]
/// whenever q_i < p_i for every block. Outside that regime the report still
/// carries every figure but marks the bounds not applicable.
struct EvBoundsReport {
  Vector full_spectrum;
  std::vector<Vector> block_spectra;
  std::vector<Index> block_widths;
  std::vector<Index> q;
  std::vector<double> block_ev;
  double mean_ev = 0.0;
  Index total_q = 0;
  double total_ev_q = 0.0;

  /// 1-based index p - min(p_i - q_i) and the eigenvalue found there.
  Index lower_index = 0;
  double lambda_lower = 0.0;
  double lambda_p = 0.0;
  double spectrum_sum = 0.0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  bool applicable = true;
  std::string applicability_note;

  bool interlacing_ok = true;
  bool trace_ok = true;
  std::vector<InterlacingCertificate> interlacing;
  TraceCertificate trace;

  bool holds(double slack = 1e-9) const {
    return lower_bound - slack <= mean_ev && mean_ev <= upper_bound + slack;
  }
};

EvBoundsReport ev_bounds(const Matrix &s, const BlockSets &blocks, const std::vector<Index> &q);

InterlacingCertificate check_interlacing(const Matrix &s, const std::vector<std::size_t> &block);

TraceCertificate check_trace_identity(const Matrix &s, const BlockSets &blocks);

/// Closed-form upper bound 1 - k * lambda_p / total.
double upper_bound_for(std::size_t k, double lambda_p, double total);

enum class CovarianceMode {
  /// Covariance of the pre-masking matrix; benchmark use only.
  GroundTruth,
  /// The n_k canonical rows observed on every feature.
  CompleteCase,
};

/// `ground_truth` holds the complete data in canonical sample and feature
/// order; it is required for GroundTruth mode.
Matrix estimate_covariance_for_bounds(const CanonicalDataset &ds, CovarianceMode mode,
                                      const std::optional<Matrix> &ground_truth = std::nullopt);

} // namespace bpi
