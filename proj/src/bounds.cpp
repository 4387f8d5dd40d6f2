#include "bpi/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bpi/pca.hpp"

namespace bpi {

namespace {

void require_partition(const BlockSets &blocks, Index p) {
  if (blocks.empty()) throw ConfigError("blocks: empty partition");
  std::vector<int> seen(static_cast<std::size_t>(p), 0);
  for (const auto &b : blocks) {
    if (b.empty()) throw ConfigError("blocks: empty block");
    for (std::size_t f : b) {
      if (f >= static_cast<std::size_t>(p)) throw ConfigError("blocks: feature " + std::to_string(f) + " out of range");
      if (seen[f]++) throw ConfigError("blocks: feature " + std::to_string(f) + " appears twice");
    }
  }
  for (std::size_t f = 0; f < seen.size(); ++f) {
    if (!seen[f]) throw ConfigError("blocks: feature " + std::to_string(f) + " not covered");
  }
}

} // namespace

BlockSets block_sets(const std::vector<FeatureRange> &ranges) {
  BlockSets out;
  for (const auto &r : ranges) {
    std::vector<std::size_t> b;
    for (Index f = r.begin; f < r.end(); ++f) b.push_back(static_cast<std::size_t>(f));
    out.push_back(std::move(b));
  }
  return out;
}

double upper_bound_for(std::size_t k, double lambda_p, double total) {
  return 1.0 - static_cast<double>(k) * lambda_p / total;
}

InterlacingCertificate check_interlacing(const Matrix &s, const std::vector<std::size_t> &block) {
  const Vector full = sym_eig(s).eigenvalues;
  const Vector sub = sym_eig(principal_submatrix(s, block)).eigenvalues;
  const Index p = full.size();
  const Index pi = sub.size();

  InterlacingCertificate cert;
  cert.tolerance = 1e-9 * std::max(1.0, full(0));
  for (Index j = 0; j < pi; ++j) {
    InterlacingRow row{full(j), sub(j), full(j + (p - pi)), true};
    row.ok = row.upper + cert.tolerance >= row.middle && row.middle + cert.tolerance >= row.lower;
    cert.ok = cert.ok && row.ok;
    cert.rows.push_back(row);
  }
  return cert;
}

TraceCertificate check_trace_identity(const Matrix &s, const BlockSets &blocks) {
  if (s.rows() != s.cols()) throw DimensionError("check_trace_identity: matrix is not square");
  require_partition(blocks, s.rows());

  TraceCertificate cert;
  cert.trace = s.trace();
  cert.eigenvalue_sum = sym_eig(s).eigenvalues.sum();
  for (const auto &b : blocks) {
    const Matrix sub = principal_submatrix(s, b);
    cert.block_trace_sum += sub.trace();
    cert.block_eigenvalue_sum += sym_eig(sub).eigenvalues.sum();
  }
  cert.trace_ok = std::abs(cert.block_trace_sum - cert.trace) <= 1e-10 * std::max(1.0, std::abs(cert.trace));
  cert.eigen_ok = std::abs(cert.block_eigenvalue_sum - cert.eigenvalue_sum) <= 1e-8 &&
                  std::abs(cert.eigenvalue_sum - cert.trace) <= 1e-8;
  return cert;
}

EvBoundsReport ev_bounds(const Matrix &s, const BlockSets &blocks, const std::vector<Index> &q) {
  if (s.rows() != s.cols()) throw DimensionError("ev_bounds: matrix is not square");
  const Index p = s.rows();
  require_partition(blocks, p);
  if (q.size() != blocks.size()) throw ConfigError("ev_bounds: need one q per block");

  EvBoundsReport r;
  r.full_spectrum = sym_eig(s, SpectrumKind::Covariance).eigenvalues;
  r.spectrum_sum = r.full_spectrum.sum();
  r.q = q;

  const std::size_t k = blocks.size();
  Index min_gap = std::numeric_limits<Index>::max();
  double ev_sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const auto pi = static_cast<Index>(blocks[i].size());
    if (q[i] < 1 || q[i] > pi) {
      throw ConfigError("ev_bounds: q_" + std::to_string(i + 1) + "=" + std::to_string(q[i]) + " outside [1, " +
                        std::to_string(pi) + "]");
    }
    r.block_widths.push_back(pi);
    r.block_spectra.push_back(sym_eig(principal_submatrix(s, blocks[i]), SpectrumKind::Covariance).eigenvalues);
    r.block_ev.push_back(explained_variance(r.block_spectra.back(), q[i]));
    ev_sum += r.block_ev.back();
    r.total_q += q[i];
    min_gap = std::min(min_gap, pi - q[i]);

    r.interlacing.push_back(check_interlacing(s, blocks[i]));
    r.interlacing_ok = r.interlacing_ok && r.interlacing.back().ok;
  }
  r.mean_ev = ev_sum / static_cast<double>(k);
  r.total_ev_q = explained_variance(r.full_spectrum, r.total_q);

  r.lower_index = p - min_gap;
  r.lambda_p = r.full_spectrum(p - 1);
  r.lambda_lower = r.lower_index >= 1 && r.lower_index <= p ? r.full_spectrum(r.lower_index - 1) : r.lambda_p;
  if (r.spectrum_sum > 0.0) {
    r.lower_bound = static_cast<double>(k) * r.lambda_lower / r.spectrum_sum;
    r.upper_bound = upper_bound_for(k, r.lambda_p, r.spectrum_sum);
  }

  if (min_gap == 0) {
    r.applicable = false;
    r.applicability_note = "bound not-applicable: some block keeps all its dimensions (q_i = p_i)";
  } else if (r.spectrum_sum <= 0.0) {
    r.applicable = false;
    r.applicability_note = "bound not-applicable: covariance has zero total variance";
  }

  r.trace = check_trace_identity(s, blocks);
  r.trace_ok = r.trace.ok();
  return r;
}

Matrix estimate_covariance_for_bounds(const CanonicalDataset &ds, CovarianceMode mode,
                                      const std::optional<Matrix> &ground_truth) {
  if (mode == CovarianceMode::GroundTruth) {
    if (!ground_truth) throw ConfigError("ground-truth covariance requested without the complete matrix");
    if (ground_truth->cols() != ds.data.cols()) throw DimensionError("ground truth has the wrong feature count");
    return covariance(*ground_truth);
  }
  const Index nk = ds.spec.observed_counts.back();
  if (nk < 2) {
    throw InsufficientSamples("complete-case covariance needs at least 2 fully observed samples, got " +
                              std::to_string(nk));
  }
  return covariance(ds.data.values().topRows(nk));
}

} // namespace bpi
