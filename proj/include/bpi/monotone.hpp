#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bpi/matrix.hpp"

namespace bpi {

struct FeatureRange {
  Index begin = 0;
  Index width = 0;

  Index end() const { return begin + width; }
  bool operator==(const FeatureRange &) const = default;
};

/// Canonical staircase: under canonical sample order, sample s observes
/// block i iff s < observed_counts[i].
struct MonotoneBlockSpec {
  std::vector<FeatureRange> feature_ranges;
  std::vector<Index> observed_counts;

  std::size_t k() const { return feature_ranges.size(); }
  Index n_features() const { return feature_ranges.empty() ? 0 : feature_ranges.back().end(); }
  std::vector<Index> widths() const;

  /// Block index that owns canonical feature `f`.
  std::size_t block_of(Index f) const;

  /// Throws ConfigError when ranges are not contiguous or counts increase.
  void validate() const;

  Mask staircase(Index n_samples) const;
};

/// A monotone dataset with samples and features reordered into the canonical
/// staircase. canonical row r is original sample sample_perm[r]; canonical
/// column c is original feature feature_perm[c].
struct CanonicalDataset {
  MaskedMatrix data;
  MonotoneBlockSpec spec;
  std::vector<Index> sample_perm;
  std::vector<Index> feature_perm;

  /// Inverse permutation back to the input layout.
  MaskedMatrix original() const;
};

/// Orders features by descending observed count and samples by descending
/// observed count (ties by original index), then checks the result is a
/// staircase. Throws NotMonotone with the first violating cell otherwise.
CanonicalDataset detect_monotone(const MaskedMatrix &m);

/// Fully observed n_i x p_i sub-matrix of each block.
std::vector<Matrix> partition_blocks(const CanonicalDataset &ds);

/// Splits the samples into `missing_counts.size() + 1` equal partitions after a
/// seeded shuffle (remainder to the first). Partition j >= 1 loses the last
/// missing_counts[0] + ... + missing_counts[j-1] features.
MaskedMatrix generate_monotone_missing(const Matrix &x, std::span<const Index> missing_counts, std::uint64_t seed);

/// Partition sizes used by generate_monotone_missing.
std::vector<Index> partition_sizes(Index n_samples, std::size_t partitions);

/// Staircase dataset built directly in canonical layout (identity permutations).
CanonicalDataset make_canonical(Matrix values, const MonotoneBlockSpec &spec);

} // namespace bpi
