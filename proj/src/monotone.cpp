#include "bpi/monotone.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace bpi {

std::vector<Index> MonotoneBlockSpec::widths() const {
  std::vector<Index> w;
  w.reserve(feature_ranges.size());
  for (const auto &r : feature_ranges) w.push_back(r.width);
  return w;
}

std::size_t MonotoneBlockSpec::block_of(Index f) const {
  for (std::size_t i = 0; i < feature_ranges.size(); ++i) {
    if (f >= feature_ranges[i].begin && f < feature_ranges[i].end()) return i;
  }
  throw IndexError("feature " + std::to_string(f) + " outside every block");
}

void MonotoneBlockSpec::validate() const {
  if (feature_ranges.empty()) throw ConfigError("block spec has no blocks");
  if (feature_ranges.size() != observed_counts.size()) throw ConfigError("block spec: ranges and counts differ in length");
  Index next = 0;
  for (std::size_t i = 0; i < feature_ranges.size(); ++i) {
    if (feature_ranges[i].begin != next || feature_ranges[i].width < 1) {
      throw ConfigError("block spec: feature ranges must be contiguous and nonempty");
    }
    next = feature_ranges[i].end();
    if (observed_counts[i] < 1) throw ConfigError("block spec: every block needs an observed sample");
    if (i > 0 && observed_counts[i] > observed_counts[i - 1]) {
      throw ConfigError("block spec: observed counts must be non-increasing");
    }
  }
}

Mask MonotoneBlockSpec::staircase(Index n_samples) const {
  Mask mask(n_samples, n_features());
  for (std::size_t i = 0; i < feature_ranges.size(); ++i) {
    const auto &r = feature_ranges[i];
    for (Index c = r.begin; c < r.end(); ++c) {
      for (Index s = 0; s < n_samples; ++s) mask(s, c) = s < observed_counts[i];
    }
  }
  return mask;
}

MaskedMatrix CanonicalDataset::original() const {
  const Index n = data.rows();
  const Index p = data.cols();
  Matrix values(n, p);
  Mask mask(n, p);
  for (Index r = 0; r < n; ++r) {
    for (Index c = 0; c < p; ++c) {
      const Index orow = sample_perm[static_cast<std::size_t>(r)];
      const Index ocol = feature_perm[static_cast<std::size_t>(c)];
      values(orow, ocol) = data.values()(r, c);
      mask(orow, ocol) = data.mask()(r, c);
    }
  }
  return MaskedMatrix(std::move(values), std::move(mask));
}

namespace {

std::vector<Index> order_by_count_desc(const Eigen::VectorXi &counts) {
  std::vector<Index> order(static_cast<std::size_t>(counts.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return counts(a) > counts(b); });
  return order;
}

} // namespace

CanonicalDataset detect_monotone(const MaskedMatrix &m) {
  const Index n = m.rows();
  const Index p = m.cols();
  if (n == 0 || p == 0) throw DimensionError("detect_monotone: empty matrix");

  const Eigen::VectorXi feature_counts = m.mask().cast<int>().colwise().sum().transpose();
  const Eigen::VectorXi sample_counts = m.mask().cast<int>().rowwise().sum();
  for (Index c = 0; c < p; ++c) {
    if (feature_counts(c) == 0) throw AllMissingColumn(static_cast<std::size_t>(c));
  }
  for (Index r = 0; r < n; ++r) {
    if (sample_counts(r) == 0) throw DataError("detect_monotone: sample " + std::to_string(r) + " has no observed entries");
  }

  CanonicalDataset ds;
  ds.feature_perm = order_by_count_desc(feature_counts);
  ds.sample_perm = order_by_count_desc(sample_counts);

  Matrix values(n, p);
  Mask mask(n, p);
  for (Index c = 0; c < p; ++c) {
    const Index oc = ds.feature_perm[static_cast<std::size_t>(c)];
    for (Index r = 0; r < n; ++r) {
      const Index orow = ds.sample_perm[static_cast<std::size_t>(r)];
      values(r, c) = m.values()(orow, oc);
      mask(r, c) = m.mask()(orow, oc);
    }
  }

  // Staircase check: canonical row r observes exactly its leading count columns.
  for (Index r = 0; r < n; ++r) {
    const Index orow = ds.sample_perm[static_cast<std::size_t>(r)];
    const Index len = sample_counts(orow);
    for (Index c = 0; c < p; ++c) {
      if (mask(r, c) != (c < len)) {
        throw NotMonotone(static_cast<std::size_t>(orow),
                          static_cast<std::size_t>(ds.feature_perm[static_cast<std::size_t>(c)]));
      }
    }
  }

  Index begin = 0;
  while (begin < p) {
    const int count = feature_counts(ds.feature_perm[static_cast<std::size_t>(begin)]);
    Index end = begin + 1;
    while (end < p && feature_counts(ds.feature_perm[static_cast<std::size_t>(end)]) == count) ++end;
    ds.spec.feature_ranges.push_back({begin, end - begin});
    ds.spec.observed_counts.push_back(count);
    begin = end;
  }
  ds.data = MaskedMatrix(std::move(values), std::move(mask));
  return ds;
}

std::vector<Matrix> partition_blocks(const CanonicalDataset &ds) {
  std::vector<Matrix> blocks;
  blocks.reserve(ds.spec.k());
  for (std::size_t i = 0; i < ds.spec.k(); ++i) {
    const auto &r = ds.spec.feature_ranges[i];
    blocks.emplace_back(ds.data.values().block(0, r.begin, ds.spec.observed_counts[i], r.width));
  }
  return blocks;
}

std::vector<Index> partition_sizes(Index n_samples, std::size_t partitions) {
  if (partitions == 0) throw ConfigError("need at least one partition");
  const auto parts = static_cast<Index>(partitions);
  std::vector<Index> sizes(partitions, n_samples / parts);
  sizes[0] += n_samples % parts;
  return sizes;
}

MaskedMatrix generate_monotone_missing(const Matrix &x, std::span<const Index> missing_counts, std::uint64_t seed) {
  const Index n = x.rows();
  const Index p = x.cols();
  if (n == 0 || p == 0) throw DimensionError("generate_monotone_missing: empty matrix");
  Index cumulative = 0;
  for (Index c : missing_counts) {
    if (c < 0) throw ConfigError("missing counts must be nonnegative");
    cumulative += c;
  }
  if (cumulative >= p) {
    throw ConfigError("cumulative missing count " + std::to_string(cumulative) + " must be below the feature count " +
                      std::to_string(p));
  }
  const auto sizes = partition_sizes(n, missing_counts.size() + 1);
  if (sizes.back() < 1) throw ConfigError("more partitions than samples");

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  Mask mask = Mask::Constant(n, p, true);
  std::size_t pos = static_cast<std::size_t>(sizes[0]);
  Index dropped = 0;
  for (std::size_t j = 1; j < sizes.size(); ++j) {
    dropped += missing_counts[j - 1];
    for (Index s = 0; s < sizes[j]; ++s, ++pos) {
      const Index row = order[pos];
      for (Index c = p - dropped; c < p; ++c) mask(row, c) = false;
    }
  }
  return MaskedMatrix(x, std::move(mask));
}

CanonicalDataset make_canonical(Matrix values, const MonotoneBlockSpec &spec) {
  spec.validate();
  if (values.cols() != spec.n_features()) throw DimensionError("make_canonical: column count does not match spec");
  if (values.rows() != spec.observed_counts.front()) throw DimensionError("make_canonical: row count must equal n_1");
  CanonicalDataset ds;
  ds.spec = spec;
  Mask mask = spec.staircase(values.rows());
  ds.data = MaskedMatrix(std::move(values), std::move(mask));
  ds.sample_perm.resize(static_cast<std::size_t>(ds.data.rows()));
  ds.feature_perm.resize(static_cast<std::size_t>(ds.data.cols()));
  std::iota(ds.sample_perm.begin(), ds.sample_perm.end(), Index{0});
  std::iota(ds.feature_perm.begin(), ds.feature_perm.end(), Index{0});
  return ds;
}

} // namespace bpi
