#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "bpi/monotone.hpp"
#include "oracles.hpp"

using bpi::Index;
using bpi::Matrix;

namespace {

const double NA = std::numeric_limits<double>::quiet_NaN();

Matrix d1() {
  Matrix m(3, 5);
  m << 2, 3, 5, 7, 9, 1, 2, 4, NA, NA, 3, 2, 6, NA, NA;
  return m;
}

Matrix d3() {
  Matrix m(3, 5);
  m << 8, 3, 5, 7, 1, 1, 2, 4, NA, NA, 3, 2, NA, 1, 12;
  return m;
}

// Seven-sample toy dataset, samples in rows.
Matrix toy() {
  Matrix m(7, 7);
  m << 1, 2, 3, 3, 0, 4, 9,   //
      5, 3, 1, 1, 4, 8, 1,    //
      2, 6, 8, 2, 1, 6, 2,    //
      9, 4, 3, 0, 3, NA, NA,  //
      7, 0, 5, 0, 2, NA, NA,  //
      0, 1, 2, NA, NA, NA, NA, //
      8, 9, 0, NA, NA, NA, NA;
  return m;
}

bpi::MaskedMatrix permuted(const bpi::MaskedMatrix &m, const std::vector<Index> &rows, const std::vector<Index> &cols) {
  Matrix v(m.rows(), m.cols());
  bpi::Mask k(m.rows(), m.cols());
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) {
      v(r, c) = m.value(rows[static_cast<std::size_t>(r)], cols[static_cast<std::size_t>(c)]);
      k(r, c) = m.observed(rows[static_cast<std::size_t>(r)], cols[static_cast<std::size_t>(c)]);
    }
  return {v, k};
}

} // namespace

TEST_CASE("D1 and D2 are monotone") {
  const bpi::CanonicalDataset ds = bpi::detect_monotone(bpi::MaskedMatrix(d1()));
  CHECK(ds.spec.k() == 2);
  CHECK(ds.spec.widths() == std::vector<Index>{3, 2});
  CHECK(ds.spec.observed_counts == std::vector<Index>{3, 1});

  Matrix d2(3, 5);
  d2 << 8, 3, 5, 7, 1, 1, 2, 4, NA, NA, 3, 2, NA, NA, NA;
  const bpi::CanonicalDataset ds2 = bpi::detect_monotone(bpi::MaskedMatrix(d2));
  CHECK(ds2.spec.k() == 3);
  CHECK(ds2.spec.widths() == std::vector<Index>{2, 1, 2});
  CHECK(ds2.spec.observed_counts == std::vector<Index>{3, 2, 1});
}

TEST_CASE("D3 is rejected with the violating cell") {
  try {
    bpi::detect_monotone(bpi::MaskedMatrix(d3()));
    FAIL("expected NotMonotone");
  } catch (const bpi::NotMonotone &e) {
    CHECK(e.sample() == 2);
    CHECK(e.feature() == 2);
  }
}

TEST_CASE("fully observed matrix is a single block") {
  const bpi::CanonicalDataset ds = bpi::detect_monotone(bpi::MaskedMatrix(oracle::random_matrix(6, 4, 1)));
  CHECK(ds.spec.k() == 1);
  CHECK(ds.spec.observed_counts == std::vector<Index>{6});
}

TEST_CASE("fully missing features and samples are rejected") {
  Matrix col = Matrix::Ones(3, 2);
  col.col(1).setConstant(NA);
  CHECK_THROWS_AS(bpi::detect_monotone(bpi::MaskedMatrix(col)), bpi::AllMissingColumn);
  Matrix row = Matrix::Ones(3, 2);
  row.row(2).setConstant(NA);
  CHECK_THROWS_AS(bpi::detect_monotone(bpi::MaskedMatrix(row)), bpi::DataError);
}

TEST_CASE("toy partition shapes") {
  const bpi::CanonicalDataset ds = bpi::detect_monotone(bpi::MaskedMatrix(toy()));
  const auto blocks = bpi::partition_blocks(ds);
  REQUIRE(blocks.size() == 3);
  CHECK(blocks[0].rows() == 7);
  CHECK(blocks[0].cols() == 3);
  CHECK(blocks[1].rows() == 5);
  CHECK(blocks[1].cols() == 2);
  CHECK(blocks[2].rows() == 3);
  CHECK(blocks[2].cols() == 2);
  for (const auto &b : blocks) CHECK_FALSE(b.hasNaN());
  CHECK(blocks[2](0, 0) == 4.0);
  CHECK(blocks[2](2, 1) == 2.0);
}

TEST_CASE("k = 1 partition is the whole matrix") {
  const Matrix x = oracle::random_matrix(5, 3, 2);
  const auto blocks = bpi::partition_blocks(bpi::detect_monotone(bpi::MaskedMatrix(x)));
  REQUIRE(blocks.size() == 1);
  CHECK(blocks[0] == x);
}

TEST_CASE("blocks with NaN padding reproduce the masked matrix") {
  std::mt19937_64 rng(10);
  const auto st = oracle::random_staircase(100, 20, 4, rng);
  Matrix v = oracle::random_matrix(100, 20, 3);
  for (Index r = 0; r < 100; ++r)
    for (Index c = 0; c < 20; ++c)
      if (!st.mask(r, c)) v(r, c) = NA;
  const bpi::CanonicalDataset ds = bpi::detect_monotone(bpi::MaskedMatrix(v));
  const auto blocks = bpi::partition_blocks(ds);
  Matrix rebuilt = Matrix::Constant(100, 20, NA);
  Index begin = 0;
  for (const auto &b : blocks) {
    rebuilt.block(0, begin, b.rows(), b.cols()) = b;
    begin += b.cols();
  }
  for (Index r = 0; r < 100; ++r)
    for (Index c = 0; c < 20; ++c) {
      if (std::isnan(v(r, c))) {
        CHECK(std::isnan(rebuilt(r, c)));
      } else {
        CHECK(rebuilt(r, c) == v(r, c));
      }
    }
}

TEST_CASE("round trip over random staircases") {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 200; ++t) {
    const Index n = 5 + static_cast<Index>(rng() % 40);
    const Index p = 4 + static_cast<Index>(rng() % 20);
    const int k = 1 + static_cast<int>(rng() % std::min<Index>(4, std::min(p, n - 2)));
    const auto st = oracle::random_staircase(n, p, k, rng);
    Matrix v = oracle::random_matrix(n, p, static_cast<std::uint64_t>(t));
    const bpi::MaskedMatrix canonical(v, st.mask);
    std::vector<Index> rows(static_cast<std::size_t>(n)), cols(static_cast<std::size_t>(p));
    std::iota(rows.begin(), rows.end(), 0);
    std::iota(cols.begin(), cols.end(), 0);
    std::shuffle(rows.begin(), rows.end(), rng);
    std::shuffle(cols.begin(), cols.end(), rng);
    const bpi::MaskedMatrix shuffled = permuted(canonical, rows, cols);
    const bpi::CanonicalDataset ds = bpi::detect_monotone(shuffled);
    CHECK(ds.spec.observed_counts == st.counts);
    CHECK(ds.spec.widths() == st.widths);
    CHECK(ds.spec.n_features() == p);
    CHECK(ds.data.mask() == ds.spec.staircase(n));
    // Inverse permutation restores the input exactly.
    const bpi::MaskedMatrix back = ds.original();
    CHECK(back.mask() == shuffled.mask());
    CHECK(back.mask().select(back.values(), 0.0) == shuffled.mask().select(shuffled.values(), 0.0));
  }
}

TEST_CASE("detection is permutation invariant") {
  const bpi::MaskedMatrix m(toy());
  const bpi::CanonicalDataset a = bpi::detect_monotone(m);
  const bpi::CanonicalDataset b = bpi::detect_monotone(permuted(m, {6, 2, 4, 0, 5, 1, 3}, {5, 3, 0, 6, 1, 4, 2}));
  CHECK(a.spec.widths() == b.spec.widths());
  CHECK(a.spec.observed_counts == b.spec.observed_counts);
}

TEST_CASE("partition sizes") {
  CHECK(bpi::partition_sizes(6000, 4) == std::vector<Index>{1500, 1500, 1500, 1500});
  CHECK(bpi::partition_sizes(10, 4) == std::vector<Index>{4, 2, 2, 2});
}

TEST_CASE("generated missingness: MNIST-shaped counts") {
  const Matrix x = Matrix::Ones(6000, 784);
  const std::vector<Index> counts{100, 200, 300};
  const bpi::MaskedMatrix m = bpi::generate_monotone_missing(x, counts, 1);
  // Counting oracle over the mask.
  std::vector<Index> feature_obs(784, 0);
  for (Index c = 0; c < 784; ++c) feature_obs[static_cast<std::size_t>(c)] = m.mask().col(c).count();
  CHECK(std::count(feature_obs.begin(), feature_obs.end(), 6000) == 184);
  CHECK(std::count(feature_obs.begin(), feature_obs.end(), 4500) == 300);
  CHECK(std::count(feature_obs.begin(), feature_obs.end(), 3000) == 200);
  CHECK(std::count(feature_obs.begin(), feature_obs.end(), 1500) == 100);
  const bpi::CanonicalDataset ds = bpi::detect_monotone(m);
  CHECK(ds.spec.widths() == std::vector<Index>{184, 300, 200, 100});
  CHECK(ds.spec.observed_counts == std::vector<Index>{6000, 4500, 3000, 1500});
}

TEST_CASE("generated missingness: wide counts round trip") {
  const Matrix x = Matrix::Zero(801, 20531);
  const std::vector<Index> counts{2000, 4000, 6000};
  const bpi::CanonicalDataset ds = bpi::detect_monotone(bpi::generate_monotone_missing(x, counts, 3));
  CHECK(ds.spec.k() == 4);
  CHECK(ds.spec.widths() == std::vector<Index>{8531, 6000, 4000, 2000});
  // The remainder row lands in the fully observed partition, which every block sees.
  CHECK(ds.spec.observed_counts == std::vector<Index>{801, 601, 401, 201});
}

TEST_CASE("generated missingness: edge cases and errors") {
  const Matrix x = oracle::random_matrix(20, 10, 1);
  const std::vector<Index> zeros{0, 0, 0};
  CHECK(bpi::generate_monotone_missing(x, zeros, 1).complete());
  const std::vector<Index> too_many{3, 3, 4};
  CHECK_THROWS_AS(bpi::generate_monotone_missing(x, too_many, 1), bpi::ConfigError);
  const std::vector<Index> negative{-1, 2};
  CHECK_THROWS_AS(bpi::generate_monotone_missing(x, negative, 1), bpi::ConfigError);
}

TEST_CASE("generated missingness: determinism and superset structure") {
  const Matrix x = oracle::random_matrix(103, 30, 4);
  const std::vector<Index> counts{4, 6, 8};
  const bpi::MaskedMatrix a = bpi::generate_monotone_missing(x, counts, 99);
  const bpi::MaskedMatrix b = bpi::generate_monotone_missing(x, counts, 99);
  const bpi::MaskedMatrix c = bpi::generate_monotone_missing(x, counts, 100);
  CHECK(a.mask() == b.mask());
  CHECK(a.mask() != c.mask());
  // Observed values are untouched.
  CHECK(a.mask().select(a.values(), 0.0) == a.mask().select(x, 0.0));
  // Each row's missing set is a trailing range; sets nest across partitions.
  std::vector<Index> missing_per_row;
  for (Index r = 0; r < 103; ++r) {
    const Index miss = 30 - a.mask().row(r).count();
    CHECK(a.mask().row(r).tail(miss).count() == 0);
    missing_per_row.push_back(miss);
  }
  std::sort(missing_per_row.begin(), missing_per_row.end());
  CHECK(std::count(missing_per_row.begin(), missing_per_row.end(), 0) == 28);
  CHECK(std::count(missing_per_row.begin(), missing_per_row.end(), 4) == 25);
  CHECK(std::count(missing_per_row.begin(), missing_per_row.end(), 10) == 25);
  CHECK(std::count(missing_per_row.begin(), missing_per_row.end(), 18) == 25);
}

TEST_CASE("generated masks always pass detection") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 50; ++t) {
    const Index n = 8 + static_cast<Index>(rng() % 50);
    const Index p = 6 + static_cast<Index>(rng() % 30);
    std::vector<Index> counts;
    Index left = p - 1;
    for (int j = 0; j < 3; ++j) {
      const Index c = static_cast<Index>(rng() % static_cast<std::uint64_t>(left / 3 + 1));
      counts.push_back(c);
      left -= c;
    }
    const bpi::MaskedMatrix m = bpi::generate_monotone_missing(oracle::random_matrix(n, p, rng()), counts, rng());
    CHECK_NOTHROW(bpi::detect_monotone(m));
  }
}

TEST_CASE("spec validation and helpers") {
  bpi::MonotoneBlockSpec spec{{{0, 3}, {3, 2}}, {5, 3}};
  CHECK_NOTHROW(spec.validate());
  CHECK(spec.block_of(4) == 1);
  CHECK(spec.block_of(0) == 0);
  const bpi::Mask st = spec.staircase(5);
  CHECK(st.count() == 15 + 6);
  bpi::MonotoneBlockSpec gap{{{0, 3}, {4, 2}}, {5, 3}};
  CHECK_THROWS_AS(gap.validate(), bpi::ConfigError);
  bpi::MonotoneBlockSpec rising{{{0, 3}, {3, 2}}, {3, 5}};
  CHECK_THROWS_AS(rising.validate(), bpi::ConfigError);

  const bpi::CanonicalDataset ds = bpi::make_canonical(oracle::random_matrix(5, 5, 1), spec);
  CHECK(ds.data.missing_count() == 4);
  CHECK(ds.sample_perm == std::vector<Index>{0, 1, 2, 3, 4});
}
