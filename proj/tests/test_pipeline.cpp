#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "bpi/pipeline.hpp"
#include "bpi/synthetic.hpp"
#include "oracles.hpp"

using bpi::Index;
using bpi::Matrix;

namespace {

const double NA = std::numeric_limits<double>::quiet_NaN();

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

bpi::CanonicalDataset staircase_dataset(Index n, Index p, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto st = oracle::random_staircase(n, p, k, rng);
  return bpi::detect_monotone(bpi::MaskedMatrix(oracle::random_matrix(n, p, seed + 1), st.mask));
}

} // namespace

TEST_CASE("stacking the illustrative toy scores") {
  // Scores as printed in the toy example, samples in rows.
  Matrix z1(7, 2);
  z1 << 0.5, 1, 2, 0.7, 1, 0.3, 0, 2, 1, 0.5, 0.9, 1, 2, 1;
  Matrix z2(5, 1);
  z2 << 1, 3, 0.7, 0, 0.3;
  Matrix z3(3, 1);
  z3 << 2, 0.5, 1;
  const bpi::MaskedMatrix z = bpi::stack_with_missing({z1, z2, z3});
  REQUIRE(z.rows() == 7);
  REQUIRE(z.cols() == 4);
  bpi::Mask expect(7, 4);
  expect << 1, 1, 1, 1, //
      1, 1, 1, 1,       //
      1, 1, 1, 1,       //
      1, 1, 1, 0,       //
      1, 1, 1, 0,       //
      1, 1, 0, 0,       //
      1, 1, 0, 0;
  CHECK(z.mask() == expect);
  CHECK(z.missing_count() == 6);
  CHECK(z.value(4, 2) == 0.3);
  CHECK(z.value(2, 3) == 1.0);
}

TEST_CASE("stacking: single block and errors") {
  const Matrix s = oracle::random_matrix(5, 2, 1);
  const bpi::MaskedMatrix z = bpi::stack_with_missing({s});
  CHECK(z.complete());
  CHECK(z.values() == s);
  CHECK_THROWS_AS(bpi::stack_with_missing({Matrix::Ones(2, 1), Matrix::Ones(3, 1)}), bpi::OrderError);
}

TEST_CASE("stacking missing-cell count") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 30; ++t) {
    const int k = 1 + static_cast<int>(rng() % 4);
    std::vector<Matrix> scores;
    Index n = 30 + static_cast<Index>(rng() % 10);
    const Index n1 = n;
    std::size_t expect = 0;
    for (int i = 0; i < k; ++i) {
      const Index q = 1 + static_cast<Index>(rng() % 4);
      scores.push_back(Matrix::Ones(n, q));
      expect += static_cast<std::size_t>(q * (n1 - n));
      n -= static_cast<Index>(rng() % 5);
    }
    CHECK(bpi::stack_with_missing(scores).missing_count() == expect);
  }
}

TEST_CASE("toy dataset with q = 2,1,1") {
  const bpi::CanonicalDataset ds = bpi::detect_monotone(bpi::MaskedMatrix(toy()));
  const auto retention = bpi::BlockRetention::per_block({bpi::FixedDim{2}, bpi::FixedDim{1}, bpi::FixedDim{1}});
  const bpi::MeanImputer mean;
  const bpi::ReducedStack stack = bpi::bpi_reduce_impute(ds, retention, mean);
  CHECK(stack.z_star.rows() == 7);
  CHECK(stack.z_star.cols() == 4);
  CHECK(stack.z_star.missing_count() == 6);
  CHECK(ds.data.missing_count() == 12);
  bpi::Mask expect(7, 4);
  expect << 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 1, 1, 1, 0, 1, 1, 0, 0, 1, 1, 0, 0;
  CHECK(stack.z_star.mask() == expect);
  REQUIRE(stack.z);
  CHECK_FALSE(stack.z->hasNaN());
  CHECK(stack.timing.calls == 1);
}

TEST_CASE("stack invariants on a synthetic dataset") {
  // 300 x 40, three blocks, variance target, mean imputer.
  const Matrix x = bpi::low_rank_matrix(300, 40, 5, 2) + 0.1 * oracle::random_matrix(300, 40, 3);
  bpi::MonotoneBlockSpec spec{{{0, 20}, {20, 12}, {32, 8}}, {300, 200, 100}};
  Matrix v = x;
  const bpi::Mask st = spec.staircase(300);
  const bpi::CanonicalDataset ds = bpi::detect_monotone(bpi::MaskedMatrix(v, st));
  const bpi::BlockRetention retention = bpi::BlockRetention::uniform(bpi::VarianceTarget{0.95});
  const bpi::ReducedStack stack = bpi::bpi_reduce_impute(ds, retention, bpi::MeanImputer{});
  REQUIRE(stack.z);
  const Matrix &z = *stack.z;
  CHECK_FALSE(z.hasNaN());
  Index total = 0;
  for (const auto &m : stack.block_models) total += m.q;
  CHECK(z.cols() == total);
  const auto blocks = bpi::partition_blocks(ds);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto &r = stack.block_score_ranges[i];
    const Matrix scores = bpi::transform(stack.block_models[i], blocks[i]);
    CHECK(stack.z_star.values().block(0, r.begin, scores.rows(), r.width) == scores);
    CHECK(z.block(0, r.begin, scores.rows(), r.width) == scores);
    CHECK(stack.block_ev[i] >= 0.95);
  }
  CHECK(stack.z_star.mask() ==
        bpi::MonotoneBlockSpec{stack.block_score_ranges, ds.spec.observed_counts}.staircase(300));
  CHECK(stack.z_star.missing_count() < ds.data.missing_count());
}

TEST_CASE("missing cells never grow when q_i <= p_i") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const bpi::CanonicalDataset ds = staircase_dataset(40, 12, 1 + static_cast<int>(seed % 4), seed);
    const bpi::ReducedStack s = bpi::bpi_reduce(ds, bpi::BlockRetention::uniform(bpi::VarianceTarget{0.8}));
    CHECK(s.z_star.missing_count() <= ds.data.missing_count());
  }
}

TEST_CASE("degenerate BPI equals PCA") {
  const Matrix x = oracle::random_matrix(50, 8, 12);
  const bpi::CanonicalDataset ds = bpi::detect_monotone(bpi::MaskedMatrix(x));
  const bpi::ReducedStack stack =
      bpi::bpi_reduce_impute(ds, bpi::BlockRetention::uniform(bpi::KeepAll{}), bpi::MeanImputer{});
  CHECK(stack.timing.calls == 0);
  const bpi::PcaModel plain = bpi::fit_pca(x, bpi::KeepAll{});
  CHECK(*stack.z == bpi::transform(plain, x));
  const bpi::BaselineResult base = bpi::baseline_impute_then_pca(ds, bpi::MeanImputer{}, bpi::KeepAll{});
  CHECK(base.scores == *stack.z);
  CHECK(base.timing.calls == 0);
}

TEST_CASE("baseline with q = p reconstructs the mean-completed matrix") {
  const bpi::CanonicalDataset ds = staircase_dataset(30, 6, 3, 4);
  const bpi::BaselineResult base = bpi::baseline_impute_then_pca(ds, bpi::MeanImputer{}, bpi::FixedDim{6});
  CHECK((bpi::inverse_transform(base.model, base.scores) - bpi::impute_mean(ds.data)).norm() < 1e-8);
  CHECK(base.timing.calls == 1);
  CHECK(base.timing.seconds >= 0.0);
}

TEST_CASE("block with fewer than two samples") {
  Matrix v = oracle::random_matrix(4, 3, 1);
  v(1, 2) = NA;
  v(2, 2) = NA;
  v(3, 2) = NA;
  const bpi::CanonicalDataset ds = bpi::detect_monotone(bpi::MaskedMatrix(v));
  try {
    bpi::bpi_reduce(ds, bpi::BlockRetention{});
    FAIL("expected InsufficientSamples");
  } catch (const bpi::InsufficientSamples &e) {
    CHECK(std::string(e.what()).find("block 2") != std::string::npos);
  }
}

TEST_CASE("retention defaults pass small blocks through") {
  const bpi::BlockRetention r;
  CHECK(std::holds_alternative<bpi::KeepAll>(r.rule_for(0, 4)));
  CHECK(std::holds_alternative<bpi::VarianceTarget>(r.rule_for(0, 5)));
  bpi::BlockRetention o;
  o.overrides = {std::nullopt, bpi::RetentionRule{bpi::FixedDim{1}}};
  CHECK(std::holds_alternative<bpi::FixedDim>(o.rule_for(1, 2)));
}

TEST_CASE("compare_ev") {
  const bpi::CanonicalDataset ds = staircase_dataset(60, 10, 3, 8);
  const bpi::EvComparison all = bpi::compare_ev(ds, bpi::BlockRetention::uniform(bpi::KeepAll{}));
  for (double e : all.block_ev) CHECK(e == doctest::Approx(1.0));
  CHECK(all.mean_ev == doctest::Approx(1.0));

  // Population-like data with covariance diag(4,3,2,1): a 4-point design
  // per coordinate gives exactly those variances.
  Matrix x = Matrix::Zero(8, 4);
  const double var[4] = {4, 3, 2, 1};
  for (Index j = 0; j < 4; ++j) {
    const double a = std::sqrt(var[j] * 7.0 / 2.0);
    x(2 * j, j) = a;
    x(2 * j + 1, j) = -a;
  }
  const bpi::CanonicalDataset d = bpi::make_canonical(x, {{{0, 2}, {2, 2}}, {8, 8}});
  const bpi::EvComparison c = bpi::compare_ev(d, bpi::BlockRetention::uniform(bpi::FixedDim{1}));
  CHECK(c.block_ev[0] == doctest::Approx(4.0 / 7.0));
  CHECK(c.block_ev[1] == doctest::Approx(2.0 / 3.0));
  CHECK(c.mean_ev == doctest::Approx(13.0 / 21.0));

  // Equal variances inside each block.
  Matrix y = Matrix::Zero(8, 4);
  for (Index j = 0; j < 4; ++j) {
    y(2 * j, j) = 1;
    y(2 * j + 1, j) = -1;
  }
  const bpi::CanonicalDataset e = bpi::make_canonical(y, {{{0, 2}, {2, 2}}, {8, 8}});
  CHECK(bpi::compare_ev(e, bpi::BlockRetention::uniform(bpi::FixedDim{1})).mean_ev == doctest::Approx(0.5));
}

TEST_CASE("block fits do not depend on scheduling") {
  const bpi::CanonicalDataset ds = staircase_dataset(80, 30, 4, 21);
  const bpi::ReducedStack a = bpi::bpi_reduce(ds, bpi::BlockRetention::uniform(bpi::VarianceTarget{0.9}));
  const bpi::ReducedStack b = bpi::bpi_reduce(ds, bpi::BlockRetention::uniform(bpi::VarianceTarget{0.9}));
  CHECK(a.z_star.mask() == b.z_star.mask());
  CHECK(a.z_star.mask().select(a.z_star.values(), 0.0) == b.z_star.mask().select(b.z_star.values(), 0.0));
}

TEST_CASE("projection and reconstruction") {
  const bpi::CanonicalDataset ds = staircase_dataset(50, 9, 3, 2);
  bpi::ReducedStack stack = bpi::bpi_reduce(ds, bpi::BlockRetention::uniform(bpi::KeepAll{}));
  bpi::bpi_impute(stack, bpi::MeanImputer{});
  // KeepAll on complete rows is lossless.
  const Matrix rows = ds.data.values().topRows(ds.spec.observed_counts.back());
  const Matrix proj = bpi::bpi_project_complete(stack, ds, rows);
  CHECK((proj - stack.z->topRows(rows.rows())).cwiseAbs().maxCoeff() < 1e-12);
  const Matrix rec = bpi::bpi_reconstruct(stack, ds);
  CHECK((rec.topRows(rows.rows()) - rows).cwiseAbs().maxCoeff() < 1e-10);
}
