#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include <omp.h>

#include "bpi/kernels.hpp"
#include "oracles.hpp"

using bpi::Index;
using bpi::Matrix;

namespace {

bpi::Mask random_mask(Index n, Index p, double keep, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution d(keep);
  bpi::Mask m(n, p);
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < p; ++c) m(r, c) = d(rng);
  return m;
}

template <class F>
Matrix with_threads(int threads, F &&f) {
  const int saved = omp_get_max_threads();
  omp_set_num_threads(threads);
  Matrix out = f();
  omp_set_num_threads(saved);
  return out;
}

} // namespace

TEST_CASE("gram agrees with the serial reference") {
  for (auto [n, p] : std::vector<std::pair<Index, Index>>{{1, 1}, {7, 3}, {50, 97}, {300, 200}, {20, 250}}) {
    const Matrix x = oracle::random_matrix(n, p, static_cast<std::uint64_t>(n * 1000 + p));
    const Matrix par = bpi::kernels::gram(x);
    const Matrix ser = bpi::kernels::serial::gram(x);
    CHECK((par - ser).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, ser.cwiseAbs().maxCoeff()));
    CHECK(par == par.transpose());
    const Matrix opar = bpi::kernels::outer_gram(x.transpose());
    CHECK((opar - par).cwiseAbs().maxCoeff() == 0.0);
    CHECK((bpi::kernels::serial::outer_gram(x.transpose()) - ser).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, ser.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("parallel kernels do not depend on the thread count") {
  const Matrix x = oracle::random_matrix(240, 210, 5);
  const Matrix g1 = with_threads(1, [&] { return bpi::kernels::gram(x); });
  const Matrix g4 = with_threads(4, [&] { return bpi::kernels::gram(x); });
  CHECK(g1 == g4);

  const bpi::Mask mask = random_mask(240, 210, 0.7, 6);
  std::vector<Index> q(40);
  std::iota(q.begin(), q.end(), 100);
  const Matrix d1 = with_threads(1, [&] { return bpi::kernels::masked_distances(x, mask, q); });
  const Matrix d4 = with_threads(4, [&] { return bpi::kernels::masked_distances(x, mask, q); });
  CHECK(d1 == d4);

  const Matrix a = oracle::random_matrix(60, 20, 7);
  const Matrix s1 = with_threads(1, [&] { return bpi::kernels::squared_distances(a, x.leftCols(20)); });
  const Matrix s4 = with_threads(4, [&] { return bpi::kernels::squared_distances(a, x.leftCols(20)); });
  CHECK(s1 == s4);
}

TEST_CASE("masked distances agree with the serial reference and the oracle") {
  const Matrix x = oracle::random_matrix(80, 12, 8);
  const bpi::Mask mask = random_mask(80, 12, 0.6, 9);
  std::vector<Index> q{0, 5, 17, 79};
  const Matrix par = bpi::kernels::masked_distances(x, mask, q);
  const Matrix ser = bpi::kernels::serial::masked_distances(x, mask, q);
  REQUIRE(par.rows() == 4);
  REQUIRE(par.cols() == 80);
  for (Index i = 0; i < 4; ++i) {
    CHECK(std::isinf(par(i, q[static_cast<std::size_t>(i)])));
    for (Index o = 0; o < 80; ++o) {
      if (o == q[static_cast<std::size_t>(i)]) continue;
      const double ref = oracle::masked_distance(x, mask, q[static_cast<std::size_t>(i)], o);
      if (std::isinf(ref)) {
        CHECK(std::isinf(par(i, o)));
        CHECK(std::isinf(ser(i, o)));
      } else {
        CHECK(par(i, o) == doctest::Approx(ref).epsilon(1e-12));
        CHECK(ser(i, o) == doctest::Approx(ref).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("masked distance rescales by shared dimensions") {
  Matrix x(2, 4);
  x << 0, 0, 0, 0, 1, 1, 5, 5;
  bpi::Mask m(2, 4);
  m << true, true, false, false, true, true, true, true;
  std::vector<Index> q{0};
  const Matrix d = bpi::kernels::masked_distances(x, m, q);
  // sqrt(4/2 * (1 + 1)) = 2
  CHECK(d(0, 1) == doctest::Approx(2.0));
}

TEST_CASE("squared distances agree with the serial reference") {
  const Matrix a = oracle::random_matrix(33, 9, 1);
  const Matrix b = oracle::random_matrix(71, 9, 2);
  const Matrix par = bpi::kernels::squared_distances(a, b);
  const Matrix ser = bpi::kernels::serial::squared_distances(a, b);
  CHECK((par - ser).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(par(3, 4) == doctest::Approx((a.row(3) - b.row(4)).squaredNorm()));
}

TEST_CASE("max_threads is positive") { CHECK(bpi::kernels::max_threads() >= 1); }
