#include "bpi/kernels.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include <omp.h>

namespace bpi::kernels {

namespace {

constexpr Index kTile = 96;

struct Tile {
  Index row0, rows, col0, cols;
};

std::vector<Tile> upper_tiles(Index n) {
  std::vector<Tile> tiles;
  for (Index c = 0; c < n; c += kTile) {
    for (Index r = 0; r <= c; r += kTile) {
      tiles.push_back({r, std::min(kTile, n - r), c, std::min(kTile, n - c)});
    }
  }
  return tiles;
}

void mirror_upper(Matrix &g) {
  for (Index j = 0; j < g.cols(); ++j) {
    for (Index i = j + 1; i < g.rows(); ++i) g(i, j) = g(j, i);
  }
}

double masked_distance(const Matrix &values, const Mask &mask, Index a, Index b) {
  const Index p = values.cols();
  double sum = 0.0;
  Index shared = 0;
  for (Index f = 0; f < p; ++f) {
    if (mask(a, f) && mask(b, f)) {
      const double d = values(a, f) - values(b, f);
      sum += d * d;
      ++shared;
    }
  }
  if (shared == 0) return std::numeric_limits<double>::infinity();
  return std::sqrt(static_cast<double>(p) / static_cast<double>(shared) * sum);
}

} // namespace

Matrix gram(const Matrix &x) {
  const Index p = x.cols();
  Matrix g(p, p);
  const auto tiles = upper_tiles(p);
  const auto count = static_cast<long>(tiles.size());
#pragma omp parallel for schedule(dynamic)
  for (long t = 0; t < count; ++t) {
    const Tile &tile = tiles[static_cast<std::size_t>(t)];
    g.block(tile.row0, tile.col0, tile.rows, tile.cols).noalias() =
        x.middleCols(tile.row0, tile.rows).transpose() * x.middleCols(tile.col0, tile.cols);
  }
  mirror_upper(g);
  return g;
}

Matrix outer_gram(const Matrix &x) {
  // Row blocks of a column-major matrix are strided; transpose once.
  const Matrix xt = x.transpose();
  return gram(xt);
}

Matrix masked_distances(const Matrix &values, const Mask &mask, std::span<const Index> queries) {
  const Index n = values.rows();
  const auto nq = static_cast<long>(queries.size());
  Matrix d(nq, n);
#pragma omp parallel for schedule(static)
  for (long q = 0; q < nq; ++q) {
    const Index a = queries[static_cast<std::size_t>(q)];
    for (Index b = 0; b < n; ++b) {
      d(q, b) = (a == b) ? std::numeric_limits<double>::infinity() : masked_distance(values, mask, a, b);
    }
  }
  return d;
}

Matrix squared_distances(const Matrix &queries, const Matrix &reference) {
  if (queries.cols() != reference.cols()) throw DimensionError("squared_distances: feature counts differ");
  // Row-major copies keep the inner loop contiguous.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> q = queries;
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> r = reference;
  const Index nq = q.rows();
  const Index nr = r.rows();
  Matrix d(nq, nr);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < nq; ++i) {
    for (Index j = 0; j < nr; ++j) d(i, j) = (q.row(i) - r.row(j)).squaredNorm();
  }
  return d;
}

namespace serial {

Matrix gram(const Matrix &x) {
  const Index n = x.rows();
  const Index p = x.cols();
  Matrix g(p, p);
  for (Index i = 0; i < p; ++i) {
    for (Index j = i; j < p; ++j) {
      double s = 0.0;
      for (Index r = 0; r < n; ++r) s += x(r, i) * x(r, j);
      g(i, j) = s;
      g(j, i) = s;
    }
  }
  return g;
}

Matrix outer_gram(const Matrix &x) {
  const Index n = x.rows();
  const Index p = x.cols();
  Matrix g(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      double s = 0.0;
      for (Index c = 0; c < p; ++c) s += x(i, c) * x(j, c);
      g(i, j) = s;
      g(j, i) = s;
    }
  }
  return g;
}

Matrix masked_distances(const Matrix &values, const Mask &mask, std::span<const Index> queries) {
  const Index n = values.rows();
  Matrix d(static_cast<Index>(queries.size()), n);
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const Index a = queries[q];
    for (Index b = 0; b < n; ++b) {
      d(static_cast<Index>(q), b) =
          (a == b) ? std::numeric_limits<double>::infinity() : masked_distance(values, mask, a, b);
    }
  }
  return d;
}

Matrix squared_distances(const Matrix &queries, const Matrix &reference) {
  if (queries.cols() != reference.cols()) throw DimensionError("squared_distances: feature counts differ");
  Matrix d(queries.rows(), reference.rows());
  for (Index i = 0; i < queries.rows(); ++i) {
    for (Index j = 0; j < reference.rows(); ++j) {
      double s = 0.0;
      for (Index c = 0; c < queries.cols(); ++c) {
        const double t = queries(i, c) - reference(j, c);
        s += t * t;
      }
      d(i, j) = s;
    }
  }
  return d;
}

} // namespace serial

int max_threads() { return omp_get_max_threads(); }

} // namespace bpi::kernels
