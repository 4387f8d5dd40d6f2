#pragma once

#include <span>

#include "bpi/matrix.hpp"

// Data-parallel inner loops. Every kernel has an OpenMP version (bpi::kernels)
// and a plain serial reference (bpi::kernels::serial) used by the tests and the
// kernel benchmark. Parallel versions split work over independent outputs, so
// each output cell is produced by exactly one thread with a fixed summation
// order and results do not depend on the thread count.
namespace bpi::kernels {

/// X^T X. Tiles of the upper triangle are distributed over threads.
Matrix gram(const Matrix &x);

/// X X^T.
Matrix outer_gram(const Matrix &x);

/// Masked Euclidean distance from each query row to every row of `values`:
/// sqrt((p / |shared|) * sum over shared observed dims of (a - b)^2).
/// Entries with no shared observed dimension (and the query row itself) are +inf.
Matrix masked_distances(const Matrix &values, const Mask &mask, std::span<const Index> queries);

/// Squared Euclidean distances, one row per query, one column per reference row.
Matrix squared_distances(const Matrix &queries, const Matrix &reference);

namespace serial {

Matrix gram(const Matrix &x);
Matrix outer_gram(const Matrix &x);
Matrix masked_distances(const Matrix &values, const Mask &mask, std::span<const Index> queries);
Matrix squared_distances(const Matrix &queries, const Matrix &reference);

} // namespace serial

/// Threads OpenMP will use for the parallel kernels.
int max_threads();

} // namespace bpi::kernels
