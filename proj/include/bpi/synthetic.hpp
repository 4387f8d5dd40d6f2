#pragma once

#include <cstdint>
#include <vector>

#include "bpi/matrix.hpp"

namespace bpi {

/// Class-structured Gaussian mixture: class means lie on a random rank-r
/// subspace, samples add latent within-class spread on the same subspace and
/// isotropic noise in feature space.
struct MixtureSpec {
  Index samples = 3000;
  Index features = 600;
  int classes = 10;
  Index rank = 20;
  double noise = 1.0;
  /// Standard deviation of class-mean latent coordinates relative to the
  /// unit within-class latent spread.
  double separation = 0.6;
};

struct LabeledData {
  Matrix x;
  std::vector<int> labels;
};

LabeledData gaussian_mixture(const MixtureSpec &spec, std::uint64_t seed);

/// A * B with standard normal factors of shape n x rank and rank x p.
Matrix low_rank_matrix(Index rows, Index cols, Index rank, std::uint64_t seed);

/// B^T B + shift * I with B standard normal (p x p).
Matrix random_spd(Index p, std::uint64_t seed, double shift = 0.0);

/// Standard normal matrix.
Matrix gaussian_matrix(Index rows, Index cols, std::uint64_t seed);

/// Stateless seed derivation (splitmix64) for per-repeat and per-stage streams.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

} // namespace bpi
