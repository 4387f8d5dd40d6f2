#include "bpi/synthetic.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace bpi {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Matrix gaussian_matrix(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  // Row-major fill order keeps the stream layout independent of storage order.
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) m(r, c) = normal(rng);
  }
  return m;
}

Matrix low_rank_matrix(Index rows, Index cols, Index rank, std::uint64_t seed) {
  const Matrix a = gaussian_matrix(rows, rank, derive_seed(seed, 0));
  const Matrix b = gaussian_matrix(rank, cols, derive_seed(seed, 1));
  return a * b;
}

Matrix random_spd(Index p, std::uint64_t seed, double shift) {
  const Matrix b = gaussian_matrix(p, p, seed);
  Matrix s = b.transpose() * b;
  s.diagonal().array() += shift;
  // Exact symmetry.
  return 0.5 * (s + s.transpose());
}

LabeledData gaussian_mixture(const MixtureSpec &spec, std::uint64_t seed) {
  if (spec.samples < 1 || spec.features < 1 || spec.classes < 1 || spec.rank < 1) {
    throw ConfigError("gaussian_mixture: sizes must be positive");
  }
  const Matrix loadings = gaussian_matrix(spec.rank, spec.features, derive_seed(seed, 0));
  const Matrix centers = spec.separation * gaussian_matrix(spec.classes, spec.rank, derive_seed(seed, 1));

  LabeledData out;
  out.labels.resize(static_cast<std::size_t>(spec.samples));
  for (Index i = 0; i < spec.samples; ++i) out.labels[static_cast<std::size_t>(i)] = static_cast<int>(i % spec.classes);
  std::mt19937_64 shuffler(derive_seed(seed, 2));
  std::shuffle(out.labels.begin(), out.labels.end(), shuffler);

  Matrix latent = gaussian_matrix(spec.samples, spec.rank, derive_seed(seed, 3));
  for (Index i = 0; i < spec.samples; ++i) latent.row(i) += centers.row(out.labels[static_cast<std::size_t>(i)]);
  out.x = latent * loadings + spec.noise * gaussian_matrix(spec.samples, spec.features, derive_seed(seed, 4));
  return out;
}

} // namespace bpi
