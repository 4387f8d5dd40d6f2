#include "bpi/imputers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bpi/kernels.hpp"

namespace bpi {

namespace {

constexpr Index kKnnChunk = 256;

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

struct Svt {
  Matrix z;
  double nuclear = 0.0;
  Index rank = 0;
};

// Rank-capped singular value soft-thresholding of y, computed from the
// eigendecomposition of the smaller Gram matrix.
Svt soft_threshold(const Matrix &y, double lambda, Index max_rank) {
  const bool wide = y.rows() < y.cols();
  const Matrix g = wide ? kernels::outer_gram(y) : kernels::gram(y);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(g);
  if (solver.info() != Eigen::Success) throw Error("soft_impute: eigensolver did not converge");

  // Eigen returns ascending order; walk down from the largest.
  const Index m = g.rows();
  const Index cap = std::min(max_rank, m);
  std::vector<double> factor;
  Svt out;
  for (Index j = 0; j < cap; ++j) {
    const double sigma = std::sqrt(std::max(solver.eigenvalues()(m - 1 - j), 0.0));
    if (sigma <= lambda || sigma == 0.0) break;
    factor.push_back((sigma - lambda) / sigma);
    out.nuclear += sigma - lambda;
  }
  out.rank = static_cast<Index>(factor.size());
  if (out.rank == 0) {
    out.z = Matrix::Zero(y.rows(), y.cols());
    return out;
  }
  const Matrix basis = solver.eigenvectors().rightCols(out.rank).rowwise().reverse();
  const Eigen::Map<const Vector> shrink(factor.data(), out.rank);
  if (wide) {
    out.z = basis * shrink.asDiagonal() * (basis.transpose() * y);
  } else {
    out.z = (y * basis) * shrink.asDiagonal() * basis.transpose();
  }
  return out;
}

double observed_residual(const MaskedMatrix &m, const Matrix &z) {
  double s = 0.0;
  for (Index c = 0; c < m.cols(); ++c) {
    for (Index r = 0; r < m.rows(); ++r) {
      if (m.observed(r, c)) {
        const double d = m.value(r, c) - z(r, c);
        s += d * d;
      }
    }
  }
  return s;
}

} // namespace

Vector observed_column_means(const MaskedMatrix &m) {
  Vector means(m.cols());
  for (Index c = 0; c < m.cols(); ++c) {
    double sum = 0.0;
    Index count = 0;
    for (Index r = 0; r < m.rows(); ++r) {
      if (m.observed(r, c)) {
        sum += m.value(r, c);
        ++count;
      }
    }
    if (count == 0) throw AllMissingColumn(static_cast<std::size_t>(c));
    means(c) = sum / static_cast<double>(count);
  }
  return means;
}

Matrix impute_mean(const MaskedMatrix &m) {
  const Vector means = observed_column_means(m);
  Matrix out = m.values();
  for (Index c = 0; c < m.cols(); ++c) {
    for (Index r = 0; r < m.rows(); ++r) {
      if (!m.observed(r, c)) out(r, c) = means(c);
    }
  }
  return out;
}

Matrix impute_knn(const MaskedMatrix &m, Index k) {
  if (k < 1) throw ConfigError("impute_knn: k must be >= 1");
  const Vector means = observed_column_means(m);
  Matrix out = m.values();

  std::vector<Index> incomplete;
  for (Index r = 0; r < m.rows(); ++r) {
    if (!m.mask().row(r).all()) incomplete.push_back(r);
  }

  std::vector<std::pair<double, Index>> candidates;
  for (std::size_t start = 0; start < incomplete.size(); start += kKnnChunk) {
    const std::size_t len = std::min<std::size_t>(kKnnChunk, incomplete.size() - start);
    const std::span<const Index> queries(incomplete.data() + start, len);
    const Matrix dist = kernels::masked_distances(m.values(), m.mask(), queries);

    for (std::size_t q = 0; q < len; ++q) {
      const Index row = queries[q];
      for (Index c = 0; c < m.cols(); ++c) {
        if (m.observed(row, c)) continue;
        candidates.clear();
        for (Index j = 0; j < m.rows(); ++j) {
          const double d = dist(static_cast<Index>(q), j);
          if (m.observed(j, c) && std::isfinite(d)) candidates.emplace_back(d, j);
        }
        if (candidates.empty()) {
          out(row, c) = means(c);
          continue;
        }
        const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), candidates.size());
        std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take), candidates.end());
        double sum = 0.0;
        for (std::size_t t = 0; t < take; ++t) sum += m.value(candidates[t].second, c);
        out(row, c) = sum / static_cast<double>(take);
      }
    }
  }
  return out;
}

Vector singular_values(const Matrix &x) {
  const Matrix g = x.rows() < x.cols() ? kernels::outer_gram(x) : kernels::gram(x);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(g, Eigen::EigenvaluesOnly);
  Vector ev = solver.eigenvalues().reverse();
  return ev.cwiseMax(0.0).cwiseSqrt();
}

SoftImputeResult soft_impute(const MaskedMatrix &m, const SoftImputeOptions &options) {
  if (!(options.lambda >= 0.0)) throw ConfigError("soft_impute: lambda must be >= 0");
  if (options.max_rank < 0) throw ConfigError("soft_impute: rank cap must be >= 1");
  if (!(options.tolerance > 0.0)) throw ConfigError("soft_impute: tolerance must be > 0");
  if (options.max_iters < 1) throw ConfigError("soft_impute: max_iters must be >= 1");

  const Index rank_cap =
      options.max_rank > 0 ? options.max_rank : std::min<Index>({m.rows(), m.cols(), Index{100}});

  if (options.path_steps < 0) throw ConfigError("soft_impute: path_steps must be >= 0");

  SoftImputeResult result;
  Matrix z = impute_mean(m);
  if (m.complete()) {
    result.completed = m.values();
    result.converged = true;
    return result;
  }

  std::vector<double> lambdas;
  if (options.path_steps > 0) {
    const Vector sv = singular_values(z);
    const double top = sv.size() > 0 ? sv(0) : 0.0;
    const double floor = std::max(options.lambda, top * 1e-12);
    for (int s = 0; s < options.path_steps && top > floor; ++s) {
      lambdas.push_back(top * std::pow(floor / top, static_cast<double>(s) / options.path_steps));
    }
  }
  lambdas.push_back(options.lambda);

  for (std::size_t stage = 0; stage < lambdas.size(); ++stage) {
    const double lambda = lambdas[stage];
    const bool last = stage + 1 == lambdas.size();
    result.converged = false;
    for (int it = 1; it <= options.max_iters; ++it) {
      const Matrix y = m.mask().select(m.values(), z);
      Svt step = soft_threshold(y, lambda, rank_cap);
      if (last) result.objective.push_back(0.5 * observed_residual(m, step.z) + lambda * step.nuclear);
      const double delta = (step.z - z).norm() / std::max(1.0, z.norm());
      z = std::move(step.z);
      ++result.iterations;
      result.final_rank = step.rank;
      if (delta <= options.tolerance) {
        result.converged = true;
        break;
      }
    }
  }
  result.completed = m.mask().select(m.values(), z);
  return result;
}

KnnImputer::KnnImputer(Index k) : k_(k) {
  if (k < 1) throw ConfigError("knn imputer: k must be >= 1");
}

std::vector<std::pair<std::string, std::string>> KnnImputer::settings() const {
  return {{"k", std::to_string(k_)}};
}

SoftImputer::SoftImputer(SoftImputeOptions options) : options_(options) {}

Imputation SoftImputer::run(const MaskedMatrix &m) const {
  SoftImputeResult r = soft_impute(m, options_);
  return {std::move(r.completed), r.iterations, r.converged};
}

std::vector<std::pair<std::string, std::string>> SoftImputer::settings() const {
  return {{"lambda", format_double(options_.lambda)},
          {"max_rank", options_.max_rank > 0 ? std::to_string(options_.max_rank) : std::string("auto")},
          {"tolerance", format_double(options_.tolerance)},
          {"max_iters", std::to_string(options_.max_iters)},
          {"path_steps", std::to_string(options_.path_steps)}};
}

std::unique_ptr<Imputer> make_imputer(const std::string &name, Index knn_k, const SoftImputeOptions &soft) {
  if (name == "mean") return std::make_unique<MeanImputer>();
  if (name == "knn") return std::make_unique<KnnImputer>(knn_k);
  if (name == "soft") return std::make_unique<SoftImputer>(soft);
  throw ConfigError("unknown imputer '" + name + "' (expected mean, knn or soft)");
}

} // namespace bpi
