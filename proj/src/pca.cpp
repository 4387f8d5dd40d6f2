#include "bpi/pca.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bpi {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

Index select_q(const Vector &eigenvalues, Index cap, const RetentionRule &rule, std::vector<std::string> &warnings) {
  return std::visit(
      overloaded{
          [&](const FixedDim &r) -> Index {
            if (r.q < 1) throw ConfigError("fixed retention dimension must be >= 1");
            if (r.q > cap) {
              warnings.push_back("requested q=" + std::to_string(r.q) + " clamped to " + std::to_string(cap));
              return cap;
            }
            return r.q;
          },
          [&](const VarianceTarget &r) -> Index {
            if (!(r.ratio > 0.0 && r.ratio <= 1.0)) {
              throw ConfigError("variance target must lie in (0, 1], got " + std::to_string(r.ratio));
            }
            if (r.ratio >= 1.0) return cap;
            const double total = eigenvalues.sum();
            double running = 0.0;
            for (Index q = 1; q <= cap; ++q) {
              running += eigenvalues(q - 1);
              if (running >= r.ratio * total) return q;
            }
            return cap;
          },
          [&](const KeepAll &) -> Index { return cap; },
      },
      rule);
}

} // namespace

std::string describe(const RetentionRule &rule) {
  return std::visit(overloaded{
                        [](const FixedDim &r) { return "fixed(" + std::to_string(r.q) + ")"; },
                        [](const VarianceTarget &r) {
                          std::ostringstream os;
                          os << "variance(" << r.ratio << ")";
                          return os.str();
                        },
                        [](const KeepAll &) { return std::string("keep-all"); },
                    },
                    rule);
}

PcaModel fit_pca(const Matrix &x, const RetentionRule &rule, const PcaOptions &options) {
  if (x.rows() < 2) throw InsufficientSamples("fit_pca: need at least 2 samples, got " + std::to_string(x.rows()));
  if (x.hasNaN()) throw DataError("fit_pca: input must be fully observed");
  const Index p = x.cols();

  PcaModel model;
  auto [centered, means] = center_columns(x);
  model.mean = std::move(means);
  model.scale = Vector::Ones(p);
  if (options.standardize) {
    for (Index c = 0; c < p; ++c) {
      const double sd = std::sqrt(centered.col(c).squaredNorm() / static_cast<double>(x.rows() - 1));
      if (sd > 0.0) model.scale(c) = sd;
    }
    centered = centered.array().rowwise() / model.scale.transpose().array();
  }

  Matrix s = covariance(centered);
  Spectrum spectrum = sym_eig(s, SpectrumKind::Covariance);
  model.eigenvalues = std::move(spectrum.eigenvalues);

  const Index cap = std::min(p, x.rows());
  if (model.eigenvalues.sum() <= 0.0) {
    model.warnings.push_back("zero-variance block: q forced to 1, explained variance defined as 1");
    model.q = 1;
    model.components = Matrix::Zero(p, 1);
    model.components(0, 0) = 1.0;
    return model;
  }
  model.q = select_q(model.eigenvalues, cap, rule, model.warnings);
  model.components = spectrum.eigenvectors.leftCols(model.q);
  return model;
}

Matrix transform(const PcaModel &model, const Matrix &x) {
  if (x.cols() != model.features()) {
    throw DimensionError("transform: expected " + std::to_string(model.features()) + " columns, got " +
                         std::to_string(x.cols()));
  }
  Matrix centered = (x.rowwise() - model.mean.transpose()).array().rowwise() / model.scale.transpose().array();
  return centered * model.components;
}

Matrix inverse_transform(const PcaModel &model, const Matrix &z) {
  if (z.cols() != model.q) {
    throw DimensionError("inverse_transform: expected " + std::to_string(model.q) + " columns, got " +
                         std::to_string(z.cols()));
  }
  Matrix back = z * model.components.transpose();
  back = back.array().rowwise() * model.scale.transpose().array();
  return back.rowwise() + model.mean.transpose();
}

double explained_variance(const Vector &eigenvalues, Index q) {
  if (q < 1 || q > eigenvalues.size()) {
    throw IndexError("explained_variance: q=" + std::to_string(q) + " outside [1, " +
                     std::to_string(eigenvalues.size()) + "]");
  }
  const double total = eigenvalues.sum();
  if (total <= 0.0) return 1.0;
  return std::clamp(eigenvalues.head(q).sum() / total, 0.0, 1.0);
}

double explained_variance(const PcaModel &model, Index q) { return explained_variance(model.eigenvalues, q); }

} // namespace bpi
