#include "sample.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "errors.hpp"

namespace drdoo {

EmpiricalSample::EmpiricalSample(Matrix points, Vector weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
  if (points_.cols() == 0) throw InvalidArgument("sample is empty");
  if (points_.rows() == 0) throw InvalidArgument("sample outcomes have dimension zero");
  if (weights_.size() != points_.cols()) throw InvalidArgument("sample weight count does not match point count");
  if (!points_.allFinite()) throw InvalidArgument("sample contains non-finite outcomes");
  for (Index i = 0; i < weights_.size(); ++i) {
    if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i]))
      throw InvalidArgument("sample weight " + std::to_string(i) + " must be positive");
  }
  const double total = weights_.sum();
  if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("sample weights do not sum to one");
  weights_ /= total;
}

EmpiricalSample EmpiricalSample::uniform(Matrix points) {
  const Index n = points.cols();
  if (n == 0) throw InvalidArgument("sample is empty");
  return EmpiricalSample(std::move(points), DiscreteDistribution::uniform(n).weights());
}

EmpiricalSample EmpiricalSample::scalar(std::span<const double> values) {
  Matrix points(1, static_cast<Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) points(0, static_cast<Index>(i)) = values[i];
  return uniform(std::move(points));
}

EmpiricalSample EmpiricalSample::resample(std::span<const Index> indices) const {
  Matrix out(outcome_dim(), static_cast<Index>(indices.size()));
  for (std::size_t j = 0; j < indices.size(); ++j) {
    const Index i = indices[j];
    if (i < 0 || i >= size()) throw InvalidArgument("resample index out of range");
    out.col(static_cast<Index>(j)) = points_.col(i);
  }
  return uniform(std::move(out));
}

}  // namespace drdoo
