#include "reward_model.hpp"

#include <cmath>

#include "errors.hpp"

namespace drdoo {

std::optional<Vector> RewardModel::gradient(VectorRef, VectorRef) const { return std::nullopt; }
std::optional<Matrix> RewardModel::hessian(VectorRef, VectorRef) const { return std::nullopt; }
std::vector<double> RewardModel::kinks(VectorRef) const { return {}; }

namespace {

void check_dims(const RewardModel& m, VectorRef x) {
  if (x.size() != m.decision_dim())
    throw InvalidArgument(m.name() + ": decision has dimension " + std::to_string(x.size()) + ", expected " +
                          std::to_string(m.decision_dim()));
}

}  // namespace

QuadraticReward::QuadraticReward(Index dim, double curvature) : dim_(dim), curvature_(curvature) {
  if (dim <= 0) throw InvalidArgument("quadratic: dimension must be positive");
  if (!(curvature > 0.0)) throw InvalidArgument("quadratic: curvature must be positive");
}

double QuadraticReward::evaluate(VectorRef x, VectorRef y) const {
  check_dims(*this, x);
  if (y.size() != dim_) throw InvalidArgument("quadratic: outcome dimension mismatch");
  return -0.5 * curvature_ * (x - y).squaredNorm();
}

std::optional<Vector> QuadraticReward::gradient(VectorRef x, VectorRef y) const {
  check_dims(*this, x);
  return Vector(curvature_ * (y - x));
}

std::optional<Matrix> QuadraticReward::hessian(VectorRef x, VectorRef) const {
  check_dims(*this, x);
  return Matrix(-curvature_ * Matrix::Identity(dim_, dim_));
}

double ExponentialReward::evaluate(VectorRef x, VectorRef y) const {
  check_dims(*this, x);
  return x[0] - std::exp(x[0] - y[0]);
}

std::optional<Vector> ExponentialReward::gradient(VectorRef x, VectorRef y) const {
  check_dims(*this, x);
  return Vector::Constant(1, 1.0 - std::exp(x[0] - y[0]));
}

std::optional<Matrix> ExponentialReward::hessian(VectorRef x, VectorRef y) const {
  check_dims(*this, x);
  return Matrix::Constant(1, 1, -std::exp(x[0] - y[0]));
}

ConstantReward::ConstantReward(double level, Index dim) : level_(level), dim_(dim) {
  if (dim <= 0) throw InvalidArgument("constant: dimension must be positive");
}

double ConstantReward::evaluate(VectorRef x, VectorRef) const {
  check_dims(*this, x);
  return level_ - 0.5 * x.squaredNorm();
}

std::optional<Vector> ConstantReward::gradient(VectorRef x, VectorRef) const {
  check_dims(*this, x);
  return Vector(-x);
}

std::optional<Matrix> ConstantReward::hessian(VectorRef x, VectorRef) const {
  check_dims(*this, x);
  return Matrix(-Matrix::Identity(dim_, dim_));
}

void InventoryParams::validate() const {
  for (double v : {r, c, s, q}) {
    if (!std::isfinite(v)) throw InvalidArgument("inventory: parameters must be finite");
  }
  if (!(r > c) || c < 0.0) throw InvalidArgument("inventory: need r > c >= 0");
  if (r + s - q == 0.0) throw InvalidArgument("inventory: r + s - q must be nonzero");
  if (q > c) throw InvalidArgument("inventory: scrap value above cost makes the order unbounded");
}

double InventoryParams::critical_ratio() const { return (r - c + s) / (r + s - q); }

InventoryReward::InventoryReward(InventoryParams params) : params_(params) { params_.validate(); }

double InventoryReward::value(double x, double y) const noexcept {
  const auto& p = params_;
  if (x <= y) return (p.r - p.c) * x - p.s * (y - x);
  return p.r * y + p.q * (x - y) - p.c * x;
}

double InventoryReward::evaluate(VectorRef x, VectorRef y) const {
  check_dims(*this, x);
  return value(x[0], y[0]);
}

std::optional<Vector> InventoryReward::gradient(VectorRef x, VectorRef y) const {
  check_dims(*this, x);
  const auto& p = params_;
  if (x[0] < y[0]) return Vector::Constant(1, p.r - p.c + p.s);
  if (x[0] > y[0]) return Vector::Constant(1, p.q - p.c);
  return std::nullopt;
}

std::vector<double> InventoryReward::kinks(VectorRef y) const { return {y[0]}; }

Vector reward_values(const RewardModel& model, const EmpiricalSample& sample, VectorRef x) {
  Vector f(sample.size());
  for (Index i = 0; i < sample.size(); ++i) f[i] = model.evaluate(x, sample.point(i));
  return f;
}

RewardStatistics reward_statistics(const RewardModel& model, const EmpiricalSample& sample, VectorRef x) {
  const Vector& p = sample.weights();
  const Vector f = reward_values(model, sample, x);
  RewardStatistics st;
  st.mean = p.dot(f);
  const Vector centred = f.array() - st.mean;
  st.variance = p.dot(centred.cwiseProduct(centred));

  const Index d = model.decision_dim();
  Vector gmean = Vector::Zero(d);
  Vector cov = Vector::Zero(d);
  bool have_grad = true;
  for (Index i = 0; i < sample.size() && have_grad; ++i) {
    auto g = model.gradient(x, sample.point(i));
    if (!g) {
      have_grad = false;
      break;
    }
    gmean += p[i] * *g;
    cov += p[i] * centred[i] * *g;
  }
  if (have_grad) {
    st.gradient_mean = gmean;
    // sum_i p_i centred_i = 0, so the uncentred gradient gives the covariance.
    st.cov_grad_reward = cov;
  }
  if (model.is_smooth()) {
    Matrix h = Matrix::Zero(d, d);
    for (Index i = 0; i < sample.size(); ++i) h += p[i] * *model.hessian(x, sample.point(i));
    st.hessian_mean = h;
  }
  return st;
}

}  // namespace drdoo
