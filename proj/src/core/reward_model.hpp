#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sample.hpp"

namespace drdoo {

enum class Smoothness { smooth, piecewise_linear_scalar };

/// Reward f(x, y) for decision x and outcome y.
///
/// Smooth models are strictly concave and twice differentiable in x and must
/// implement gradient() and hessian(). Piecewise-linear scalar models are
/// concave in a scalar x, report the x-locations of their kinks, and return a
/// gradient only away from kinks.
class RewardModel {
 public:
  virtual ~RewardModel() = default;

  virtual std::string name() const = 0;
  virtual Index decision_dim() const noexcept = 0;
  virtual Smoothness smoothness() const noexcept = 0;
  virtual double evaluate(VectorRef x, VectorRef y) const = 0;
  virtual std::optional<Vector> gradient(VectorRef x, VectorRef y) const;
  virtual std::optional<Matrix> hessian(VectorRef x, VectorRef y) const;
  virtual std::vector<double> kinks(VectorRef y) const;

  bool is_smooth() const noexcept { return smoothness() == Smoothness::smooth; }
};

using RewardModelPtr = std::shared_ptr<const RewardModel>;

/// f(x, y) = -(a/2) ||x - y||^2 with a > 0; decision and outcome share dimension.
class QuadraticReward final : public RewardModel {
 public:
  explicit QuadraticReward(Index dim = 1, double curvature = 1.0);

  std::string name() const override { return "quadratic"; }
  Index decision_dim() const noexcept override { return dim_; }
  Smoothness smoothness() const noexcept override { return Smoothness::smooth; }
  double evaluate(VectorRef x, VectorRef y) const override;
  std::optional<Vector> gradient(VectorRef x, VectorRef y) const override;
  std::optional<Matrix> hessian(VectorRef x, VectorRef y) const override;

  double curvature() const noexcept { return curvature_; }

 private:
  Index dim_;
  double curvature_;
};

/// Scalar f(x, y) = x - exp(x - y). Strictly concave with a Hessian that
/// depends on x, so its Jensen term moves with the decision.
class ExponentialReward final : public RewardModel {
 public:
  std::string name() const override { return "exponential"; }
  Index decision_dim() const noexcept override { return 1; }
  Smoothness smoothness() const noexcept override { return Smoothness::smooth; }
  double evaluate(VectorRef x, VectorRef y) const override;
  std::optional<Vector> gradient(VectorRef x, VectorRef y) const override;
  std::optional<Matrix> hessian(VectorRef x, VectorRef y) const override;
};

/// Reward that does not depend on the outcome: f(x, y) = level - ||x||^2 / 2.
/// Every sample sees the same reward at any x, so all reweightings agree.
class ConstantReward final : public RewardModel {
 public:
  explicit ConstantReward(double level = 0.0, Index dim = 1);

  std::string name() const override { return "constant"; }
  Index decision_dim() const noexcept override { return dim_; }
  Smoothness smoothness() const noexcept override { return Smoothness::smooth; }
  double evaluate(VectorRef x, VectorRef y) const override;
  std::optional<Vector> gradient(VectorRef x, VectorRef y) const override;
  std::optional<Matrix> hessian(VectorRef x, VectorRef y) const override;

  double level() const noexcept { return level_; }

 private:
  double level_;
  Index dim_;
};

/// Selling price r, purchase cost c, shortage cost s, scrap value q.
struct InventoryParams {
  double r = 10.0;
  double c = 9.0;
  double s = 0.0;
  double q = 0.0;

  void validate() const;
  /// Newsvendor quantile level (r - c + s) / (r + s - q).
  double critical_ratio() const;
};

/// f(x, y) = r min{x, y} + q max{x - y, 0} - s max{y - x, 0} - c x.
class InventoryReward final : public RewardModel {
 public:
  explicit InventoryReward(InventoryParams params);

  std::string name() const override { return "inventory"; }
  Index decision_dim() const noexcept override { return 1; }
  Smoothness smoothness() const noexcept override { return Smoothness::piecewise_linear_scalar; }
  double evaluate(VectorRef x, VectorRef y) const override;
  std::optional<Vector> gradient(VectorRef x, VectorRef y) const override;
  std::vector<double> kinks(VectorRef y) const override;

  double value(double x, double y) const noexcept;
  const InventoryParams& params() const noexcept { return params_; }

 private:
  InventoryParams params_;
};

/// Weighted moments of the reward under a sample at a fixed decision.
struct RewardStatistics {
  double mean = 0.0;
  double variance = 0.0;
  std::optional<Vector> gradient_mean;
  std::optional<Matrix> hessian_mean;
  /// Cov[grad_x f, f], the weighted centred cross-moment.
  std::optional<Vector> cov_grad_reward;
};

/// Gradient-based entries are filled only when every point supplies them; a
/// nonsmooth model evaluated at a kink leaves them empty.
RewardStatistics reward_statistics(const RewardModel& model, const EmpiricalSample& sample, VectorRef x);

/// f(x, Y_i) for every sample point.
Vector reward_values(const RewardModel& model, const EmpiricalSample& sample, VectorRef x);

}  // namespace drdoo
