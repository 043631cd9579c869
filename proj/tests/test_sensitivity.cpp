#include <cmath>
#include <random>

#include "doctest.h"
#include "inner_problem.hpp"
#include "sensitivity.hpp"

using namespace drdoo;

namespace {

Vector v1(double a) { return Vector::Constant(1, a); }

EmpiricalSample scalar_sample(std::initializer_list<double> v) {
  const std::vector<double> s(v);
  return EmpiricalSample::scalar(s);
}

// Definitional limit: rate of decrease of the mean under Q(eps).
double definitional_sensitivity(const Vector& p, const Vector& f, double eps, const PhiDivergence& d) {
  return (p.dot(f) - sensitivity_distribution(p, f, eps, d).weights().dot(f)) / eps;
}

}  // namespace

TEST_CASE("sensitivity examples") {
  const auto d = modified_chi2();
  const auto r = worst_case_sensitivity(QuadraticReward(1, 4.0), scalar_sample({0, 1}), v1(0.0), d);
  CHECK(r.sensitivity == doctest::Approx(1.0));
  CHECK(worst_case_sensitivity(ConstantReward(2.0), scalar_sample({0, 1, 5}), v1(0.3), d).sensitivity <= 1e-20);
  const Vector p = Vector::Constant(2, 0.5), f = Eigen::Vector2d(0, 2);
  for (double eps : {1e-3, 1e-4}) CHECK(definitional_sensitivity(p, f, eps, d) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("sensitivity equals the definitional limit on random instances") {
  const auto d = modified_chi2();
  std::mt19937_64 gen(41);
  std::normal_distribution<double> nd;
  const QuadraticReward q;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 10;
    Matrix pts(1, n);
    for (int i = 0; i < n; ++i) pts(0, i) = nd(gen);
    const auto s = EmpiricalSample::uniform(pts);
    const Vector x = v1(nd(gen));
    const Vector f = reward_values(q, s, x);
    const double sens = worst_case_sensitivity(q, s, x, d).sensitivity;
    const double eps = 1e-6 / (1.0 + f.cwiseAbs().maxCoeff());
    CHECK(std::abs(definitional_sensitivity(s.weights(), f, eps, d) - sens) <= 10 * eps * (1.0 + sens));
  }
}

TEST_CASE("sensitivity scales with the square of the reward") {
  const auto d = modified_chi2();
  const auto s = scalar_sample({0.2, 1.0, -3.0, 4.0});
  const Vector x = v1(0.5);
  const double base = worst_case_sensitivity(QuadraticReward(1, 1.0), s, x, d).sensitivity;
  CHECK(worst_case_sensitivity(QuadraticReward(1, 3.0), s, x, d).sensitivity == doctest::Approx(9 * base));
}

TEST_CASE("sensitivity slope") {
  const auto d = modified_chi2();
  const QuadraticReward q;
  const auto s = scalar_sample({0, 0, 3});
  const auto b = bias_direction(q, s, v1(1.0), d);
  CHECK(sensitivity_slope(b) == doctest::Approx(-2.0));
  CHECK(sensitivity_slope(bias_direction(q, scalar_sample({-1, 1}), v1(0.0), d)) == 0.0);
  const double h = 1e-4;
  const double sp = worst_case_sensitivity(q, s, solve_dro_doo(q, s, h, d).x, d).sensitivity;
  const double sm = worst_case_sensitivity(q, s, solve_dro_doo(q, s, -h, d).x, d).sensitivity;
  CHECK((sp - sm) / (2 * h) == doctest::Approx(-2.0).epsilon(1e-2));
  CHECK(sm > worst_case_sensitivity(q, s, v1(1.0), d).sensitivity);
}

TEST_CASE("sensitivity slope against finite differences on smooth instances") {
  const auto d = modified_chi2();
  std::mt19937_64 gen(5);
  std::exponential_distribution<double> e(1.0);
  const QuadraticReward quad;
  const ExponentialReward expo;
  for (const RewardModel* m : {static_cast<const RewardModel*>(&quad), static_cast<const RewardModel*>(&expo)}) {
    for (int trial = 0; trial < 10; ++trial) {
      Matrix pts(1, 12);
      for (int i = 0; i < 12; ++i) pts(0, i) = e(gen) - 1.0;
      const auto s = EmpiricalSample::uniform(pts);
      const auto saa = solve_saa(*m, s);
      const double slope = sensitivity_slope(bias_direction(*m, s, saa.x, d));
      CHECK(slope < 0);
      const double h = 1e-4;
      const double fd = (worst_case_sensitivity(*m, s, solve_dro_doo(*m, s, h, d).x, d).sensitivity -
                         worst_case_sensitivity(*m, s, solve_dro_doo(*m, s, -h, d).x, d).sensitivity) /
                        (2 * h);
      CHECK(fd == doctest::Approx(slope).epsilon(1e-2));
    }
  }
}

TEST_CASE("frontier near zero") {
  const auto d = modified_chi2();
  const QuadraticReward q;
  const auto s = scalar_sample({0, 0, 3, 1});
  std::vector<double> grid{-1e-2, -1e-3, 0.0, 1e-3, 1e-2};
  const auto fr = frontier(q, s, solve_family(q, s, grid, d), d);
  REQUIRE(fr.size() == 5);
  CHECK(fr[2].sensitivity == doctest::Approx(worst_case_sensitivity(q, s, solve_saa(q, s).x, d).sensitivity));
  for (int k : {0, 1}) {
    const double dm = std::abs(fr[4 - k].mean_reward - fr[2].mean_reward);
    const double ds = std::abs(fr[4 - k].sensitivity - fr[2].sensitivity);
    CHECK(dm < ds);
  }
  // Mean changes quadratically, sensitivity linearly.
  const double ratio_mean = (fr[4].mean_reward - fr[2].mean_reward) / (fr[3].mean_reward - fr[2].mean_reward);
  const double ratio_sens = (fr[4].sensitivity - fr[2].sensitivity) / (fr[3].sensitivity - fr[2].sensitivity);
  CHECK(ratio_mean == doctest::Approx(100.0).epsilon(0.1));
  CHECK(ratio_sens == doctest::Approx(10.0).epsilon(0.05));

  const auto flat = frontier(ConstantReward(1.0), s, solve_family(ConstantReward(1.0), s, grid, d), d);
  for (const auto& p : flat) {
    CHECK(p.mean_reward == doctest::Approx(flat[0].mean_reward));
    CHECK(p.sensitivity <= 1e-20);
  }
}
