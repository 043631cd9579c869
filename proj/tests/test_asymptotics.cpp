#include <Eigen/LU>
#include <cmath>

#include "asymptotics.hpp"
#include "doctest.h"
#include "errors.hpp"
#include "population.hpp"

using namespace drdoo;

namespace {

Vector v1(double a) { return Vector::Constant(1, a); }

EmpiricalSample scalar_sample(std::initializer_list<double> v) {
  const std::vector<double> s(v);
  return EmpiricalSample::scalar(s);
}

DiscretePopulation skewed_population() {
  return DiscretePopulation((Matrix(1, 3) << -1, 0, 2).finished(), Eigen::Vector3d(0.02, 0.88, 0.10));
}

// Central moments of the skewed population by direct summation.
double central_moment(int k) {
  const double y[] = {-1, 0, 2}, p[] = {0.02, 0.88, 0.10};
  double m = 0;
  for (int i = 0; i < 3; ++i) m += p[i] * y[i];
  double s = 0;
  for (int i = 0; i < 3; ++i) s += p[i] * std::pow(y[i] - m, k);
  return s;
}

}  // namespace

TEST_CASE("bias direction examples") {
  const auto d = modified_chi2();
  const QuadraticReward q;
  CHECK(bias_direction(q, scalar_sample({0, 0, 3}), v1(1.0), d).pi[0] == doctest::Approx(1.0));
  CHECK(bias_direction(q, scalar_sample({0, 0, 3}), v1(1.0), d).beta[0] == doctest::Approx(-1.0));
  CHECK(std::abs(bias_direction(q, scalar_sample({-1, 1}), v1(0.0), d).pi[0]) < 1e-15);
  CHECK(bias_direction(ConstantReward(4.0), scalar_sample({2, 7, 9}), v1(0.0), d).pi[0] == 0.0);
  CHECK_THROWS_AS(bias_direction(InventoryReward({10, 9, 0, 0}), scalar_sample({1, 2}), v1(1.5), d),
                  Unavailable);
}

TEST_CASE("bias direction is half the third central moment for the quadratic model") {
  const auto d = modified_chi2();
  const auto meas = *skewed_population().quadrature();
  const auto s = bias_direction(QuadraticReward(), meas, meas.mean(), d);
  CHECK(s.pi[0] == doctest::Approx(central_moment(3) / 2).epsilon(1e-12));
}

TEST_CASE("sandwich covariance at delta zero") {
  const auto d = modified_chi2();
  const QuadraticReward q;
  const GaussianPopulation g(v1(1.5), v1(2.0));
  const auto meas = *g.quadrature();
  const double c = -population_expected_reward(q, g, v1(1.5));
  const auto v = sandwich_covariance(q, meas, v1(1.5), c, 0.0, d);
  CHECK(v.xi(0, 0) == doctest::Approx(4.0).epsilon(1e-10));
  // eta(0) is the reward variance: Var[(Y - mu)^2 / 2] = sigma^4 / 2.
  CHECK(v.eta == doctest::Approx(8.0).epsilon(1e-10));
  CHECK(std::abs(v.kappa[0]) < 1e-10);
  CHECK((v.V - v.A.inverse() * v.B * v.A.inverse().transpose()).norm() < 1e-10);
}

TEST_CASE("kappa at zero equals phi'' times pi on skewed instances") {
  const auto d = modified_chi2();
  const QuadraticReward quad;
  const ExponentialReward expo;
  for (const RewardModel* m : {static_cast<const RewardModel*>(&quad), static_cast<const RewardModel*>(&expo)}) {
    const auto s = scalar_sample({0, 0, 3, 0.5, -0.2});
    const auto saa = solve_saa(*m, s);
    const auto v = sandwich_covariance(*m, s, saa.x, saa.c, 0.0, d);
    const auto b = bias_direction(*m, s, saa.x, d);
    CHECK(std::abs(v.kappa[0] - d.phi_double_prime_at_1 * b.pi[0]) <= 1e-8);
  }
}

TEST_CASE("rho for the quadratic model is minus the excess kurtosis") {
  const auto d = modified_chi2();
  const auto pop = skewed_population();
  const auto r = rho_estimate(QuadraticReward(), pop, d);
  const double sigma2 = central_moment(2);
  const double kappa4 = central_moment(4) - 3 * sigma2 * sigma2;
  CHECK(r.rho == doctest::Approx(-kappa4).epsilon(1e-6));
  CHECK(r.jensen_trace == doctest::Approx(-sigma2).epsilon(1e-10));
  CHECK(r.rho_decomposition == doctest::Approx(-kappa4).epsilon(1e-4));
}

TEST_CASE("rho of a Gaussian quadratic model and constant model vanish") {
  const auto d = modified_chi2();
  const auto g = rho_estimate(QuadraticReward(), GaussianPopulation(v1(0.3), v1(1.2)), d);
  CHECK(std::abs(g.rho) < 1e-6);
  const auto c = rho_estimate(ConstantReward(1.0), GaussianPopulation(v1(0.0), v1(1.0)), d);
  CHECK(std::abs(c.rho) < 1e-10);
  CHECK_THROWS_AS(optimal_delta(c.rho, c.summary, 30), Unavailable);
}

TEST_CASE("exponential model Jensen trace") {
  const auto d = modified_chi2();
  const double sd = 0.5;
  const auto r = rho_estimate(ExponentialReward(), GaussianPopulation(v1(0.0), v1(sd)), d);
  CHECK(r.x_star[0] == doctest::Approx(-sd * sd / 2).epsilon(1e-10));
  CHECK(r.jensen_trace == doctest::Approx(-(std::exp(sd * sd) - 1)).epsilon(1e-9));
  CHECK(r.jensen_trace < 0);
}

TEST_CASE("optimal delta formula") {
  const auto d = modified_chi2();
  const auto pop = skewed_population();
  const auto meas = *pop.quadrature();
  const auto s = bias_direction(QuadraticReward(), meas, meas.mean(), d);
  const double mu3 = central_moment(3), sigma2 = central_moment(2);
  const double kappa4 = central_moment(4) - 3 * sigma2 * sigma2;
  const auto od = optimal_delta(-kappa4, s, 30);
  CHECK(od.delta == doctest::Approx(-2 * kappa4 / (30 * mu3 * mu3)).epsilon(1e-12));
  CHECK(od.improvement == doctest::Approx(kappa4 * kappa4 / (2 * 900 * mu3 * mu3)).epsilon(1e-12));
  CHECK(optimal_delta(0.0, s, 30).delta == 0.0);
  CHECK(optimal_delta(0.7, s, 30).delta > 0);
  CHECK(optimal_delta(-0.7, s, 30).delta < 0);
}
