#include <algorithm>
#include <random>

#include "doctest.h"
#include "errors.hpp"
#include "inner_problem.hpp"

using namespace drdoo;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector r(static_cast<Index>(v.size()));
  Index i = 0;
  for (double a : v) r[i++] = a;
  return r;
}

// Primal objective E_Q f + H(Q|P) / delta.
double primal_objective(const Vector& q, const Vector& p, const Vector& f, double delta) {
  double h = 0.0;
  for (Index i = 0; i < q.size(); ++i) h += 0.5 * (q[i] - p[i]) * (q[i] - p[i]) / p[i];
  return q.dot(f) + h / delta;
}

}  // namespace

TEST_CASE("constant rewards give P and the constant") {
  const auto d = modified_chi2();
  const Vector p = vec({0.2, 0.3, 0.5});
  for (double delta : {-2.0, -0.1, 0.1, 5.0}) {
    const auto s = dual_inner_value(Vector::Constant(3, 4.0), p, delta, d);
    CHECK(s.value == doctest::Approx(4.0));
    CHECK((s.q.weights() - p).norm() < 1e-12);
  }
}

TEST_CASE("small delta approaches the empirical mean") {
  const auto d = modified_chi2();
  const Vector f = vec({0, 1, 5}), p = Vector::Constant(3, 1.0 / 3);
  const auto s = dual_inner_value(f, p, 1e-7, d);
  CHECK(s.value == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(s.c == doctest::Approx(-2.0).epsilon(1e-6));
}

TEST_CASE("dual matches brute force on the three-point example") {
  const auto d = modified_chi2();
  const Vector f = vec({0, 1, 2}), p = Vector::Constant(3, 1.0 / 3);
  const auto dual = dual_inner_value(f, p, 0.1, d);
  const auto primal = primal_inner_brute_force(f, p, 0.1, d);
  CHECK(std::abs(dual.value - primal.value) <= 1e-8);
  CHECK(dual.value <= p.dot(f));
  const auto doo = dual_inner_value(f, p, -0.1, d);
  CHECK(doo.value >= p.dot(f));
  CHECK(std::abs(doo.value - primal_inner_brute_force(f, p, -0.1, d).value) <= 1e-8);
}

TEST_CASE("dual and brute force agree on random instances") {
  const auto d = modified_chi2();
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::exponential_distribution<double> e(1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 8;
    Vector f(n), p(n);
    for (int i = 0; i < n; ++i) {
      f[i] = u(gen);
      p[i] = 0.05 + e(gen);
    }
    p /= p.sum();
    const double delta = (trial % 2 ? 1.0 : -1.0) * std::exp(u(gen));
    const auto dual = dual_inner_value(f, p, delta, d);
    const auto primal = primal_inner_brute_force(f, p, delta, d);
    CHECK(std::abs(dual.value - primal.value) <= 1e-8);
    CHECK(dual.value == doctest::Approx(primal_objective(dual.q.weights(), p, f, delta)).epsilon(1e-10));
    if (delta > 0) CHECK(dual.value <= p.dot(f) + 1e-12);
    else CHECK(dual.value >= p.dot(f) - 1e-12);
  }
}

TEST_CASE("chi2 tilted distribution examples") {
  const auto t = tilted_distribution_chi2(vec({0.5, 0.5}), vec({0, 1}), 0.2);
  CHECK(t.q[0] == doctest::Approx(0.55));
  CHECK(t.q[1] == doctest::Approx(0.45));
  const auto d = modified_chi2();
  const auto dual = dual_inner_value(vec({0, 1}), vec({0.5, 0.5}), 0.2, d);
  CHECK((dual.q.weights() - t.q.weights()).norm() < 1e-12);
  CHECK(t.value == doctest::Approx(dual.value));

  const auto same = tilted_distribution_chi2(vec({0.25, 0.75}), vec({3, 1}), 0.0);
  CHECK(same.q.weights() == vec({0.25, 0.75}));

  const auto clip = tilted_distribution_chi2(vec({0.5, 0.5}), vec({0, 100}), 1.0);
  CHECK(clip.q[0] == doctest::Approx(1.0));
  CHECK(clip.q[1] == doctest::Approx(0.0));
  CHECK(clip.active_clip);
  const auto brute = primal_inner_brute_force(vec({0, 100}), vec({0.5, 0.5}), 1.0, d);
  CHECK(clip.value == doctest::Approx(brute.value).epsilon(1e-10));
}

TEST_CASE("sorted chi2 value agrees with the general solver") {
  const auto d = modified_chi2();
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 12;
    std::vector<double> f(n), w(n, 1.0 / n);
    for (auto& a : f) a = u(gen);
    std::sort(f.begin(), f.end());
    const double delta = (trial % 2 ? 1.0 : -1.0) * std::exp(u(gen) / 2);
    const auto fast = chi2_inner_sorted(f, w, delta);
    const auto slow = dual_inner_value(Eigen::Map<Vector>(f.data(), n), Eigen::Map<Vector>(w.data(), n), delta, d);
    CHECK(fast.value == doctest::Approx(slow.value).epsilon(1e-10));
  }
}

TEST_CASE("sensitivity distribution") {
  const auto d = modified_chi2();
  const Vector p = vec({0.5, 0.5}), f = vec({0, 2});
  CHECK(sensitivity_distribution(p, f, 0.0, d).weights() == p);
  CHECK((sensitivity_distribution(p, Vector::Constant(2, 1.0), 0.3, d).weights() - p).norm() < 1e-12);
  for (double eps : {1e-3, 1e-4}) {
    const double m = sensitivity_distribution(p, f, eps, d).weights().dot(f);
    CHECK((1.0 - m) / eps == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK_THROWS_AS(sensitivity_distribution(p, f, -1.0, d), InvalidArgument);
}

TEST_CASE("inner problem input validation") {
  const auto d = modified_chi2();
  CHECK_THROWS_AS(dual_inner_value(vec({1, 2}), vec({0.5, 0.5}), 0.0, d), InvalidArgument);
  CHECK_THROWS_AS(dual_inner_value(vec({1, 2}), vec({1.0}), 0.1, d), InvalidArgument);
}

TEST_CASE("simplex projection") {
  const Vector v = project_to_simplex(vec({0.9, 0.9, -3}));
  CHECK(v.sum() == doctest::Approx(1.0));
  CHECK(v[0] == doctest::Approx(0.5));
  CHECK(v[2] == 0.0);
  const Vector inside = vec({0.2, 0.3, 0.5});
  CHECK((project_to_simplex(inside) - inside).norm() < 1e-15);
}
