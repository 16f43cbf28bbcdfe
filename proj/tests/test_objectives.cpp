#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "fedchain/hard_instance.hpp"
#include "fedchain/problem.hpp"
#include "testutil.hpp"

using namespace fedchain;

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

}  // namespace

TEST_CASE("two-client toy geometry") {
  const auto p = make_two_client_toy();
  REQUIRE(p.xstar.has_value());
  CHECK((*p.xstar)[0] == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
  CHECK(p.grad(*p.xstar).norm() <= 1e-12);

  // opposite gradient signs near the optimum
  CHECK(p.client_grad(0, *p.xstar)[0] ==
        doctest::Approx(-4.0 / 3.0).epsilon(1e-12));
  CHECK(p.client_grad(1, *p.xstar)[0] ==
        doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  // agreement far from the optimum
  CHECK(p.client_grad(0, scalar(10.0))[0] > 0);
  CHECK(p.client_grad(1, scalar(10.0))[0] > 0);
}

TEST_CASE("hard instance gradients and optima") {
  const auto inst = make_hard_instance(1.0, 1.0, 0.1, 40);
  const Vector zero = Vector::Zero(40);

  const Vector g1 = inst.grad1(zero);
  CHECK(g1[0] == doctest::Approx(-1.0).epsilon(1e-15));
  for (int i = 1; i < 40; ++i) CHECK(g1[i] == 0.0);
  CHECK(inst.grad2(zero).norm() == 0.0);

  CHECK(inst.client1_optimum().squaredNorm() ==
        doctest::Approx(100.0).epsilon(1e-12));
  CHECK(inst.grad1(inst.client1_optimum()).norm() <= 1e-9);
  CHECK(inst.grad2(inst.client2_optimum()).norm() == 0.0);

  // global optimum from the closed form solves grad F = 0
  const auto p = make_hard_problem(inst);
  CHECK(p.grad(*p.xstar).norm() <= 1e-10);
  // C = 1 - q
  CHECK(inst.c_last == doctest::Approx(1.0 - inst.q).epsilon(1e-15));
}

TEST_CASE("hard instance lower-bound evaluator") {
  const auto inst = make_hard_instance(1.0, 1.0, 0.1, 64);
  // alpha = sqrt(21), q = (alpha-1)/(alpha+1)
  CHECK(inst.alpha == doctest::Approx(std::sqrt(21.0)).epsilon(1e-15));
  // frozen from an independent high-precision evaluation of the formula
  CHECK(hard_instance_lower_bound(inst, 0) ==
        doctest::Approx(0.03409654534937381).epsilon(1e-13));
  // ratio between consecutive rounds is exactly q^2
  const double b5 = hard_instance_lower_bound(inst, 5);
  const double b6 = hard_instance_lower_bound(inst, 6);
  CHECK(b6 / b5 == doctest::Approx(inst.q * inst.q).epsilon(1e-12));
  // geometric decay to zero
  CHECK(hard_instance_lower_bound(inst, 50) <
        hard_instance_lower_bound(inst, 10));

  // dimension condition enforced
  const auto small = make_hard_instance(1.0, 1.0, 0.1, 8);
  CHECK_THROWS_AS(hard_instance_lower_bound(small, 30), std::invalid_argument);
  // no strongly-convex evaluator at mu = 0
  const auto flat = make_hard_instance(1.0, 1.0, 0.0, 8);
  CHECK_THROWS_AS(hard_instance_lower_bound(flat, 2), std::invalid_argument);
  CHECK_THROWS_AS(make_hard_instance(1.0, 1.0, 0.1, 7), std::invalid_argument);
}

TEST_CASE("hard instance initial gap matches the formula exactly") {
  for (int d : {4, 10, 60}) {
    const auto inst = make_hard_instance(1.0, 1.0, 0.1, d);
    const auto p = make_hard_problem(inst);
    const double gap = p.value(Vector::Zero(d)) - p.value(*p.xstar);
    CHECK(gap == doctest::Approx(inst.initial_gap_bound()).epsilon(1e-12));
  }
}

TEST_CASE("hard instance curvature inside [mu, mu + 4 l2]") {
  const auto inst = make_hard_instance(1.0, 1.0, 0.1, 20);
  const auto p = make_hard_problem(inst);
  for (int t = 0; t < 50; ++t) {
    RngStream s(11, t, 0, 0, Purpose::kMisc);
    Vector v = gaussian(s, 20);
    v /= v.norm();
    // Rayleigh quotient of the average Hessian via exact gradients (linear map)
    const Vector hv = p.grad(v) - p.grad(Vector::Zero(20));
    const double rayleigh = v.dot(hv);
    CHECK(rayleigh >= inst.mu - 1e-12);
    CHECK(rayleigh <= inst.beta() + 1e-12);
  }
}

TEST_CASE("hard instance support structure") {
  const int d = 24;
  const auto inst = make_hard_instance(1.0, 1.0, 0.1, d);
  auto supp_leq = [&](const Vector& v, int hi) {
    for (int i = hi; i < d; ++i) {
      if (std::abs(v[i]) > 1e-12) return false;
    }
    return true;
  };
  for (int t = 0; t < 40; ++t) {
    RngStream s(17, t, 0, 0, Purpose::kMisc);
    // even prefix {1..2i}
    const int i = 1 + static_cast<int>(uniform_below(s, 0, d / 2 - 1));
    Vector x = Vector::Zero(d);
    for (int j = 0; j < 2 * i; ++j) x[j] = normal(s, j + 1);
    CHECK(supp_leq(inst.grad2(x), 2 * i));
    CHECK(supp_leq(inst.grad1(x), 2 * i + 1));
    // odd prefix {1..2i-1}
    Vector y = Vector::Zero(d);
    for (int j = 0; j < 2 * i - 1; ++j) y[j] = normal(s, 100 + j);
    CHECK(supp_leq(inst.grad1(y), 2 * i - 1));
    CHECK(supp_leq(inst.grad2(y), 2 * i));
  }
}

TEST_CASE("synthetic federation: exact zeta and zero-sum offsets") {
  const auto p = make_synthetic_federation(4, 10, 10.0, 0.7, 3);
  REQUIRE(p.zeta_exact.has_value());
  CHECK(*p.zeta_exact == 0.7);

  for (int t = 0; t < 10; ++t) {
    RngStream s(21, t, 0, 0, Purpose::kMisc);
    const Vector x = gaussian(s, 10);
    const Vector g = p.grad(x);
    double max_gap = 0.0;
    Vector sum_gap = Vector::Zero(10);
    for (int i = 0; i < 4; ++i) {
      const Vector gap = p.client_grad(i, x) - g;
      max_gap = std::max(max_gap, gap.norm());
      sum_gap += gap;
    }
    CHECK(max_gap == doctest::Approx(0.7).epsilon(1e-9));
    CHECK(sum_gap.norm() <= 1e-12);
  }

  // zeta_target = 0 gives identical clients
  const auto q = make_synthetic_federation(4, 10, 10.0, 0.0, 3);
  const Vector x = Vector::Ones(10);
  for (int i = 1; i < 4; ++i) {
    CHECK((q.client_grad(i, x) - q.client_grad(0, x)).norm() == 0.0);
  }

  // optima are consistent: grad_i(x_i*) = 0
  for (int i = 0; i < 4; ++i) {
    CHECK(p.client_grad(i, p.client_optima[i]).norm() <= 1e-9);
  }
  CHECK(p.grad(*p.xstar).norm() <= 1e-8);
}

TEST_CASE("shuffle federation: regularity and homogeneity ordering") {
  CHECK_THROWS_AS(make_shuffle_federation(5, 130.0, 10, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_shuffle_federation(6, 50.0, 10, 1),
                  std::invalid_argument);

  const auto p = make_shuffle_federation(5, 50.0, 40, 1);
  CHECK(p.n() == 5);
  for (int i = 0; i < 5; ++i) {
    CHECK(p.clients[i]->strong_convexity() == 0.1);
  }
  // logistic gradient vs finite differences
  CHECK(testutil::gradient_audit(*p.clients[0], 5, 1.0, 9) <= 1e-5);

  // higher homogeneity lowers measured heterogeneity, checked across 5 seeds
  int wins = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto lo = make_shuffle_federation(5, 0.0, 40, seed);
    const auto hi = make_shuffle_federation(5, 100.0, 40, seed);
    auto zeta_at = [](const FederatedProblem& prob) {
      double z = 0.0;
      for (int t = 0; t < 5; ++t) {
        RngStream s(33, t, 0, 0, Purpose::kMisc);
        const Vector x = 0.5 * gaussian(s, prob.dim());
        const Vector g = prob.grad(x);
        for (int i = 0; i < prob.n(); ++i) {
          z = std::max(z, (prob.client_grad(i, x) - g).norm());
        }
      }
      return z;
    };
    if (zeta_at(hi) < zeta_at(lo)) ++wins;
  }
  CHECK(wins == 5);
}

TEST_CASE("pl objective: grid-certified constants") {
  const auto f = make_pl_objective();
  CHECK(f->value(Vector::Zero(1)) == 0.0);
  CHECK(f->grad(Vector::Zero(1)).norm() == 0.0);
  CHECK(f->smoothness() == 8.0);

  const double mu = PlObjective::kPlMu;
  double worst_pl = -1e300;
  double worst_curv = -1e300;
  for (double x = -10.0; x <= 10.0; x += 1e-3) {
    const double v = x * x + 3.0 * std::sin(x) * std::sin(x);
    const double g = 2.0 * x + 3.0 * std::sin(2.0 * x);
    worst_pl = std::max(worst_pl, 2.0 * mu * v - g * g);
    worst_curv = std::max(worst_curv, 2.0 + 6.0 * std::cos(2.0 * x));
  }
  CHECK(worst_pl <= 0.0);      // 2 mu (f - f*) <= f'^2 on the grid
  CHECK(worst_curv <= 8.0);    // f'' = 2 + 6 cos 2x
}

TEST_CASE("smoothing wrapper") {
  const auto base = std::make_shared<QuadraticClient>(
      (Matrix(2, 2) << 2.0, 0.0, 0.0, 1.0).finished(),
      (Vector(2) << 2.0, 1.0).finished(), 0.0, 1.0, 2.0,
      (Vector(2) << 1.0, 1.0).finished());
  Vector anchor(2);
  anchor << 3.0, -2.0;
  const auto w = smooth(base, 0.5, anchor);

  CHECK(w->value(anchor) == doctest::Approx(base->value(anchor)).epsilon(1e-15));
  CHECK((w->grad(anchor) - base->grad(anchor)).norm() == 0.0);
  CHECK(w->strong_convexity() == doctest::Approx(1.5));
  CHECK(w->smoothness() == doctest::Approx(2.5));

  // ||anchor - x*_mu|| <= ||anchor - x*|| via closed-form solves
  const Matrix a = (Matrix(2, 2) << 2.0, 0.0, 0.0, 1.0).finished();
  const Vector b = (Vector(2) << 2.0, 1.0).finished();
  const Vector xstar = a.ldlt().solve(b);
  const Matrix a_mu = a + 0.5 * Matrix::Identity(2, 2);
  const Vector xstar_mu = a_mu.ldlt().solve(b + 0.5 * anchor);
  CHECK((anchor - xstar_mu).norm() <= (anchor - xstar).norm() + 1e-12);

  CHECK_THROWS_AS(smooth(base, -1.0, anchor), std::invalid_argument);
}

TEST_CASE("finite-difference audit across objective families") {
  const auto toy = make_two_client_toy();
  for (const auto& c : toy.clients) {
    CHECK(testutil::gradient_audit(*c, 20, 3.0, 100) <= 1e-5);
  }
  const auto syn = make_synthetic_federation(4, 8, 25.0, 0.5, 5);
  for (const auto& c : syn.clients) {
    CHECK(testutil::gradient_audit(*c, 20, 2.0, 101) <= 1e-5);
  }
  const auto hard = make_hard_problem(make_hard_instance(1.0, 1.0, 0.1, 12));
  for (const auto& c : hard.clients) {
    CHECK(testutil::gradient_audit(*c, 20, 2.0, 102) <= 1e-5);
  }
  CHECK(testutil::gradient_audit(*make_pl_objective(), 20, 5.0, 103) <= 1e-5);

  const auto sm = smooth(toy.clients[0], 0.3, Vector::Constant(1, 0.5));
  CHECK(testutil::gradient_audit(*sm, 20, 3.0, 104) <= 1e-5);
}

TEST_CASE("strongly convex clients vanish at their optima") {
  const auto syn = make_synthetic_federation(3, 6, 4.0, 0.3, 11);
  for (int i = 0; i < syn.n(); ++i) {
    const auto opt = syn.clients[i]->optimum();
    REQUIRE(opt.has_value());
    CHECK(syn.client_grad(i, *opt).norm() <= 1e-9);
  }
}
