#include "fedchain/hard_instance.hpp"

#include <cmath>
#include <stdexcept>

namespace fedchain {

HardInstance make_hard_instance(double l2, double zeta_hat, double mu, int d) {
  if (d < 4 || d % 2 != 0) {
    throw std::invalid_argument("hard instance: d must be even and >= 4");
  }
  if (l2 <= 0) throw std::invalid_argument("hard instance: l2 must be > 0");
  if (zeta_hat <= 0) {
    throw std::invalid_argument("hard instance: zeta_hat must be > 0");
  }
  if (mu < 0) throw std::invalid_argument("hard instance: mu must be >= 0");
  HardInstance inst;
  inst.l2 = l2;
  inst.zeta_hat = zeta_hat;
  inst.mu = mu;
  inst.d = d;
  if (mu > 0) {
    inst.alpha = std::sqrt(1.0 + 2.0 * l2 / mu);
    inst.q = (inst.alpha - 1.0) / (inst.alpha + 1.0);
    inst.c_last = 1.0 - inst.q;
  } else {
    inst.alpha = std::numeric_limits<double>::infinity();
    inst.q = 1.0;
    inst.c_last = 0.0;
  }
  return inst;
}

double hard_mu_for_rounds(double l2, int rounds) {
  if (rounds < 1) throw std::invalid_argument("hard mu: rounds must be >= 1");
  return l2 / (64.0 * rounds * rounds);
}

int hard_min_dim(const HardInstance& proto, int rounds) {
  if (proto.mu <= 0) {
    throw std::invalid_argument("hard_min_dim: requires mu > 0");
  }
  const double need = rounds + std::log(2.0) / (2.0 * std::log(1.0 / proto.q));
  int d = static_cast<int>(std::ceil(need));
  if (d % 2 != 0) ++d;
  return std::max(d, 4);
}

Vector HardInstance::global_optimum() const {
  if (mu <= 0) throw std::logic_error("hard optimum: undefined for mu = 0");
  Vector x(d);
  double qp = q;  // q^i
  for (int i = 0; i < d; ++i) {
    x[i] = zeta_hat * qp / (1.0 - q);
    qp *= q;
  }
  return x;
}

Vector HardInstance::client1_optimum() const {
  if (mu <= 0) throw std::logic_error("hard optimum: undefined for mu = 0");
  Vector x = Vector::Zero(d);
  x[0] = l2 * zeta_hat / mu;
  return x;
}

double HardInstance::value1(const Vector& x) const {
  double v = -l2 * zeta_hat * x[0] + 0.5 * c_last * l2 * x[d - 1] * x[d - 1];
  for (int i = 1; i <= d / 2 - 1; ++i) {
    // 1-based pair (2i, 2i+1)
    const double t = x[2 * i] - x[2 * i - 1];
    v += 0.5 * l2 * t * t;
  }
  return v + 0.5 * mu * x.squaredNorm();
}

double HardInstance::value2(const Vector& x) const {
  double v = 0.0;
  for (int i = 1; i <= d / 2; ++i) {
    // 1-based pair (2i-1, 2i)
    const double t = x[2 * i - 1] - x[2 * i - 2];
    v += 0.5 * l2 * t * t;
  }
  return v + 0.5 * mu * x.squaredNorm();
}

Vector HardInstance::grad1(const Vector& x) const {
  Vector g = mu * x;
  g[0] -= l2 * zeta_hat;
  g[d - 1] += c_last * l2 * x[d - 1];
  for (int i = 1; i <= d / 2 - 1; ++i) {
    const int a = 2 * i - 1, b = 2 * i;
    const double t = l2 * (x[b] - x[a]);
    g[b] += t;
    g[a] -= t;
  }
  return g;
}

Vector HardInstance::grad2(const Vector& x) const {
  Vector g = mu * x;
  for (int i = 1; i <= d / 2; ++i) {
    const int a = 2 * i - 2, b = 2 * i - 1;
    const double t = l2 * (x[b] - x[a]);
    g[b] += t;
    g[a] -= t;
  }
  return g;
}

double HardInstance::initial_gap_bound() const {
  if (mu <= 0) throw std::logic_error("initial gap bound: requires mu > 0");
  return q * l2 * zeta_hat * zeta_hat / (4.0 * (1.0 - q));
}

double hard_instance_lower_bound(const HardInstance& inst, int rounds) {
  if (inst.mu <= 0) {
    throw std::invalid_argument(
        "lower bound: requires mu > 0 (strongly convex evaluator)");
  }
  if (rounds < 0) throw std::invalid_argument("lower bound: rounds < 0");
  const double q = inst.q;
  const double need =
      rounds + std::log(2.0) / (2.0 * std::log(1.0 / q));
  if (inst.d < need) {
    throw std::invalid_argument(
        "lower bound: dimension condition violated; enlarge d to at least " +
        std::to_string(static_cast<int>(std::ceil(need))));
  }
  const double zh2 = inst.zeta_hat * inst.zeta_hat;
  const double base =
      zh2 * inst.mu * q * q / (16.0 * (1.0 - q) * (1.0 - q) * (1.0 - q * q));
  return base * std::pow(q, 2.0 * rounds);
}

}  // namespace fedchain
