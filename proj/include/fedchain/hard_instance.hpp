#pragma once

#include <cmath>
#include <memory>
#include <optional>

#include "fedchain/objective.hpp"
#include "fedchain/vec.hpp"

namespace fedchain {

// Two-client chained quadratic pair whose coordinate-unlocking structure
// forces the q^{2R} communication lower bound.
struct HardInstance {
  double l2 = 0;        // smoothness control
  double zeta_hat = 0;  // heterogeneity control
  double mu = 0;        // strong convexity (may be 0)
  int d = 0;            // even dimension
  double alpha = 0;     // sqrt(1 + 2 l2 / mu), defined when mu > 0
  double q = 0;         // (alpha - 1) / (alpha + 1)
  double c_last = 0;    // last-coordinate weight C = 1 - q

  double beta() const { return mu + 4.0 * l2; }

  // minimizer of F = (F1+F2)/2: x*_i = zeta_hat * q^i / (1 - q), 1-based i.
  Vector global_optimum() const;
  Vector client1_optimum() const;  // (l2 zeta_hat / mu) e_1
  Vector client2_optimum() const { return Vector::Zero(d); }

  double value1(const Vector& x) const;
  double value2(const Vector& x) const;
  Vector grad1(const Vector& x) const;
  Vector grad2(const Vector& x) const;

  // F(0) - F(x*) <= q l2 zeta_hat^2 / (4 (1 - q)).
  double initial_gap_bound() const;
};

HardInstance make_hard_instance(double l2, double zeta_hat, double mu, int d);

// The proof's R-dependent choice mu = l2 / (64 R^2).
double hard_mu_for_rounds(double l2, int rounds);

// Smallest even d satisfying d >= R + log 2 / (2 log(1/q)).
int hard_min_dim(const HardInstance& proto, int rounds);

// Analytic suboptimality floor after R communication rounds.
// Errors when mu == 0 or the dimension condition fails.
double hard_instance_lower_bound(const HardInstance& inst, int rounds);

class HardClient : public ClientObjective {
 public:
  HardClient(std::shared_ptr<const HardInstance> inst, int which)
      : inst_(std::move(inst)), which_(which) {}

  int dim() const override { return inst_->d; }
  double value(const Vector& x) const override {
    return which_ == 1 ? inst_->value1(x) : inst_->value2(x);
  }
  Vector grad(const Vector& x) const override {
    return which_ == 1 ? inst_->grad1(x) : inst_->grad2(x);
  }
  double smoothness() const override { return inst_->beta(); }
  double strong_convexity() const override { return inst_->mu; }
  ConvexityClass convexity_class() const override {
    return inst_->mu > 0 ? ConvexityClass::kStronglyConvex
                         : ConvexityClass::kConvex;
  }
  std::optional<Vector> optimum() const override {
    if (inst_->mu <= 0) return std::nullopt;
    return which_ == 1 ? inst_->client1_optimum() : inst_->client2_optimum();
  }

 private:
  std::shared_ptr<const HardInstance> inst_;
  int which_;
};

}  // namespace fedchain
