#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "fedchain/hard_instance.hpp"
#include "fedchain/objective.hpp"
#include "fedchain/rng.hpp"
#include "fedchain/vec.hpp"

namespace fedchain {

// N clients and their uniform average F = (1/N) sum F_i.
struct FederatedProblem {
  std::vector<ObjectivePtr> clients;
  std::optional<Vector> xstar;
  std::vector<Vector> client_optima;        // empty when unknown
  std::optional<double> delta_estimate;     // F(x0) - F(x*) for the run's x0
  std::optional<double> dist_sq_estimate;   // ||x0 - x*||^2
  std::optional<double> zeta_exact;         // shared-Hessian federations only
  std::optional<Vector> min_curvature_dir;  // unit dir of least curvature
  std::shared_ptr<const HardInstance> hard; // set for the hard-instance pair

  int n() const { return static_cast<int>(clients.size()); }
  int dim() const { return clients.empty() ? 0 : clients.front()->dim(); }

  double value(const Vector& x) const;
  Vector grad(const Vector& x) const;
  double mu() const;    // min over clients
  double beta() const;  // max over clients

  double client_value(int i, const Vector& x) const {
    return clients.at(i)->value(x);
  }
  Vector client_grad(int i, const Vector& x) const {
    return clients.at(i)->grad(x);
  }
};

// Fig-style 1-d pair F1(x) = (x-1)^2/2, F2(x) = (x+1)^2; optimum -1/3.
FederatedProblem make_two_client_toy();

// N quadratic clients sharing one Hessian (eigenvalues spanning [mu, kappa*mu])
// with per-client linear offsets delta_i, sum delta_i = 0, so the gradient gap
// is x-independent and zeta = max_i ||delta_i|| equals zeta_target exactly.
FederatedProblem make_synthetic_federation(int n_clients, int dim, double kappa,
                                           double zeta_target,
                                           std::uint64_t seed, double mu = 1.0);

// Synthetic analogue of the X%-homogeneous data shuffle: 10 unit-variance
// Gaussian blobs at scaled simplex vertices; each of the N=5 clients holds two
// dedicated classes plus an X% uniformly shuffled pool; the objective is
// l2-regularized binary logistic regression (even classes 0, odd classes 1).
FederatedProblem make_shuffle_federation(int n_clients, double homogeneity_pct,
                                         int samples_per_class,
                                         std::uint64_t seed);

// Wraps the hard pair as a 2-client problem.
FederatedProblem make_hard_problem(const HardInstance& inst);

// Adds (mu_reg/2)||x - anchor||^2 to every client.
FederatedProblem smooth_problem(const FederatedProblem& p, double mu_reg,
                                const Vector& anchor);

// l2-regularized logistic regression on a fixed design.
class LogisticClient : public ClientObjective {
 public:
  LogisticClient(Matrix x, Vector labels_pm1, double reg);

  int dim() const override { return static_cast<int>(x_.cols()); }
  double value(const Vector& w) const override;
  Vector grad(const Vector& w) const override;
  double smoothness() const override { return beta_; }
  double strong_convexity() const override { return reg_; }
  ConvexityClass convexity_class() const override {
    return ConvexityClass::kStronglyConvex;
  }

 private:
  Matrix x_;
  Vector y_;  // +/-1
  double reg_;
  double beta_;  // empirical Hessian-norm estimate
};

}  // namespace fedchain
