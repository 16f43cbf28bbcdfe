#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fedchain/optim.hpp"
#include "fedchain/problem.hpp"
#include "fedchain/record.hpp"

namespace fedchain {

struct HeterogeneityReport {
  std::optional<double> zeta_exact;  // closed form when available
  double zeta_hat = 0;               // empirical max gradient gap
  double zeta_f_hat = 0;             // empirical max |F_i - F|
  std::optional<double> zeta_star;   // sqrt((1/N) sum ||grad F_i(x*)||^2)
  std::string probe;
};

// Empirical heterogeneity over an explicit probe set.
HeterogeneityReport measure_heterogeneity_at(const FederatedProblem& p,
                                             const std::vector<Vector>& probes,
                                             const std::string& probe_desc);

// Closed form: exact for shared-Hessian federations; for the hard pair an
// upper bound over the ball ||x - x*||^2 <= ball_radius_sq.  Errors on other
// families.
HeterogeneityReport measure_heterogeneity_closed_form(
    const FederatedProblem& p, double ball_radius_sq = 0.0);

// n Gaussian probe points of the given radius centred on x* (or the origin).
std::vector<Vector> random_probe_points(const FederatedProblem& p, int n,
                                        double radius, std::uint64_t seed);

// Least-squares slope of ln(suboptimality) against round over [lo, hi].
// Errors when suboptimality is missing or nonpositive inside the window.
double fit_rate_slope(const Trace& trace, int lo, int hi);

// ---------------------------------------------------------------------------
// Lower-bound audits, fed by RoundObserver events during a run.

struct SupportViolation {
  int round = 0;
  int client = 0;
  int step = 0;
  int coord = 0;  // first offending coordinate
};

// Verifies the zero-respecting property: every reported iterate may only
// occupy coordinates already present in gradients the holder has seen (its
// own within the round, anyone's once the server has aggregated).
class SupportAuditor : public RoundObserver {
 public:
  explicit SupportAuditor(int dim, double threshold = 1e-12);

  void on_local_iterate(int client, int round, int step,
                        const Vector& x) override;
  void on_local_grad(int client, int round, int step,
                     const Vector& grad) override;
  void on_server_state(int round, const Vector& x) override;

  const std::vector<SupportViolation>& violations() const {
    return violations_;
  }
  // Coordinates unlocked so far (the information envelope).
  const std::vector<bool>& envelope() const { return global_; }
  int envelope_size() const;

 private:
  std::vector<int> support_of(const Vector& v, double threshold) const;
  void check(const Vector& x, const std::vector<bool>* extra, int round,
             int client, int step);

  int dim_;
  double threshold_;
  bool initialized_ = false;
  std::vector<bool> global_;
  std::map<int, std::vector<bool>> pending_;  // per-client within-round grads
  std::vector<SupportViolation> violations_;
};

// Tracks the distance-conserving constant: the smallest c such that every
// reported point satisfies
//   ||x - x*||^2 <= (c/2) [ ||x0 - x*||^2 + sum_i ||x0 - x_i*||^2 ].
class DistanceAuditor : public RoundObserver {
 public:
  explicit DistanceAuditor(const FederatedProblem& p);

  void on_local_iterate(int client, int round, int step,
                        const Vector& x) override;
  void on_server_state(int round, const Vector& x) override;

  double c_observed() const { return c_observed_; }

 private:
  void observe(const Vector& x);

  Vector xstar_;
  std::vector<Vector> client_optima_;
  bool have_x0_ = false;
  Vector x0_;
  double denom_ = 0;
  double c_observed_ = 0;
};

// Forwards events to several observers (audits are cheap; runs are not).
class MultiObserver : public RoundObserver {
 public:
  void add(RoundObserver* obs) { obs_.push_back(obs); }
  void on_local_iterate(int client, int round, int step,
                        const Vector& x) override {
    for (auto* o : obs_) o->on_local_iterate(client, round, step, x);
  }
  void on_local_grad(int client, int round, int step,
                     const Vector& g) override {
    for (auto* o : obs_) o->on_local_grad(client, round, step, g);
  }
  void on_server_state(int round, const Vector& x) override {
    for (auto* o : obs_) o->on_server_state(round, x);
  }

 private:
  std::vector<RoundObserver*> obs_;
};

}  // namespace fedchain
