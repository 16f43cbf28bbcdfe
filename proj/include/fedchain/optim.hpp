#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fedchain/errors.hpp"
#include "fedchain/oracle.hpp"
#include "fedchain/problem.hpp"
#include "fedchain/record.hpp"

namespace fedchain {

// Receives every iterate and gradient an optimizer produces; used by the
// lower-bound audits.  All hooks are optional.
class RoundObserver {
 public:
  virtual ~RoundObserver() = default;
  // A point held by one client mid-round (local trajectories, momentum points).
  virtual void on_local_iterate(int /*client*/, int /*round*/, int /*step*/,
                                const Vector& /*x*/) {}
  // The exact gradient of client `client` evaluated during the round.
  virtual void on_local_grad(int /*client*/, int /*round*/, int /*step*/,
                             const Vector& /*grad*/) {}
  // A state broadcast by the server (round 0 reports the initial point).
  virtual void on_server_state(int /*round*/, const Vector& /*x*/) {}
};

struct RunContext {
  const FederatedProblem* problem = nullptr;
  OracleConfig oracle;
  std::uint64_t seed = 0;
  int s_clients = 1;  // S sampled per round
  int k_samples = 1;  // K oracle samples per query
  OracleCounters counters;
  RoundObserver* observer = nullptr;
};

// ---------------------------------------------------------------------------
// Per-method states and round steps.  Each *_round consumes one communication
// round: state in, state out, oracle cost charged to ctx.counters.

enum class Averaging { kNone, kWeighted };

struct SgdState {
  Vector x;
  double eta = 0;
  Averaging averaging = Averaging::kNone;
  double mu = 0;  // used by the weighted averaging scheme
  Vector avg;
  double w_ratio = 1.0;  // W_r / w_r
  int round = 0;
};

SgdState make_sgd_state(Vector x0, double eta, Averaging averaging, double mu);
void sgd_round(SgdState& st, RunContext& ctx);
Vector sgd_returned_point(const SgdState& st);

struct AsgState {
  Vector x;
  Vector x_ag;
  double mu = 0;
  double beta = 0;
  double delta0 = 0;  // initial suboptimality estimate for the stage schedule
  double c_var = 0;   // sigma^2/(SK) + (1 - (S-1)/(N-1)) zeta^2/S
  int stage = 1;
  int r_in_stage = 1;
  long long stage_rounds = 0;  // R_s
  double phi = 0;              // phi_s
  int round = 0;
};

AsgState make_asg_state(Vector x0, double mu, double beta, double delta0,
                        double c_var);
void asg_round(AsgState& st, RunContext& ctx);

struct FedAvgState {
  Vector x;
  double eta = 0;
  int k_budget = 1;  // K, a perfect square
  int tau = 1;       // sqrt(K) local steps of sqrt(K)-sample minibatches
  int round = 0;
};

FedAvgState make_fedavg_state(Vector x0, double eta, int k_budget);
void fedavg_round(FedAvgState& st, RunContext& ctx);

enum class SagaRefresh { kOptionI, kOptionII };

struct SagaState {
  Vector x;
  double eta = 0;
  SagaRefresh refresh = SagaRefresh::kOptionI;
  Averaging averaging = Averaging::kNone;
  double mu = 0;
  Vector avg;
  double w_ratio = 1.0;
  std::vector<Vector> control;  // c_i
  Vector control_mean;          // recomputed as the exact mean every round
  std::vector<Vector> anchor;   // phi_i
  int round = 0;
};

// Warm-starts all control variates at x0 (charges N*K gradient calls).
SagaState make_saga_state(Vector x0, double eta, SagaRefresh refresh,
                          Averaging averaging, double mu, RunContext& ctx,
                          int warm_round = 0);
void saga_round(SagaState& st, RunContext& ctx);
Vector saga_returned_point(const SagaState& st);

struct SsnmState {
  Vector x;
  double eta = 0;
  double tau = 0;
  double mu = 0;  // strong convexity of the prox term h(x) = mu/2 ||x||^2
  std::vector<Vector> anchor;   // phi_i
  std::vector<Vector> control;  // c_i
  Vector control_mean;
  int round = 0;
};

SsnmState make_ssnm_state(Vector x0, double eta, double tau, double mu,
                          RunContext& ctx);
void ssnm_round(SsnmState& st, RunContext& ctx);

// ---------------------------------------------------------------------------
// Stepsize presets from the methods' convergence analyses.  Degenerate
// results (0 or non-finite) raise ConfigError instead of being clamped.

double sgd_eta_strongly_convex(double mu, double beta, int rounds,
                               double dist_sq, double c_var);
double sgd_eta_pl(double mu, double beta, int rounds, double delta, double s,
                  double k, double sigma);
double fedavg_eta(double beta);
double saga_eta(double mu, double beta, int n, int s, int rounds, double d0,
                double sigma, int k);
struct SsnmParams {
  double eta;
  double tau;
};
SsnmParams ssnm_params(double mu, double beta, int n, int s);

// Noise-plus-client-sampling variance constant c used by the presets.
double update_variance_const(double sigma, double zeta, int n, int s, int k);

// ---------------------------------------------------------------------------
// Uniform driver interface used by the chain and the harness.

class OptimizerBase {
 public:
  virtual ~OptimizerBase() = default;
  virtual void step(RunContext& ctx) = 0;
  virtual const Vector& current() const = 0;
  virtual Vector returned() const { return current(); }
  virtual std::string phase() const { return "-"; }
};

std::unique_ptr<OptimizerBase> wrap_sgd(SgdState st);
std::unique_ptr<OptimizerBase> wrap_asg(AsgState st);
std::unique_ptr<OptimizerBase> wrap_fedavg(FedAvgState st);
std::unique_ptr<OptimizerBase> wrap_saga(SagaState st);
std::unique_ptr<OptimizerBase> wrap_ssnm(SsnmState st);

// Stepsize-halving multistage wrapper: stage s runs R_s = 2^s log(4)/(mu eta
// K_eff) rounds at eta_s = eta/2^{s-1}; K_eff is K for local methods and 1
// for global ones.  SAGA restarts re-warm-start the control variates.
enum class MultistageInner { kSgd, kFedAvg, kSaga };
enum class StageRule { kHalving, kSagaPl };

struct MultistageConfig {
  MultistageInner inner = MultistageInner::kSgd;
  double base_eta = 0;
  double mu = 0;
  int k = 1;  // local-work budget (FedAvg K; also oracle K)
  StageRule rule = StageRule::kHalving;
  Averaging averaging = Averaging::kNone;
  double beta = 0;  // required by the saga_pl rule
};

// Stage lengths R_s for s = 1.. under the config's rule.
long long multistage_stage_rounds(const MultistageConfig& cfg, int stage,
                                  int n, int s);
double multistage_stage_eta(const MultistageConfig& cfg, int stage);

class MultistageOptimizer : public OptimizerBase {
 public:
  MultistageOptimizer(MultistageConfig cfg, Vector x0, RunContext& ctx);
  void step(RunContext& ctx) override;
  const Vector& current() const override;
  Vector returned() const override;
  std::string phase() const override;
  int stage() const { return stage_; }
  bool truncated_first_stage(long long total_budget) const;

 private:
  void start_stage(RunContext& ctx);

  MultistageConfig cfg_;
  int stage_ = 1;
  long long done_in_stage_ = 0;
  long long stage_rounds_ = 0;
  std::optional<SgdState> sgd_;
  std::optional<FedAvgState> fedavg_;
  std::optional<SagaState> saga_;
  Vector x_;
};

// Runs `rounds` rounds, recording one row per round (round 0 included).
// Throws BlowupError when an iterate turns non-finite.
struct RunResult {
  Vector final_point;     // optimizer's returned point
  Trace trace;
  std::vector<std::string> warnings;
};

RunResult run_optimizer(OptimizerBase& opt, int rounds, RunContext& ctx,
                        const std::string& phase_label = "");

// Appends one record describing `x` (metric evaluation is free of oracle cost).
RoundRecord make_record(const FederatedProblem& p, const Vector& x, int round,
                        const OracleCounters& counters,
                        const std::string& phase);

}  // namespace fedchain
