#include "fedchain/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fedchain {

namespace {

constexpr double kTiny = 1e-9;

RngStream stream_for(const RunContext& ctx, int client, int round, int step,
                     Purpose purpose) {
  return RngStream(ctx.seed, static_cast<std::uint32_t>(client),
                   static_cast<std::uint32_t>(round),
                   static_cast<std::uint32_t>(step), purpose);
}

// One noisy query of client i's gradient (average of K samples).
Vector noisy_grad(RunContext& ctx, int client, const Vector& x, int round,
                  int step, Purpose purpose, int k_samples) {
  const Vector g = grad_query(*ctx.problem, client, x, k_samples, ctx.oracle,
                              stream_for(ctx, client, round, step, purpose));
  ctx.counters.grad_calls += k_samples;
  if (ctx.observer != nullptr) {
    ctx.observer->on_local_grad(client, round, step,
                                ctx.problem->client_grad(client, x));
  }
  return g;
}

void weighted_avg_update(Vector& avg, double& w_ratio, const Vector& x,
                         double eta, double mu) {
  w_ratio = w_ratio * (1.0 - eta * mu) + 1.0;
  avg += (x - avg) / w_ratio;
}

}  // namespace

// --------------------------------------------------------------------- SGD

SgdState make_sgd_state(Vector x0, double eta, Averaging averaging, double mu) {
  if (!(eta > 0) || !std::isfinite(eta)) {
    throw ConfigError("sgd: stepsize must be positive and finite");
  }
  if (averaging == Averaging::kWeighted && eta * mu >= 1.0) {
    throw ConfigError("sgd: weighted averaging needs eta*mu < 1");
  }
  SgdState st;
  st.x = std::move(x0);
  st.eta = eta;
  st.averaging = averaging;
  st.mu = mu;
  st.avg = st.x;
  return st;
}

void sgd_round(SgdState& st, RunContext& ctx) {
  const auto subset =
      sample_clients(ctx.problem->n(), ctx.s_clients,
                     stream_for(ctx, 0, st.round, 0, Purpose::kClientSample));
  Vector g = Vector::Zero(st.x.size());
  for (int i : subset) {
    g += noisy_grad(ctx, i, st.x, st.round, 0, Purpose::kGradNoise,
                    ctx.k_samples);
  }
  g /= static_cast<double>(subset.size());
  st.x = axpy(-st.eta, g, st.x);
  ++st.round;
  if (st.averaging == Averaging::kWeighted) {
    weighted_avg_update(st.avg, st.w_ratio, st.x, st.eta, st.mu);
  }
  if (ctx.observer != nullptr) ctx.observer->on_server_state(st.round, st.x);
}

Vector sgd_returned_point(const SgdState& st) {
  return st.averaging == Averaging::kWeighted ? st.avg : st.x;
}

// --------------------------------------------------------------------- ASG

namespace {

long long asg_stage_rounds(double mu, double beta, double delta0, double c_var,
                           int stage) {
  const double base = 4.0 * std::sqrt(4.0 * beta / mu);
  double noise = 0.0;
  if (c_var > 0 && delta0 > 0) {
    noise = 128.0 * c_var / (3.0 * mu * delta0 * std::pow(2.0, -(stage + 1)));
  }
  return static_cast<long long>(std::ceil(std::max(base, noise)));
}

double asg_stage_phi(double mu, double beta, double delta0, double c_var,
                     int stage, long long rs) {
  double alt = 0.0;
  if (c_var > 0 && delta0 > 0) {
    const double denom = 3.0 * delta0 * std::pow(2.0, -(stage - 1)) *
                         static_cast<double>(rs) * (rs + 1.0) * (rs + 2.0);
    alt = std::sqrt(mu * c_var / denom);
  }
  return std::max(2.0 * beta, alt);
}

}  // namespace

AsgState make_asg_state(Vector x0, double mu, double beta, double delta0,
                        double c_var) {
  if (!(mu > 0)) {
    throw ConfigError(
        "asg: requires mu > 0; wrap general convex problems with smooth()");
  }
  AsgState st;
  st.x = std::move(x0);
  st.x_ag = st.x;
  st.mu = mu;
  st.beta = beta;
  st.delta0 = delta0;
  st.c_var = c_var;
  st.stage_rounds = asg_stage_rounds(mu, beta, delta0, c_var, 1);
  st.phi = asg_stage_phi(mu, beta, delta0, c_var, 1, st.stage_rounds);
  return st;
}

void asg_round(AsgState& st, RunContext& ctx) {
  if (st.r_in_stage > st.stage_rounds) {
    // Restart: next stage starts from the aggregate point.
    ++st.stage;
    st.x = st.x_ag;
    st.r_in_stage = 1;
    st.stage_rounds =
        asg_stage_rounds(st.mu, st.beta, st.delta0, st.c_var, st.stage);
    st.phi = asg_stage_phi(st.mu, st.beta, st.delta0, st.c_var, st.stage,
                           st.stage_rounds);
  }
  const int r = st.r_in_stage;
  const double alpha = 2.0 / (r + 1.0);
  const double gamma = 4.0 * st.phi / (static_cast<double>(r) * (r + 1.0));
  const double den = gamma + (1.0 - alpha * alpha) * st.mu;
  if (den == 0.0) throw ConfigError("asg: degenerate combination denominator");
  const Vector x_md = ((1.0 - alpha) * (st.mu + gamma) / den) * st.x_ag +
                      (alpha * ((1.0 - alpha) * st.mu + gamma) / den) * st.x;

  if (ctx.observer != nullptr) ctx.observer->on_server_state(st.round, x_md);
  const auto subset =
      sample_clients(ctx.problem->n(), ctx.s_clients,
                     stream_for(ctx, 0, st.round, 0, Purpose::kClientSample));
  Vector g = Vector::Zero(st.x.size());
  for (int i : subset) {
    g += noisy_grad(ctx, i, x_md, st.round, 0, Purpose::kGradNoise,
                    ctx.k_samples);
  }
  g /= static_cast<double>(subset.size());

  // Stationarity of the prox objective:
  //   x = [alpha mu x_md + ((1-alpha) mu + gamma) x_prev - alpha g]/(mu+gamma)
  st.x = (alpha * st.mu * x_md + ((1.0 - alpha) * st.mu + gamma) * st.x -
          alpha * g) /
         (st.mu + gamma);
  require_finite(st.x, "asg iterate");
  st.x_ag = alpha * st.x + (1.0 - alpha) * st.x_ag;
  ++st.r_in_stage;
  ++st.round;
  if (ctx.observer != nullptr) {
    ctx.observer->on_server_state(st.round, st.x);
    ctx.observer->on_server_state(st.round, st.x_ag);
  }
}

// ------------------------------------------------------------------ FedAvg

FedAvgState make_fedavg_state(Vector x0, double eta, int k_budget) {
  if (!(eta > 0) || !std::isfinite(eta)) {
    throw ConfigError("fedavg: stepsize must be positive and finite");
  }
  const int tau = static_cast<int>(std::lround(std::sqrt(double(k_budget))));
  if (k_budget < 1 || tau * tau != k_budget) {
    throw ConfigError("fedavg: K must be a perfect square");
  }
  FedAvgState st;
  st.x = std::move(x0);
  st.eta = eta;
  st.k_budget = k_budget;
  st.tau = tau;
  return st;
}

void fedavg_round(FedAvgState& st, RunContext& ctx) {
  const auto subset =
      sample_clients(ctx.problem->n(), ctx.s_clients,
                     stream_for(ctx, 0, st.round, 0, Purpose::kClientSample));
  // Each client runs tau local steps with tau-sample minibatches and reports
  // the summed step directions; the server applies their average, which under
  // this update equals averaging the client endpoints.
  Vector endpoint_sum = Vector::Zero(st.x.size());
  for (int i : subset) {
    Vector xi = st.x;
    for (int k = 0; k < st.tau; ++k) {
      const Vector g =
          noisy_grad(ctx, i, xi, st.round, k, Purpose::kGradNoise, st.tau);
      xi = axpy(-st.eta, g, xi);
      if (ctx.observer != nullptr) {
        ctx.observer->on_local_iterate(i, st.round, k + 1, xi);
      }
    }
    endpoint_sum += xi;
  }
  st.x = endpoint_sum / static_cast<double>(subset.size());
  ++st.round;
  if (ctx.observer != nullptr) ctx.observer->on_server_state(st.round, st.x);
}

// -------------------------------------------------------------------- SAGA

SagaState make_saga_state(Vector x0, double eta, SagaRefresh refresh,
                          Averaging averaging, double mu, RunContext& ctx,
                          int warm_round) {
  if (!(eta > 0) || !std::isfinite(eta)) {
    throw ConfigError("saga: stepsize must be positive and finite");
  }
  SagaState st;
  st.x = std::move(x0);
  st.eta = eta;
  st.refresh = refresh;
  st.averaging = averaging;
  st.mu = mu;
  st.avg = st.x;
  const int n = ctx.problem->n();
  st.control.reserve(n);
  for (int i = 0; i < n; ++i) {
    st.control.push_back(noisy_grad(ctx, i, st.x, warm_round, 0,
                                    Purpose::kWarmStart, ctx.k_samples));
    st.anchor.push_back(st.x);
  }
  st.control_mean = Vector::Zero(st.x.size());
  for (const auto& c : st.control) st.control_mean += c;
  st.control_mean /= static_cast<double>(n);
  return st;
}

void saga_round(SagaState& st, RunContext& ctx) {
  const int n = ctx.problem->n();
  const auto subset =
      sample_clients(n, ctx.s_clients,
                     stream_for(ctx, 0, st.round, 0, Purpose::kClientSample));
  std::vector<Vector> gi;
  gi.reserve(subset.size());
  Vector g = st.control_mean;
  for (std::size_t j = 0; j < subset.size(); ++j) {
    gi.push_back(noisy_grad(ctx, subset[j], st.x, st.round, 0,
                            Purpose::kGradNoise, ctx.k_samples));
    g += (gi.back() - st.control[subset[j]]) /
         static_cast<double>(subset.size());
  }
  const Vector x_prev = st.x;
  st.x = axpy(-st.eta, g, st.x);

  if (st.refresh == SagaRefresh::kOptionI) {
    for (std::size_t j = 0; j < subset.size(); ++j) {
      st.control[subset[j]] = gi[j];
      st.anchor[subset[j]] = x_prev;
    }
  } else {
    const auto fresh = sample_clients(
        n, ctx.s_clients,
        stream_for(ctx, 0, st.round, 0, Purpose::kRefreshSample));
    for (int i : fresh) {
      st.control[i] = noisy_grad(ctx, i, x_prev, st.round, 0,
                                 Purpose::kRefreshNoise, ctx.k_samples);
      st.anchor[i] = x_prev;
    }
  }
  st.control_mean = Vector::Zero(st.x.size());
  for (const auto& c : st.control) st.control_mean += c;
  st.control_mean /= static_cast<double>(n);

  ++st.round;
  if (st.averaging == Averaging::kWeighted) {
    weighted_avg_update(st.avg, st.w_ratio, st.x, st.eta, st.mu);
  }
  if (ctx.observer != nullptr) ctx.observer->on_server_state(st.round, st.x);
}

Vector saga_returned_point(const SagaState& st) {
  return st.averaging == Averaging::kWeighted ? st.avg : st.x;
}

// -------------------------------------------------------------------- SSNM

namespace {

// SSNM splits F_i = F~_i + h with h = mu/2 ||x||^2; oracle queries sample F~.
Vector noisy_tilde_grad(RunContext& ctx, int client, const Vector& x,
                        double mu, int round, int step, Purpose purpose) {
  Vector g = ctx.problem->client_grad(client, x) - mu * x;
  if (ctx.observer != nullptr) {
    ctx.observer->on_local_grad(client, round, step, g);
  }
  if (ctx.oracle.sigma > 0) {
    const int d = static_cast<int>(g.size());
    const double scale =
        ctx.oracle.sigma / std::sqrt(static_cast<double>(ctx.k_samples) * d);
    g += scale * gaussian(stream_for(ctx, client, round, step, purpose), d);
  }
  ctx.counters.grad_calls += ctx.k_samples;
  require_finite(g, "ssnm gradient");
  return g;
}

}  // namespace

SsnmState make_ssnm_state(Vector x0, double eta, double tau, double mu,
                          RunContext& ctx) {
  if (!(eta > 0) || !std::isfinite(eta)) {
    throw ConfigError("ssnm: stepsize must be positive and finite");
  }
  if (!(tau > 0.0 && tau < 1.0)) {
    throw ConfigError("ssnm: momentum tau must lie in (0, 1)");
  }
  if (!(mu > 0)) throw ConfigError("ssnm: requires mu > 0");
  SsnmState st;
  st.x = std::move(x0);
  st.eta = eta;
  st.tau = tau;
  st.mu = mu;
  const int n = ctx.problem->n();
  for (int i = 0; i < n; ++i) {
    st.anchor.push_back(st.x);
    st.control.push_back(
        noisy_tilde_grad(ctx, i, st.x, mu, 0, 0, Purpose::kWarmStart));
  }
  st.control_mean = Vector::Zero(st.x.size());
  for (const auto& c : st.control) st.control_mean += c;
  st.control_mean /= static_cast<double>(n);
  return st;
}

void ssnm_round(SsnmState& st, RunContext& ctx) {
  const int n = ctx.problem->n();
  const auto subset =
      sample_clients(n, ctx.s_clients,
                     stream_for(ctx, 0, st.round, 0, Purpose::kClientSample));
  Vector g = st.control_mean;
  for (int i : subset) {
    const Vector y = st.tau * st.x + (1.0 - st.tau) * st.anchor[i];
    if (ctx.observer != nullptr) {
      ctx.observer->on_local_iterate(i, st.round, 0, y);
    }
    const Vector gy =
        noisy_tilde_grad(ctx, i, y, st.mu, st.round, 0, Purpose::kGradNoise);
    g += (gy - st.control[i]) / static_cast<double>(subset.size());
  }
  // prox step: argmin h(x) + <g, x> + ||x_prev - x||^2 / (2 eta)
  st.x = (st.x - st.eta * g) / (1.0 + st.eta * st.mu);
  require_finite(st.x, "ssnm iterate");
  ++st.round;
  if (ctx.observer != nullptr) ctx.observer->on_server_state(st.round, st.x);

  // Independent second sample refreshes anchors and control variates.
  const auto fresh = sample_clients(
      n, ctx.s_clients,
      stream_for(ctx, 0, st.round - 1, 0, Purpose::kRefreshSample));
  for (int i : fresh) {
    st.anchor[i] = st.tau * st.x + (1.0 - st.tau) * st.anchor[i];
    if (ctx.observer != nullptr) {
      ctx.observer->on_local_iterate(i, st.round - 1, 1, st.anchor[i]);
    }
    st.control[i] = noisy_tilde_grad(ctx, i, st.anchor[i], st.mu, st.round - 1,
                                     1, Purpose::kRefreshNoise);
  }
  st.control_mean = Vector::Zero(st.x.size());
  for (const auto& c : st.control) st.control_mean += c;
  st.control_mean /= static_cast<double>(n);
}

// ----------------------------------------------------------------- presets

double update_variance_const(double sigma, double zeta, int n, int s, int k) {
  const double frac =
      n > 1 ? 1.0 - static_cast<double>(s - 1) / static_cast<double>(n - 1)
            : 0.0;
  return sigma * sigma / (static_cast<double>(s) * k) +
         frac * zeta * zeta / static_cast<double>(s);
}

namespace {

void check_eta(double eta, const char* who) {
  if (!(eta > 0) || !std::isfinite(eta)) {
    throw ConfigError(std::string(who) + ": degenerate stepsize preset");
  }
}

}  // namespace

double sgd_eta_strongly_convex(double mu, double beta, int rounds,
                               double dist_sq, double c_var) {
  if (!(mu > 0)) throw ConfigError("sgd preset: mu must be > 0");
  double eta = 1.0 / (2.0 * beta);
  if (c_var > 0) {
    const double arg = std::max(1.0, mu * mu * rounds * dist_sq / c_var);
    eta = std::min(eta, std::log(arg) / (mu * rounds));
  }
  check_eta(eta, "sgd preset");
  return eta;
}

double sgd_eta_pl(double mu, double beta, int rounds, double delta, double s,
                  double k, double sigma) {
  if (!(mu > 0)) throw ConfigError("sgd pl preset: mu must be > 0");
  double eta = 1.0 / beta;
  if (sigma > 0) {
    const double arg = std::max(
        std::exp(1.0), 2.0 * mu * mu * delta * s * k * rounds / (beta * sigma * sigma));
    eta = std::min(eta, std::log(arg) / (mu * rounds));
  }
  check_eta(eta, "sgd pl preset");
  return eta;
}

double fedavg_eta(double beta) {
  const double eta = 1.0 / (2.0 * beta);
  check_eta(eta, "fedavg preset");
  return eta;
}

double saga_eta(double mu, double beta, int n, int s, int rounds, double d0,
                double sigma, int k) {
  if (!(mu > 0)) throw ConfigError("saga preset: mu must be > 0");
  double eta = std::min(1.0 / (26.0 * beta),
                        static_cast<double>(s) / (9.0 * mu * n));
  const double c = 12.0 * sigma * sigma / (static_cast<double>(k) * s);
  if (c > 0) {
    const double arg = std::max(1.0, mu * mu * rounds * d0 / c);
    eta = std::min(eta, std::log(arg) / (mu * rounds));
  }
  check_eta(eta, "saga preset");
  return eta;
}

SsnmParams ssnm_params(double mu, double beta, int n, int s) {
  if (!(mu > 0)) throw ConfigError("ssnm preset: mu must be > 0");
  const double ratio = static_cast<double>(n) / s;
  const double kappa = beta / mu;
  double eta;
  if (ratio / kappa > 0.75) {
    eta = 1.0 / (2.0 * mu * ratio);
  } else {
    eta = std::sqrt(1.0 / (3.0 * mu * ratio * beta));
  }
  const double tau = ratio * eta * mu / (1.0 + eta * mu);
  check_eta(eta, "ssnm preset");
  if (!(tau > 0.0 && tau < 1.0)) {
    throw ConfigError("ssnm preset: tau out of (0,1)");
  }
  return {eta, tau};
}

// ---------------------------------------------------------------- wrappers

namespace {

template <typename State, void (*RoundFn)(State&, RunContext&),
          Vector (*ReturnFn)(const State&)>
class BasicOptimizer : public OptimizerBase {
 public:
  explicit BasicOptimizer(State st) : st_(std::move(st)) {}
  void step(RunContext& ctx) override { RoundFn(st_, ctx); }
  const Vector& current() const override { return st_.x; }
  Vector returned() const override { return ReturnFn(st_); }

 private:
  State st_;
};

Vector asg_return(const AsgState& st) { return st.x_ag; }
Vector fedavg_return(const FedAvgState& st) { return st.x; }
Vector ssnm_return(const SsnmState& st) { return st.x; }

}  // namespace

std::unique_ptr<OptimizerBase> wrap_sgd(SgdState st) {
  return std::make_unique<
      BasicOptimizer<SgdState, sgd_round, sgd_returned_point>>(std::move(st));
}
std::unique_ptr<OptimizerBase> wrap_asg(AsgState st) {
  return std::make_unique<BasicOptimizer<AsgState, asg_round, asg_return>>(
      std::move(st));
}
std::unique_ptr<OptimizerBase> wrap_fedavg(FedAvgState st) {
  return std::make_unique<
      BasicOptimizer<FedAvgState, fedavg_round, fedavg_return>>(std::move(st));
}
std::unique_ptr<OptimizerBase> wrap_saga(SagaState st) {
  return std::make_unique<
      BasicOptimizer<SagaState, saga_round, saga_returned_point>>(
      std::move(st));
}
std::unique_ptr<OptimizerBase> wrap_ssnm(SsnmState st) {
  return std::make_unique<BasicOptimizer<SsnmState, ssnm_round, ssnm_return>>(
      std::move(st));
}

// -------------------------------------------------------------- multistage

long long multistage_stage_rounds(const MultistageConfig& cfg, int stage,
                                  int n, int s) {
  if (cfg.rule == StageRule::kSagaPl) {
    const double kappa = cfg.beta / cfg.mu;
    return static_cast<long long>(std::ceil(
        24.0 * kappa * std::pow(static_cast<double>(n) / s, 2.0 / 3.0)));
  }
  const double k_eff = cfg.inner == MultistageInner::kFedAvg
                           ? static_cast<double>(cfg.k)
                           : 1.0;
  const double x =
      std::pow(2.0, stage) * std::log(4.0) / (cfg.mu * cfg.base_eta * k_eff);
  return static_cast<long long>(std::ceil(x - kTiny));
}

double multistage_stage_eta(const MultistageConfig& cfg, int stage) {
  if (cfg.rule == StageRule::kSagaPl) {
    return cfg.base_eta;  // fixed stepsize; stages only restart
  }
  return cfg.base_eta / std::pow(2.0, stage - 1);
}

MultistageOptimizer::MultistageOptimizer(MultistageConfig cfg, Vector x0,
                                         RunContext& ctx)
    : cfg_(std::move(cfg)), x_(std::move(x0)) {
  if (!(cfg_.mu > 0)) throw ConfigError("multistage: mu must be > 0");
  if (!(cfg_.base_eta > 0) || !std::isfinite(cfg_.base_eta)) {
    throw ConfigError("multistage: base stepsize must be positive and finite");
  }
  start_stage(ctx);
}

void MultistageOptimizer::start_stage(RunContext& ctx) {
  const double eta = multistage_stage_eta(cfg_, stage_);
  stage_rounds_ =
      multistage_stage_rounds(cfg_, stage_, ctx.problem->n(), ctx.s_clients);
  done_in_stage_ = 0;
  int round0 = 0;
  if (sgd_) round0 = sgd_->round;
  if (fedavg_) round0 = fedavg_->round;
  if (saga_) round0 = saga_->round;
  switch (cfg_.inner) {
    case MultistageInner::kSgd:
      sgd_ = make_sgd_state(x_, eta, cfg_.averaging, cfg_.mu);
      sgd_->round = round0;
      break;
    case MultistageInner::kFedAvg:
      fedavg_ = make_fedavg_state(x_, eta, cfg_.k);
      fedavg_->round = round0;
      break;
    case MultistageInner::kSaga: {
      // Restart policy: re-warm-start the control variates at the stage's
      // initial point.
      saga_ = make_saga_state(x_, eta,
                              cfg_.rule == StageRule::kSagaPl
                                  ? SagaRefresh::kOptionII
                                  : SagaRefresh::kOptionI,
                              cfg_.averaging, cfg_.mu, ctx, round0);
      saga_->round = round0;
      break;
    }
  }
}

void MultistageOptimizer::step(RunContext& ctx) {
  if (done_in_stage_ >= stage_rounds_) {
    ++stage_;
    start_stage(ctx);
  }
  switch (cfg_.inner) {
    case MultistageInner::kSgd:
      sgd_round(*sgd_, ctx);
      x_ = sgd_->x;
      break;
    case MultistageInner::kFedAvg:
      fedavg_round(*fedavg_, ctx);
      x_ = fedavg_->x;
      break;
    case MultistageInner::kSaga:
      saga_round(*saga_, ctx);
      x_ = saga_->x;
      break;
  }
  ++done_in_stage_;
}

const Vector& MultistageOptimizer::current() const { return x_; }

Vector MultistageOptimizer::returned() const {
  if (sgd_ && cfg_.averaging == Averaging::kWeighted) {
    return sgd_returned_point(*sgd_);
  }
  if (saga_ && cfg_.averaging == Averaging::kWeighted) {
    return saga_returned_point(*saga_);
  }
  return x_;
}

std::string MultistageOptimizer::phase() const {
  return "s" + std::to_string(stage_);
}

bool MultistageOptimizer::truncated_first_stage(long long total_budget) const {
  return total_budget < stage_rounds_ && stage_ == 1;
}

// ------------------------------------------------------------------ runner

RoundRecord make_record(const FederatedProblem& p, const Vector& x, int round,
                        const OracleCounters& counters,
                        const std::string& phase) {
  RoundRecord rec;
  rec.round = round;
  rec.grad_norm_sq = p.grad(x).squaredNorm();
  if (p.xstar) {
    rec.suboptimality = p.value(x) - p.value(*p.xstar);
    rec.dist_sq = (x - *p.xstar).squaredNorm();
  }
  rec.grad_oracle_calls = counters.grad_calls;
  rec.value_oracle_calls = counters.value_calls;
  rec.phase = phase;
  return rec;
}

RunResult run_optimizer(OptimizerBase& opt, int rounds, RunContext& ctx,
                        const std::string& phase_label) {
  RunResult res;
  const auto label = [&](const std::string& fallback) {
    return phase_label.empty() ? fallback : phase_label;
  };
  if (ctx.observer != nullptr) ctx.observer->on_server_state(0, opt.current());
  res.trace.push_back(make_record(*ctx.problem, opt.current(), 0, ctx.counters,
                                  label(opt.phase())));
  for (int r = 0; r < rounds; ++r) {
    try {
      opt.step(ctx);
    } catch (const NonFiniteError& e) {
      throw BlowupError(r + 1, e.what());
    }
    if (!opt.current().allFinite()) {
      throw BlowupError(r + 1, "non-finite iterate");
    }
    res.trace.push_back(make_record(*ctx.problem, opt.current(), r + 1,
                                    ctx.counters, label(opt.phase())));
  }
  if (auto* ms = dynamic_cast<MultistageOptimizer*>(&opt)) {
    if (ms->truncated_first_stage(rounds)) {
      res.warnings.push_back("multistage: budget ends inside the first stage");
    }
  }
  res.final_point = opt.returned();
  return res;
}

}  // namespace fedchain
