#include "fedchain/chain.hpp"

#include <cmath>

namespace fedchain {

SelectOutcome select_better(const Vector& x0, const Vector& x_half,
                            const FederatedProblem& problem, int s, int k,
                            const OracleConfig& oracle, std::uint64_t seed,
                            int round, OracleCounters* counters) {
  if (s < 1 || k < 1) {
    throw ConfigError("select_better: need S >= 1 and K >= 1");
  }
  const RngStream pick(seed, 0, static_cast<std::uint32_t>(round), 0,
                       Purpose::kSelection);
  const auto subset = sample_clients(problem.n(), s, pick);
  // One subset for both candidates; the per-sample noises are keyed by the
  // candidate tag (step field) and are independent between the two points.
  const double v0 =
      value_query(problem, subset, x0, k, oracle,
                  RngStream(seed, 0, static_cast<std::uint32_t>(round), 0,
                            Purpose::kValueNoise));
  const double v_half =
      value_query(problem, subset, x_half, k, oracle,
                  RngStream(seed, 0, static_cast<std::uint32_t>(round), 1,
                            Purpose::kValueNoise));
  if (counters != nullptr) {
    counters->value_calls += 2ll * s * k;
  }
  SelectOutcome out;
  out.picked_second = v_half <= v0;  // ties keep the newer point
  out.point = out.picked_second ? x_half : x0;
  return out;
}

ChainResult run_fedchain(const ChainConfig& cfg, const FederatedProblem& p,
                         const OracleConfig& oracle, std::uint64_t seed,
                         int s_clients, int k_samples,
                         RoundObserver* observer) {
  if (cfg.rounds_local < 0 || cfg.rounds_global < 0) {
    throw ConfigError("fedchain: negative phase length");
  }
  RunContext ctx;
  ctx.problem = &p;
  ctx.oracle = oracle;
  ctx.seed = seed;
  ctx.s_clients = s_clients;
  ctx.k_samples = k_samples;
  ctx.observer = observer;

  ChainResult res;
  const Vector& x0 = cfg.x0;
  Trace local_trace;
  {
    auto local = cfg.make_local(x0, 0, ctx);
    RunResult lr = run_optimizer(*local, cfg.rounds_local, ctx, "local");
    res.x_half = local->current();
    local_trace = std::move(lr.trace);
    for (auto& w : lr.warnings) res.warnings.push_back("local: " + w);
  }

  const SelectOutcome sel =
      select_better(x0, res.x_half, p, cfg.select_s, cfg.select_k, oracle,
                    seed, cfg.rounds_local, &ctx.counters);
  res.x_selected = sel.point;
  res.selected_local_output = sel.picked_second;
  res.boundary_round = cfg.rounds_local;

  auto global = cfg.make_global(sel.point, cfg.rounds_local, ctx);
  RunResult gr = run_optimizer(*global, cfg.rounds_global, ctx, "global");
  for (auto& w : gr.warnings) res.warnings.push_back("global: " + w);

  res.trace = std::move(local_trace);
  for (std::size_t i = 1; i < gr.trace.size(); ++i) {
    RoundRecord rec = gr.trace[i];
    rec.round += cfg.rounds_local;
    res.trace.push_back(std::move(rec));
  }
  res.x_final = gr.final_point;
  return res;
}

std::vector<double> partial_phase2_etas(double mu, double beta, int rounds) {
  std::vector<double> etas;
  const int r2 = rounds - 1;
  if (r2 <= 0) return etas;
  const double kappa = beta / mu;
  const int half = (r2 + 1) / 2;
  for (int r = 1; r <= r2; ++r) {
    if (rounds > 4.0 * beta / mu && r - 1 >= half) {
      etas.push_back(2.0 / (mu * (kappa + r - half)));
    } else {
      etas.push_back(1.0 / (4.0 * beta));
    }
  }
  return etas;
}

PartialResult run_partial_fedavg_sgd(const PartialChainConfig& cfg,
                                     const FederatedProblem& p,
                                     const OracleConfig& oracle,
                                     std::uint64_t seed,
                                     RoundObserver* observer) {
  if (oracle.sigma != 0.0) {
    throw ConfigError("partial fedavg->sgd: requires exact gradients");
  }
  const double beta = p.beta();
  if (!(cfg.eta1 > 0) || cfg.eta1 > cfg.mu / (8.0 * beta * beta) + 1e-15) {
    throw ConfigError("partial fedavg->sgd: eta1 must satisfy 0 < eta1 <= mu/(8 beta^2)");
  }
  if (cfg.k_local < 1) throw ConfigError("partial fedavg->sgd: K must be >= 1");
  if (cfg.rounds_total < 1) {
    throw ConfigError("partial fedavg->sgd: rounds must be >= 1");
  }

  PartialResult res;
  OracleCounters counters;

  // Phase 1: one uniformly chosen client, K local GD steps, weighted average
  // with w_k = (1 - eta1 mu / 4)^{-k}.
  const RngStream pick(seed, 0, 0, 0, Purpose::kClientSample);
  const int j = static_cast<int>(
      uniform_below(pick, 0, static_cast<std::uint32_t>(p.n())));
  res.chosen_client = j;

  const Vector x0 =
      cfg.x0.size() == p.dim() ? cfg.x0 : Vector::Zero(p.dim()).eval();
  Trace trace;
  if (observer != nullptr) observer->on_server_state(0, x0);
  trace.push_back(make_record(p, x0, 0, counters, "p1"));

  const double rho = 1.0 - cfg.eta1 * cfg.mu / 4.0;
  Vector xk = x0;
  Vector avg = x0;
  double u = 1.0;  // W_k / w_k
  for (int k = 1; k <= cfg.k_local; ++k) {
    const Vector g = p.client_grad(j, xk);
    if (observer != nullptr) observer->on_local_grad(j, 0, k - 1, g);
    counters.grad_calls += 1;
    xk = axpy(-cfg.eta1, g, xk);
    if (observer != nullptr) observer->on_local_iterate(j, 0, k, xk);
    if (k == 1) {
      avg = xk;
      u = 1.0;
    } else {
      u = u * rho + 1.0;
      avg += (xk - avg) / u;
    }
  }
  res.x_phase1 = avg;
  Vector x = avg;
  if (observer != nullptr) observer->on_server_state(1, x);
  trace.push_back(make_record(p, x, 1, counters, "p1"));

  // Phase 2: plain partial-participation SGD with exact gradients.
  std::vector<double> etas = cfg.eta2;
  if (etas.empty()) {
    etas = partial_phase2_etas(cfg.mu, beta, cfg.rounds_total);
  }
  if (static_cast<int>(etas.size()) < cfg.rounds_total - 1) {
    throw ConfigError("partial fedavg->sgd: phase-2 stepsize list too short");
  }
  for (int r = 1; r <= cfg.rounds_total - 1; ++r) {
    const auto subset = sample_clients(
        p.n(), cfg.s_phase2,
        RngStream(seed, 0, static_cast<std::uint32_t>(r), 0,
                  Purpose::kClientSample));
    Vector g = Vector::Zero(p.dim());
    for (int i : subset) {
      const Vector gi = p.client_grad(i, x);
      if (observer != nullptr) observer->on_local_grad(i, r, 0, gi);
      g += gi;
    }
    g /= static_cast<double>(subset.size());
    counters.grad_calls += static_cast<std::int64_t>(subset.size()) *
                           cfg.k_local;
    x = axpy(-etas[r - 1], g, x);
    if (observer != nullptr) observer->on_server_state(r + 1, x);
    trace.push_back(make_record(p, x, r + 1, counters, "p2"));
  }
  res.x_final = x;
  res.trace = std::move(trace);
  return res;
}

}  // namespace fedchain
