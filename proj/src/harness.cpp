#include "fedchain/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "fedchain/csv.hpp"
#include "fedchain/sha256.hpp"

namespace fedchain {

namespace {

Vector scaled_offset_x0(const FederatedProblem& p, const Vector& dir,
                        double delta) {
  // x0 = x* + t * dir with F(x0) - F* = delta (quadratic-exact line search;
  // for non-quadratics this is only a target, refined by bisection).
  const Vector& xs = *p.xstar;
  double lo = 0.0, hi = 1.0;
  const double fstar = p.value(xs);
  auto gap = [&](double t) { return p.value(xs + t * dir) - fstar; };
  while (gap(hi) < delta) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (gap(mid) < delta ? lo : hi) = mid;
  }
  return xs + 0.5 * (lo + hi) * dir;
}

}  // namespace

BuiltProblem build_problem(const ProblemSpec& spec, int rounds_hint) {
  BuiltProblem bp;
  if (spec.family == "toy") {
    bp.problem = make_two_client_toy();
    bp.x0 = Vector::Zero(1);
  } else if (spec.family == "synthetic") {
    bp.problem = make_synthetic_federation(spec.clients, spec.dim, spec.kappa,
                                           spec.zeta, spec.seed, spec.mu);
    if (spec.x0_mode == "zero") {
      bp.x0 = Vector::Zero(spec.dim);
    } else if (spec.x0_mode == "random") {
      RngStream s(spec.seed, 3, 0, 0, Purpose::kProblemInit);
      Vector dir = gaussian(s, spec.dim);
      dir /= dir.norm();
      bp.x0 = scaled_offset_x0(bp.problem, dir, spec.delta);
    } else {  // slow | auto: offset along the least-curvature direction
      bp.x0 = scaled_offset_x0(bp.problem, *bp.problem.min_curvature_dir,
                               spec.delta);
    }
  } else if (spec.family == "shuffle") {
    bp.problem = make_shuffle_federation(spec.clients, spec.homogeneity,
                                         spec.samples_per_class, spec.seed);
    bp.x0 = Vector::Zero(bp.problem.dim());
  } else if (spec.family == "hard") {
    double mu = spec.hard_mu;
    if (mu <= 0) mu = hard_mu_for_rounds(spec.l2, std::max(1, rounds_hint));
    HardInstance proto = make_hard_instance(spec.l2, spec.zeta_hat, mu, 4);
    int d = spec.hard_dim;
    if (d <= 0) d = hard_min_dim(proto, std::max(1, rounds_hint));
    bp.problem = make_hard_problem(
        make_hard_instance(spec.l2, spec.zeta_hat, mu, d));
    bp.x0 = Vector::Zero(d);
  } else if (spec.family == "pl") {
    FederatedProblem p;
    p.clients.push_back(make_pl_objective());
    p.xstar = Vector::Zero(1).eval();
    p.client_optima = {Vector::Zero(1).eval()};
    bp.problem = std::move(p);
    bp.x0 = Vector::Constant(1, spec.x0_scalar);
  } else {
    throw ConfigError("problem.family: unknown family '" + spec.family + "'");
  }

  if (bp.problem.xstar) {
    const double fstar = bp.problem.value(*bp.problem.xstar);
    bp.problem.delta_estimate = bp.problem.value(bp.x0) - fstar;
    bp.problem.dist_sq_estimate = (bp.x0 - *bp.problem.xstar).squaredNorm();
  } else {
    // Loss families without a known optimum are nonnegative; F(x0) is a
    // serviceable upper estimate of the initial gap, and strong convexity
    // turns it into a distance estimate.
    const double delta = bp.problem.value(bp.x0);
    bp.problem.delta_estimate = delta;
    const double mu = bp.problem.mu();
    bp.problem.dist_sq_estimate = mu > 0 ? 2.0 * delta / mu : 1.0;
  }
  return bp;
}

// --------------------------------------------------------------- parsing

namespace {

OptimizerSpec parse_optimizer_block(const Config& cfg, const std::string& pre,
                                    int index) {
  OptimizerSpec spec;
  spec.method = cfg.require_string(pre + "method");
  spec.name = cfg.get_string(pre + "name",
                             spec.method + "_" + std::to_string(index));
  spec.rounds = static_cast<int>(cfg.get_int(pre + "rounds", 1));
  spec.s = static_cast<int>(cfg.get_int(pre + "s", 0));
  spec.k = static_cast<int>(cfg.get_int(pre + "k", 1));
  spec.eta = cfg.get_string(pre + "eta", "preset");
  spec.averaging = cfg.get_string(pre + "averaging", "auto");
  spec.saga_option = static_cast<int>(cfg.get_int(pre + "saga_option", 1));
  spec.stage_rule = cfg.get_string(pre + "stage_rule", "halving");
  spec.local_method = cfg.get_string(pre + "local.method", "fedavg");
  spec.local_eta = cfg.get_string(pre + "local.eta", "preset");
  spec.local_k = static_cast<int>(cfg.get_int(pre + "local.k", 0));
  spec.global_method = cfg.get_string(pre + "global.method", "sgd");
  spec.global_eta = cfg.get_string(pre + "global.eta", "preset");
  spec.split = cfg.get_double(pre + "split", 0.5);
  spec.select_s = static_cast<int>(cfg.get_int(pre + "select_s", 0));
  spec.select_k = static_cast<int>(cfg.get_int(pre + "select_k", 0));
  spec.switch_on_eta_over_k =
      cfg.get_bool(pre + "switch_on_eta_over_k", false);
  spec.eta1 = cfg.get_string(pre + "eta1", "preset");
  if (spec.rounds < 1) throw ConfigError(pre + "rounds: must be >= 1");
  return spec;
}

}  // namespace

ExperimentConfig parse_experiment(const Config& cfg) {
  ExperimentConfig exp;
  exp.config_text = cfg.text();

  exp.problem.family = cfg.get_string("problem.family", "synthetic");
  exp.problem.clients = static_cast<int>(cfg.get_int("problem.clients", 4));
  exp.problem.dim = static_cast<int>(cfg.get_int("problem.dim", 10));
  exp.problem.kappa = cfg.get_double("problem.kappa", 10.0);
  exp.problem.mu = cfg.get_double("problem.mu", 1.0);
  exp.problem.zeta = cfg.get_double("problem.zeta", 0.5);
  exp.problem.homogeneity = cfg.get_double("problem.homogeneity", 50.0);
  exp.problem.samples_per_class =
      static_cast<int>(cfg.get_int("problem.samples_per_class", 100));
  exp.problem.l2 = cfg.get_double("problem.l2", 1.0);
  exp.problem.zeta_hat = cfg.get_double("problem.zeta_hat", 1.0);
  exp.problem.hard_mu = cfg.get_double("problem.hard_mu", 0.0);
  exp.problem.hard_dim = static_cast<int>(cfg.get_int("problem.hard_dim", 0));
  exp.problem.seed =
      static_cast<std::uint64_t>(cfg.get_int("problem.seed", 1));
  exp.problem.x0_mode = cfg.get_string("problem.x0", "auto");
  exp.problem.delta = cfg.get_double("problem.delta", 1.0);
  exp.problem.x0_scalar = cfg.get_double("problem.x0_scalar", 3.0);

  exp.oracle.sigma = cfg.get_double("oracle.sigma", 0.0);
  exp.oracle.sigma_f = cfg.get_double("oracle.sigma_f", 0.0);

  for (int i = 1;; ++i) {
    const std::string pre = "optimizer." + std::to_string(i) + ".";
    if (cfg.keys_with_prefix(pre).empty()) break;
    exp.optimizers.push_back(parse_optimizer_block(cfg, pre, i));
  }
  if (exp.optimizers.empty()) {
    throw ConfigError("config declares no optimizer.N.method blocks");
  }

  exp.repeat = static_cast<int>(cfg.get_int("run.repeat", 1));
  exp.seed = static_cast<std::uint64_t>(cfg.get_int("run.seed", 1));
  exp.threads = static_cast<int>(cfg.get_int("run.threads", 1));
  exp.out_dir = cfg.get_string("out.dir", ".");
  if (exp.repeat < 1) throw ConfigError("run.repeat: must be >= 1");
  if (exp.threads < 1) throw ConfigError("run.threads: must be >= 1");

  const auto leftover = cfg.unconsumed();
  if (!leftover.empty()) {
    throw ConfigError("unknown field: " + *leftover.begin());
  }
  return exp;
}

// --------------------------------------------------- optimizer construction

namespace {

double resolve_zeta(const BuiltProblem& bp) {
  if (bp.problem.zeta_exact) return *bp.problem.zeta_exact;
  const auto pts = random_probe_points(bp.problem, 8, 1.0, 12345);
  return measure_heterogeneity_at(bp.problem, pts, "preset probe").zeta_hat;
}

double parse_eta_or(const std::string& text, double preset,
                    const std::string& what) {
  if (text == "preset") return preset;
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(what + ": expected 'preset' or a number, got '" + text +
                      "'");
  }
}

bool is_pl_problem(const FederatedProblem& p) {
  return p.clients.front()->convexity_class() == ConvexityClass::kPl;
}

}  // namespace

std::unique_ptr<OptimizerBase> build_optimizer(const OptimizerSpec& spec,
                                               const BuiltProblem& bp,
                                               const Vector& x0,
                                               int start_round,
                                               RunContext& ctx) {
  const FederatedProblem& p = bp.problem;
  const double mu = p.mu();
  const double beta = p.beta();
  const int n = p.n();
  const int s = ctx.s_clients;
  const int k = ctx.k_samples;
  const double d2 = p.dist_sq_estimate.value_or(1.0);
  const double delta = p.delta_estimate.value_or(1.0);

  if (spec.method == "sgd" || spec.method == "msgd") {
    double eta;
    Averaging avg = Averaging::kWeighted;
    if (is_pl_problem(p)) {
      eta = parse_eta_or(spec.eta,
                         spec.eta == "preset"
                             ? sgd_eta_pl(mu, beta, spec.rounds, delta, s, k,
                                          ctx.oracle.sigma)
                             : 0.0,
                         "sgd eta");
      avg = Averaging::kNone;
    } else {
      const double c_var = update_variance_const(ctx.oracle.sigma,
                                                 resolve_zeta(bp), n, s, k);
      eta = parse_eta_or(
          spec.eta,
          spec.eta == "preset"
              ? sgd_eta_strongly_convex(mu, beta, spec.rounds, d2, c_var)
              : 0.0,
          "sgd eta");
    }
    if (spec.averaging == "none") avg = Averaging::kNone;
    if (spec.averaging == "weighted") avg = Averaging::kWeighted;
    if (spec.method == "msgd") {
      MultistageConfig mc;
      mc.inner = MultistageInner::kSgd;
      mc.base_eta = eta;
      mc.mu = mu;
      mc.k = k;
      mc.averaging = avg;
      mc.beta = beta;
      auto opt = std::make_unique<MultistageOptimizer>(mc, x0, ctx);
      return opt;
    }
    SgdState st = make_sgd_state(x0, eta, avg, mu);
    st.round = start_round;
    return wrap_sgd(st);
  }

  if (spec.method == "fedavg" || spec.method == "mfedavg") {
    const double eta =
        parse_eta_or(spec.eta, fedavg_eta(beta), "fedavg eta");
    if (spec.method == "mfedavg") {
      MultistageConfig mc;
      mc.inner = MultistageInner::kFedAvg;
      mc.base_eta = eta;
      mc.mu = mu;
      mc.k = k;
      mc.beta = beta;
      return std::make_unique<MultistageOptimizer>(mc, x0, ctx);
    }
    FedAvgState st = make_fedavg_state(x0, eta, k);
    st.round = start_round;
    return wrap_fedavg(st);
  }

  if (spec.method == "asg" || spec.method == "masg") {
    // The accelerated method is natively multistage: stage lengths R_s and
    // per-stage phi_s come from its own schedule, so "masg" is an alias.
    const double c_var =
        update_variance_const(ctx.oracle.sigma, resolve_zeta(bp), n, s, k);
    AsgState st = make_asg_state(x0, mu, beta, delta, c_var);
    st.round = start_round;
    return wrap_asg(st);
  }

  if (spec.method == "saga" || spec.method == "msaga") {
    const double eta = parse_eta_or(
        spec.eta,
        spec.eta == "preset"
            ? saga_eta(mu, beta, n, s, spec.rounds, d2, ctx.oracle.sigma, k)
            : 0.0,
        "saga eta");
    Averaging avg = Averaging::kWeighted;
    if (spec.averaging == "none") avg = Averaging::kNone;
    if (spec.method == "msaga") {
      MultistageConfig mc;
      mc.inner = MultistageInner::kSaga;
      mc.base_eta = spec.stage_rule == "saga_pl"
                        ? 1.0 / (3.0 * beta *
                                 std::pow(static_cast<double>(n) / s, 2.0 / 3.0))
                        : eta;
      mc.mu = mu;
      mc.k = k;
      mc.rule = spec.stage_rule == "saga_pl" ? StageRule::kSagaPl
                                             : StageRule::kHalving;
      mc.averaging = avg;
      mc.beta = beta;
      return std::make_unique<MultistageOptimizer>(mc, x0, ctx);
    }
    SagaState st = make_saga_state(
        x0, eta,
        spec.saga_option == 2 ? SagaRefresh::kOptionII : SagaRefresh::kOptionI,
        avg, mu, ctx, start_round);
    st.round = start_round;
    return wrap_saga(st);
  }

  if (spec.method == "ssnm") {
    double eta, tau;
    if (spec.eta == "preset") {
      const SsnmParams pr = ssnm_params(mu, beta, n, s);
      eta = pr.eta;
      tau = pr.tau;
    } else {
      eta = parse_eta_or(spec.eta, 0.0, "ssnm eta");
      const double ratio = static_cast<double>(n) / s;
      tau = ratio * eta * mu / (1.0 + eta * mu);
    }
    SsnmState st = make_ssnm_state(x0, eta, tau, mu, ctx);
    st.round = start_round;
    return wrap_ssnm(st);
  }

  throw ConfigError("optimizer method '" + spec.method +
                    "' cannot be built directly");
}

// -------------------------------------------------------------- single run

namespace {

SingleRun finish_run(const FederatedProblem& p, Trace trace, Vector point,
                     OracleCounters counters,
                     std::vector<std::string> warnings) {
  SingleRun out;
  out.final_point = point;
  out.counters = counters;
  out.warnings = std::move(warnings);
  if (p.xstar) {
    out.final_subopt = p.value(point) - p.value(*p.xstar);
  }
  out.final_grad_norm_sq = p.grad(point).squaredNorm();
  // Slope over the positive-suboptimality prefix.
  int hi = -1;
  for (const auto& r : trace) {
    if (r.suboptimality && *r.suboptimality > 0) {
      hi = r.round;
    } else {
      break;
    }
  }
  if (hi >= 1) {
    try {
      out.slope = fit_rate_slope(trace, 0, hi);
    } catch (const std::exception&) {
    }
  }
  out.trace = std::move(trace);
  return out;
}

int chain_local_rounds(const OptimizerSpec& spec, const BuiltProblem& bp) {
  int r_local = static_cast<int>(std::lround(spec.split * spec.rounds));
  r_local = std::max(0, std::min(spec.rounds, r_local));
  if (spec.switch_on_eta_over_k && spec.local_method == "mfedavg") {
    // Heuristic switch: leave the local phase when its stepsize has decayed
    // to eta/K.  Stage s runs at eta/2^{s-1}, so the switch stage is the
    // first s with 2^{s-1} >= K.
    MultistageConfig mc;
    mc.inner = MultistageInner::kFedAvg;
    mc.base_eta = fedavg_eta(bp.problem.beta());
    mc.mu = bp.problem.mu();
    mc.k = spec.local_k > 0 ? spec.local_k : spec.k;
    long long rounds_until_switch = 0;
    for (int stage = 1; (1LL << (stage - 1)) < mc.k; ++stage) {
      rounds_until_switch +=
          multistage_stage_rounds(mc, stage, bp.problem.n(), 1);
    }
    if (rounds_until_switch >= 1 && rounds_until_switch < spec.rounds) {
      r_local = static_cast<int>(rounds_until_switch);
    }
  }
  return r_local;
}

}  // namespace

SingleRun run_single(const ExperimentConfig& exp, const OptimizerSpec& spec,
                     const BuiltProblem& bp, std::uint64_t run_seed,
                     RoundObserver* observer) {
  const FederatedProblem& p = bp.problem;
  const int s = spec.s > 0 ? spec.s : p.n();
  if (s > p.n()) throw ConfigError(spec.name + ": S exceeds client count");

  if (spec.method == "fedchain") {
    ChainConfig cc;
    cc.x0 = bp.x0;
    cc.rounds_local = chain_local_rounds(spec, bp);
    cc.rounds_global = spec.rounds - cc.rounds_local;
    cc.select_s = spec.select_s > 0 ? spec.select_s : s;
    const int local_k = spec.local_k > 0 ? spec.local_k : spec.k;
    cc.select_k = spec.select_k > 0 ? spec.select_k : local_k;
    OptimizerSpec local = spec;
    local.method = spec.local_method;
    local.eta = spec.local_eta;
    local.k = local_k;
    local.rounds = std::max(1, cc.rounds_local);
    OptimizerSpec global = spec;
    global.method = spec.global_method;
    global.eta = spec.global_eta;
    global.rounds = std::max(1, cc.rounds_global);
    cc.make_local = [&, local](Vector x0, int start_round, RunContext& ctx) {
      ctx.k_samples = local.k;
      return build_optimizer(local, bp, x0, start_round, ctx);
    };
    cc.make_global = [&, global](Vector x0, int start_round, RunContext& ctx) {
      ctx.k_samples = global.k;
      return build_optimizer(global, bp, x0, start_round, ctx);
    };
    ChainResult cr = run_fedchain(cc, p, exp.oracle, run_seed, s, spec.k,
                                  observer);
    OracleCounters counters;
    if (!cr.trace.empty()) {
      counters.grad_calls = cr.trace.back().grad_oracle_calls;
      counters.value_calls = cr.trace.back().value_oracle_calls;
    }
    return finish_run(p, std::move(cr.trace), cr.x_final, counters,
                      std::move(cr.warnings));
  }

  if (spec.method == "partial") {
    PartialChainConfig pc;
    pc.x0 = bp.x0;
    const double beta = p.beta();
    pc.mu = p.mu();
    pc.eta1 = spec.eta1 == "preset"
                  ? pc.mu / (8.0 * beta * beta)
                  : parse_eta_or(spec.eta1, 0.0, "partial eta1");
    pc.k_local = spec.k;
    pc.s_phase2 = s;
    pc.rounds_total = spec.rounds;
    PartialResult pr =
        run_partial_fedavg_sgd(pc, p, exp.oracle, run_seed, observer);
    OracleCounters counters;
    if (!pr.trace.empty()) {
      counters.grad_calls = pr.trace.back().grad_oracle_calls;
      counters.value_calls = pr.trace.back().value_oracle_calls;
    }
    return finish_run(p, std::move(pr.trace), pr.x_final, counters, {});
  }

  RunContext ctx;
  ctx.problem = &p;
  ctx.oracle = exp.oracle;
  ctx.seed = run_seed;
  ctx.s_clients = s;
  ctx.k_samples = spec.k;
  ctx.observer = observer;
  auto opt = build_optimizer(spec, bp, bp.x0, 0, ctx);
  RunResult rr = run_optimizer(*opt, spec.rounds, ctx);
  return finish_run(p, std::move(rr.trace), rr.final_point, ctx.counters,
                    std::move(rr.warnings));
}

// ------------------------------------------------------------------- run

namespace {

struct JobResult {
  std::string csv;
  std::string label;
  std::uint64_t run_seed = 0;
  std::optional<double> final_subopt;
  double final_grad_norm_sq = 0;
  std::optional<double> slope;
  OracleCounters counters;
};

std::vector<JobResult> run_all(const ExperimentConfig& exp) {
  const std::string sha = sha256_hex(exp.config_text);
  struct Job {
    int spec_idx;
    int rep;
  };
  std::vector<Job> jobs;
  for (int i = 0; i < static_cast<int>(exp.optimizers.size()); ++i) {
    for (int r = 0; r < exp.repeat; ++r) jobs.push_back({i, r});
  }
  std::vector<JobResult> results(jobs.size());

  // The problem instance is immutable; build once and share across workers.
  int rounds_hint = 0;
  for (const auto& o : exp.optimizers) rounds_hint = std::max(rounds_hint, o.rounds);
  const BuiltProblem bp = build_problem(exp.problem, rounds_hint);

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;
  auto worker = [&]() {
    for (;;) {
      const std::size_t j = next.fetch_add(1);
      if (j >= jobs.size()) return;
      try {
        const auto& spec = exp.optimizers[jobs[j].spec_idx];
        const std::uint64_t run_seed = exp.seed + jobs[j].rep;
        SingleRun sr = run_single(exp, spec, bp, run_seed);
        JobResult out;
        out.label = spec.name;
        out.run_seed = run_seed;
        out.final_subopt = sr.final_subopt;
        out.final_grad_norm_sq = sr.final_grad_norm_sq;
        out.slope = sr.slope;
        out.counters = sr.counters;
        std::string comment = "config_sha256=" + sha + "\noptimizer=" +
                              spec.name + "\nseed=" +
                              std::to_string(run_seed);
        for (const auto& w : sr.warnings) comment += "\nwarning: " + w;
        out.csv = trace_to_csv(sr.trace, comment);
        results[j] = std::move(out);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  const int nthreads =
      std::max(1, std::min<int>(exp.threads, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

void cli_run(const ExperimentConfig& exp, std::ostream& log) {
  namespace fs = std::filesystem;
  fs::create_directories(exp.out_dir);
  const auto results = run_all(exp);
  const std::string sha = sha256_hex(exp.config_text);

  for (const auto& r : results) {
    const std::string path = exp.out_dir + "/" + r.label + "_seed" +
                             std::to_string(r.run_seed) + ".csv";
    std::ofstream out(path, std::ios::binary);
    out << r.csv;
    log << "wrote " << path << "\n";
  }

  std::ostringstream sum;
  sum << "# config_sha256=" << sha << "\n";
  sum << "optimizer,seed,final_suboptimality,final_grad_norm_sq,slope,"
         "grad_calls,value_calls\n";
  auto emit_row = [&sum](const std::string& label, const std::string& seed,
                         const std::optional<double>& subopt, double gnorm,
                         const std::optional<double>& slope,
                         std::int64_t gc, std::int64_t vc) {
    sum << label << ',' << seed << ',';
    if (subopt) sum << format_sig12(*subopt);
    sum << ',' << format_sig12(gnorm) << ',';
    if (slope) sum << format_sig12(*slope);
    sum << ',' << gc << ',' << vc << "\n";
  };
  for (const auto& spec : exp.optimizers) {
    std::vector<double> finals, slopes, gnorms;
    std::int64_t gc = 0, vc = 0;
    for (const auto& r : results) {
      if (r.label != spec.name) continue;
      emit_row(r.label, std::to_string(r.run_seed), r.final_subopt,
               r.final_grad_norm_sq, r.slope, r.counters.grad_calls,
               r.counters.value_calls);
      if (r.final_subopt) finals.push_back(*r.final_subopt);
      if (r.slope) slopes.push_back(*r.slope);
      gnorms.push_back(r.final_grad_norm_sq);
      gc = std::max(gc, r.counters.grad_calls);
      vc = std::max(vc, r.counters.value_calls);
    }
    emit_row(spec.name, "median",
             finals.empty() ? std::nullopt
                            : std::optional<double>(median_of(finals)),
             median_of(gnorms),
             slopes.empty() ? std::nullopt
                            : std::optional<double>(median_of(slopes)),
             gc, vc);
  }
  const std::string path = exp.out_dir + "/summary.csv";
  std::ofstream out(path, std::ios::binary);
  out << sum.str();
  log << "wrote " << path << "\n";
}

void cli_compare(const ExperimentConfig& exp, std::ostream& out) {
  if (exp.optimizers.size() < 2) {
    throw ConfigError("compare: need at least 2 optimizer specs");
  }
  namespace fs = std::filesystem;
  fs::create_directories(exp.out_dir);
  const auto results = run_all(exp);

  struct Row {
    std::string label;
    double median_final = std::numeric_limits<double>::quiet_NaN();
    std::optional<double> median_slope;
    std::int64_t grad_calls = 0;
    std::int64_t value_calls = 0;
    int index = 0;
  };
  std::vector<Row> rows;
  for (int i = 0; i < static_cast<int>(exp.optimizers.size()); ++i) {
    const auto& spec = exp.optimizers[i];
    Row row;
    row.label = spec.name;
    row.index = i;
    std::vector<double> finals, slopes;
    for (const auto& r : results) {
      if (r.label != spec.name) continue;
      if (r.final_subopt) finals.push_back(*r.final_subopt);
      if (r.slope) slopes.push_back(*r.slope);
      row.grad_calls = std::max(row.grad_calls, r.counters.grad_calls);
      row.value_calls = std::max(row.value_calls, r.counters.value_calls);
    }
    if (!finals.empty()) row.median_final = median_of(finals);
    if (!slopes.empty()) row.median_slope = median_of(slopes);
    rows.push_back(row);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    const bool an = std::isnan(a.median_final), bn = std::isnan(b.median_final);
    if (an != bn) return bn;  // ranked entries first
    if (an && bn) return a.index < b.index;
    if (a.median_final != b.median_final) return a.median_final < b.median_final;
    return a.index < b.index;
  });

  std::ostringstream table;
  table << "rank,optimizer,median_final_suboptimality,median_slope,"
           "grad_calls,value_calls\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    table << (i + 1) << ',' << rows[i].label << ',';
    if (!std::isnan(rows[i].median_final)) {
      table << format_sig12(rows[i].median_final);
    }
    table << ',';
    if (rows[i].median_slope) table << format_sig12(*rows[i].median_slope);
    table << ',' << rows[i].grad_calls << ',' << rows[i].value_calls << "\n";
  }
  out << table.str();
  std::ofstream f(exp.out_dir + "/compare.csv", std::ios::binary);
  f << "# config_sha256=" << sha256_hex(exp.config_text) << "\n" << table.str();
}

// ------------------------------------------------------------- lowerbound

LowerBoundReport run_lowerbound(double l2, double zeta_hat, double mu,
                                int rounds, const OptimizerSpec& method,
                                bool wild_guess, std::ostream& out) {
  LowerBoundReport rep;
  rep.mu = mu > 0 ? mu : hard_mu_for_rounds(l2, std::max(1, rounds));
  HardInstance proto = make_hard_instance(l2, zeta_hat, rep.mu, 4);
  rep.dim = hard_min_dim(proto, std::max(1, rounds));
  const HardInstance inst = make_hard_instance(l2, zeta_hat, rep.mu, rep.dim);
  rep.q = inst.q;

  ProblemSpec pspec;
  pspec.family = "hard";
  pspec.l2 = l2;
  pspec.zeta_hat = zeta_hat;
  pspec.hard_mu = rep.mu;
  pspec.hard_dim = rep.dim;
  BuiltProblem bp = build_problem(pspec, rounds);
  const FederatedProblem& p = bp.problem;
  const double fstar = p.value(*p.xstar);

  rep.initial_gap = p.value(bp.x0) - fstar;
  rep.initial_gap_formula = inst.initial_gap_bound();
  rep.bound = hard_instance_lower_bound(inst, rounds);

  SupportAuditor auditor(rep.dim);
  Vector xhat;
  if (wild_guess) {
    auditor.on_server_state(0, bp.x0);
    xhat = *p.xstar;  // jumps straight to the optimum: "wild guessing"
    auditor.on_server_state(1, xhat);
  } else {
    ExperimentConfig exp;
    exp.problem = pspec;
    exp.oracle = OracleConfig{};  // exact gradients
    OptimizerSpec spec = method;
    spec.rounds = rounds;
    SingleRun sr = run_single(exp, spec, bp, /*run_seed=*/1, &auditor);
    xhat = sr.final_point;
  }
  rep.achieved = p.value(xhat) - fstar;
  rep.ratio = rep.bound > 0 ? rep.achieved / rep.bound
                            : std::numeric_limits<double>::infinity();
  rep.support_violations = static_cast<int>(auditor.violations().size());
  rep.envelope_size = auditor.envelope_size();

  out << "hard instance: l2=" << l2 << " zeta_hat=" << zeta_hat
      << " mu=" << format_sig12(rep.mu) << " d=" << rep.dim
      << " q=" << format_sig12(rep.q) << "\n";
  out << "initial gap F(0)-F* = " << format_sig12(rep.initial_gap)
      << " (formula " << format_sig12(rep.initial_gap_formula) << ")\n";
  out << "after R=" << rounds << ": achieved=" << format_sig12(rep.achieved)
      << " bound=" << format_sig12(rep.bound)
      << " ratio=" << format_sig12(rep.ratio) << "\n";
  out << "support audit: " << rep.support_violations << " violation(s), "
      << rep.envelope_size << " unlocked coordinate(s)\n";
  return rep;
}

// ---------------------------------------------------------------- presets

std::vector<std::string> preset_names() {
  return {"paper-stochastic-logistic"};
}

std::vector<ExperimentConfig> make_preset(const std::string& name,
                                          const std::string& out_dir,
                                          std::uint64_t seed) {
  if (name != "paper-stochastic-logistic") {
    throw ConfigError("unknown preset: " + name);
  }
  std::vector<ExperimentConfig> out;
  for (double level : {0.0, 50.0, 100.0}) {
    ExperimentConfig exp;
    exp.problem.family = "shuffle";
    exp.problem.clients = 5;
    exp.problem.homogeneity = level;
    exp.problem.samples_per_class = 100;
    exp.problem.seed = seed;
    exp.oracle.sigma = 1.0;
    exp.oracle.sigma_f = 1.0;
    exp.seed = seed;
    exp.repeat = 3;
    exp.out_dir =
        out_dir + "/homogeneity_" + std::to_string(static_cast<int>(level));
    auto add = [&exp](const std::string& name, const std::string& method) {
      OptimizerSpec o;
      o.name = name;
      o.method = method;
      o.rounds = 100;
      o.k = 20;
      exp.optimizers.push_back(o);
    };
    add("fedavg", "fedavg");
    exp.optimizers.back().k = 16;  // fedavg needs a square K near 20
    add("sgd", "sgd");
    add("asg", "asg");
    add("fedavg_to_sgd", "fedchain");
    add("fedavg_to_asg", "fedchain");
    exp.optimizers.back().global_method = "asg";
    // chain local phases use the square K as well
    for (auto& o : exp.optimizers) {
      if (o.method == "fedchain") o.local_k = 16;
    }
    std::ostringstream cfg_text;
    cfg_text << "preset = paper-stochastic-logistic\nhomogeneity = " << level
             << "\nseed = " << seed << "\n";
    exp.config_text = cfg_text.str();
    out.push_back(std::move(exp));
  }
  return out;
}

}  // namespace fedchain
