// Acceptance suite: one line per criterion, all criteria always run.
// Exit code = number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include "fedchain/chain.hpp"
#include "fedchain/harness.hpp"
#include "fedchain/metrics.hpp"
#include "fedchain/problem.hpp"
#include "testutil.hpp"

using namespace fedchain;

namespace {

int g_failures = 0;

// Each criterion runs under its stated wall-clock budget.
class Timer {
 public:
  explicit Timer(double limit_s) : limit_(limit_s) {
    start_ = std::chrono::steady_clock::now();
  }
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }
  bool within_budget() const { return seconds() <= limit_; }
  double limit() const { return limit_; }

 private:
  double limit_;
  std::chrono::steady_clock::time_point start_;
};

void report(const char* name, bool ok, const Timer& t,
            const std::string& detail) {
  const bool timed_ok = ok && t.within_budget();
  std::printf("[%s] %s: %s (%.2fs, budget %.0fs)\n",
              timed_ok ? "PASS" : "FAIL", name, detail.c_str(), t.seconds(),
              t.limit());
  if (!timed_ok) ++g_failures;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v.size() % 2 == 1 ? v[v.size() / 2]
                           : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
}

ExperimentConfig base_experiment(const ProblemSpec& p, double sigma,
                                 std::uint64_t seed) {
  ExperimentConfig exp;
  exp.problem = p;
  exp.oracle.sigma = sigma;
  exp.seed = seed;
  exp.config_text = "acceptance";
  return exp;
}

SingleRun run_spec(const ExperimentConfig& exp, const OptimizerSpec& spec,
                   std::uint64_t run_seed) {
  const BuiltProblem bp = build_problem(exp.problem, spec.rounds);
  return run_single(exp, spec, bp, run_seed);
}

// ---------------------------------------------------------------------------
// C1: FedAvg heterogeneity floor.

void criterion1() {
  Timer timer(1.0);
  ProblemSpec ps;
  ps.family = "synthetic";
  ps.clients = 4;
  ps.dim = 10;
  ps.kappa = 10.0;
  ps.mu = 1.0;
  ps.zeta = 0.5;
  ps.seed = 1;
  ps.delta = 1.0;
  auto exp = base_experiment(ps, 0.0, 1);

  OptimizerSpec fa;
  fa.method = "fedavg";
  fa.name = "fedavg";
  fa.rounds = 200;
  fa.s = 2;
  fa.k = 100;
  fa.eta = "preset";  // 1/(2 beta)
  const auto run = run_spec(exp, fa, 1);
  const double fin = run.final_subopt.value_or(-1.0);
  const double cap = 3.0 * ps.zeta * ps.zeta / (2.0 * ps.mu);
  std::ostringstream os;
  os << "final=" << fin << " limit=" << cap << " floor>=1e-8";
  report("C1 fedavg heterogeneity floor", fin >= 1e-8 && fin <= cap, timer,
         os.str());
}

// ---------------------------------------------------------------------------
// C2: exponential zeta-dependence of the chained method.

void criterion2() {
  Timer timer(5.0);
  std::vector<double> chain_fin, sgd_fin, fa_fin;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ProblemSpec ps;
    ps.family = "synthetic";
    ps.clients = 4;
    ps.dim = 10;
    ps.kappa = 10.0;
    ps.mu = 1.0;
    ps.zeta = 0.1;  // zeta^2 / mu = 0.01, Delta = 1
    ps.seed = seed;
    ps.delta = 1.0;
    ps.x0_mode = "slow";
    auto exp = base_experiment(ps, 0.0, seed);

    OptimizerSpec sgd;
    sgd.method = "sgd";
    sgd.name = "sgd";
    sgd.rounds = 60;
    sgd.s = 2;
    sgd.k = 100;
    OptimizerSpec fa = sgd;
    fa.method = "fedavg";
    fa.name = "fedavg";
    OptimizerSpec chain = sgd;
    chain.method = "fedchain";
    chain.name = "chain";
    chain.local_method = "fedavg";
    chain.global_method = "sgd";
    chain.split = 0.5;

    chain_fin.push_back(*run_spec(exp, chain, seed * 31).final_subopt);
    sgd_fin.push_back(*run_spec(exp, sgd, seed * 31).final_subopt);
    fa_fin.push_back(*run_spec(exp, fa, seed * 31).final_subopt);
  }
  const double mc = median_of(chain_fin);
  const double ms = median_of(sgd_fin);
  const double mf = median_of(fa_fin);
  std::ostringstream os;
  os << "chain=" << mc << " sgd=" << ms << " fedavg=" << mf
     << " need chain <= 0.5*min";
  report("C2 fedchain exponential zeta-dependence",
         mc <= 0.5 * std::min(ms, mf), timer, os.str());
}

// ---------------------------------------------------------------------------
// C3: acceleration separation at kappa = 400.

int rounds_to_threshold(const Trace& trace, double threshold) {
  for (const auto& rec : trace) {
    if (rec.suboptimality && *rec.suboptimality <= threshold) return rec.round;
  }
  return -1;
}

void criterion3() {
  Timer timer(2.0);
  ProblemSpec ps;
  ps.family = "synthetic";
  ps.clients = 2;
  ps.dim = 10;
  ps.kappa = 400.0;
  ps.mu = 1.0;
  ps.zeta = 0.0;
  ps.seed = 2;
  ps.delta = 1.0;
  ps.x0_mode = "slow";
  auto exp = base_experiment(ps, 0.0, 1);

  OptimizerSpec sgd;
  sgd.method = "sgd";
  sgd.name = "sgd";
  sgd.rounds = 15000;
  sgd.averaging = "none";
  OptimizerSpec asg;
  asg.method = "asg";
  asg.name = "asg";
  asg.rounds = 4000;

  const int r_sgd =
      rounds_to_threshold(run_spec(exp, sgd, 1).trace, 1e-8);
  const int r_asg =
      rounds_to_threshold(run_spec(exp, asg, 1).trace, 1e-8);
  std::ostringstream os;
  os << "rounds: asg=" << r_asg << " sgd=" << r_sgd;
  report("C3 acceleration separation",
         r_asg > 0 && r_sgd > 0 && 3 * r_asg <= r_sgd, timer, os.str());
}

// ---------------------------------------------------------------------------
// C4: SAGA removes the client-sampling floor.

void criterion4() {
  Timer timer(2.0);
  ProblemSpec ps;
  ps.family = "synthetic";
  ps.clients = 4;
  ps.dim = 10;
  ps.kappa = 5.0;
  ps.mu = 1.0;
  ps.zeta = 2.0;  // distinct client optima
  ps.seed = 3;
  ps.delta = 1.0;
  auto exp = base_experiment(ps, 0.0, 1);
  const double eta = 1.0 / (3.0 * ps.kappa * ps.mu);

  OptimizerSpec saga;
  saga.method = "saga";
  saga.name = "saga";
  saga.rounds = 400;
  saga.s = 2;
  saga.eta = std::to_string(eta);
  saga.averaging = "none";
  OptimizerSpec sgd = saga;
  sgd.method = "sgd";
  sgd.name = "sgd";

  const auto saga_run = run_spec(exp, saga, 7);
  const auto sgd_run = run_spec(exp, sgd, 7);
  double sgd_best = 1e300;
  for (const auto& rec : sgd_run.trace) {
    if (rec.suboptimality) sgd_best = std::min(sgd_best, *rec.suboptimality);
  }
  const double saga_fin = *saga_run.final_subopt;
  std::ostringstream os;
  os << "saga final=" << saga_fin << " sgd best-ever=" << sgd_best;
  report("C4 saga floor removal", saga_fin <= 1e-10 && sgd_best > 1e-4,
         timer, os.str());
}

// ---------------------------------------------------------------------------
// C5: selection penalty bound 4 sigma_F / sqrt(S K).

void criterion5() {
  Timer timer(5.0);
  const auto p = make_two_client_toy();
  OracleConfig noisy;
  noisy.sigma_f = 1.0;
  const int s = 2, k = 25;
  const double scale = noisy.sigma_f / std::sqrt(double(s) * k);
  const double fstar = p.value(*p.xstar);
  auto point_with_gap = [&](double target) {
    double lo = -1.0 / 3.0, hi = 20.0;
    for (int it = 0; it < 300; ++it) {
      const double mid = 0.5 * (lo + hi);
      (p.value(Vector::Constant(1, mid)) - fstar < target ? lo : hi) = mid;
    }
    return Vector::Constant(1, 0.5 * (lo + hi)).eval();
  };
  const Vector u = point_with_gap(0.2);
  const double fu = p.value(u) - fstar;

  bool ok = true;
  std::ostringstream os;
  for (double mult : {0.1, 1.0, 10.0}) {
    const double a = mult * scale;
    const Vector v = point_with_gap(fu + a);
    double acc = 0.0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
      const auto out =
          select_better(u, v, p, s, k, noisy, 90000 + t, 0, nullptr);
      acc += p.value(out.point) - fstar;
    }
    const double excess = acc / trials - fu;
    ok = ok && excess <= 4.0 * scale;
    os << "a=" << mult << "s:excess=" << excess << " ";
  }
  os << "limit=" << 4.0 * scale;
  report("C5 selection penalty bound", ok, timer, os.str());
}

// ---------------------------------------------------------------------------
// C6: lower-bound consistency for every shipped optimizer.

void criterion6() {
  Timer timer(2.0);
  bool ok = true;
  std::ostringstream os;
  std::ostringstream sink;
  for (int rounds : {5, 10, 20}) {
    for (const char* method :
         {"sgd", "asg", "fedavg", "saga", "ssnm", "fedchain", "msgd"}) {
      OptimizerSpec spec;
      spec.method = method;
      spec.name = method;
      spec.k = std::string(method) == "fedavg" ? 4 : 1;
      spec.averaging = "none";
      const auto rep =
          run_lowerbound(1.0, 1.0, /*mu=*/0.0, rounds, spec, false, sink);
      const bool clean = rep.ratio >= 1.0 - 1e-9 &&
                         rep.support_violations == 0 &&
                         std::abs(rep.initial_gap - rep.initial_gap_formula) <=
                             1e-9;
      if (!clean) {
        ok = false;
        os << method << "@R=" << rounds << " ratio=" << rep.ratio
           << " viol=" << rep.support_violations << "; ";
      }
    }
  }
  // the audit also discriminates: a wild guess must be flagged
  OptimizerSpec spec;
  spec.method = "sgd";
  spec.name = "sgd";
  const auto wild = run_lowerbound(1.0, 1.0, 0.0, 10, spec, true, sink);
  if (!(wild.ratio < 1.0 && wild.support_violations >= 1)) {
    ok = false;
    os << "wild-guess not flagged; ";
  }
  if (ok) os << "7 optimizers x R in {5,10,20} all >= bound, audits clean";
  report("C6 lower-bound consistency", ok, timer, os.str());
}

// ---------------------------------------------------------------------------
// C7: partial-participation single-round claim, exactly as stated.

void criterion7() {
  Timer timer(1.0);
  const double kappa = 2.0, mu = 1.0;
  const auto p = make_synthetic_federation(4, 5, kappa, 0.0, 19, mu);
  const double beta = p.beta();
  Vector dir = Vector::Ones(5);
  dir /= dir.norm();
  PartialChainConfig pc;
  pc.x0 = *p.xstar + dir;  // D = 1
  pc.mu = mu;
  pc.eta1 = mu / (8.0 * beta * beta);
  pc.k_local = static_cast<int>(std::ceil(
      4.0 * kappa * kappa * std::log(4.0 * beta * beta / (mu * 1e-6))));
  pc.s_phase2 = 4;
  pc.rounds_total = 1;
  const auto res = run_partial_fedavg_sgd(pc, p, OracleConfig{}, 3);
  const double gap = p.value(res.x_phase1) - p.value(*p.xstar);
  std::ostringstream os;
  os << "K=" << pc.k_local << " phase-1 gap=" << gap << " target=1e-6";
  if (gap > 1e-6) {
    os << " (stated K falls short of the certified schedule by 8x in the "
          "exponent; the 32 kappa^2 schedule passes, see unit tests)";
  }
  report("C7 partial single-round claim", gap <= 1e-6, timer, os.str());
}

// ---------------------------------------------------------------------------
// C8: PL convergence with the preset stepsize.

void criterion8() {
  Timer timer(1.0);
  ProblemSpec ps;
  ps.family = "pl";
  ps.x0_scalar = 3.0;
  auto exp = base_experiment(ps, 0.0, 1);
  OptimizerSpec sgd;
  sgd.method = "sgd";
  sgd.name = "sgd";
  sgd.rounds = 500;
  const auto run = run_spec(exp, sgd, 1);
  const double fin = run.final_subopt.value_or(1e300);
  std::ostringstream os;
  os << "final=" << fin << " after 500 rounds (nonconvex, mu-PL)";
  report("C8 pl convergence", fin <= 1e-6, timer, os.str());
}

// ---------------------------------------------------------------------------
// C9: oracle/estimator property suite.

void criterion9() {
  Timer timer(30.0);
  bool ok = true;
  std::ostringstream os;

  // finite-difference audits across all objective families
  double worst_fd = 0.0;
  {
    const auto toy = make_two_client_toy();
    for (const auto& c : toy.clients) {
      worst_fd = std::max(worst_fd, testutil::gradient_audit(*c, 20, 3.0, 1));
    }
    const auto syn = make_synthetic_federation(4, 8, 25.0, 0.5, 5);
    for (const auto& c : syn.clients) {
      worst_fd = std::max(worst_fd, testutil::gradient_audit(*c, 20, 2.0, 2));
    }
    const auto hard = make_hard_problem(make_hard_instance(1.0, 1.0, 0.1, 12));
    for (const auto& c : hard.clients) {
      worst_fd = std::max(worst_fd, testutil::gradient_audit(*c, 20, 2.0, 3));
    }
    const auto shf = make_shuffle_federation(5, 50.0, 40, 1);
    for (const auto& c : shf.clients) {
      worst_fd = std::max(worst_fd, testutil::gradient_audit(*c, 20, 1.0, 4));
    }
    worst_fd = std::max(
        worst_fd, testutil::gradient_audit(*make_pl_objective(), 20, 5.0, 5));
    const auto sm = smooth(toy.clients[0], 0.3, Vector::Constant(1, 0.5));
    worst_fd = std::max(worst_fd, testutil::gradient_audit(*sm, 20, 3.0, 6));
  }
  if (worst_fd > 1e-5) {
    ok = false;
    os << "fd audit worst=" << worst_fd << "; ";
  }

  // exhaustive-subset unbiasedness of the SAGA and SSNM estimators, N <= 6
  for (int n : {4, 6}) {
    const auto p = make_synthetic_federation(n, 5, 6.0, 1.0, 31);
    RunContext ctx;
    ctx.problem = &p;
    ctx.seed = 17;
    ctx.s_clients = n;
    ctx.k_samples = 1;
    SagaState saga = make_saga_state(Vector::Zero(5), 0.02,
                                     SagaRefresh::kOptionI, Averaging::kNone,
                                     p.mu(), ctx);
    ctx.s_clients = 2;
    for (int r = 0; r < 3; ++r) saga_round(saga, ctx);

    const auto pr = ssnm_params(p.mu(), p.beta(), n, 2);
    ctx.s_clients = n;
    SsnmState ssnm =
        make_ssnm_state(Vector::Zero(5), pr.eta, pr.tau, p.mu(), ctx);
    ctx.s_clients = 2;
    for (int r = 0; r < 3; ++r) ssnm_round(ssnm, ctx);

    const int s = n / 2;
    std::vector<int> idx(s);
    Vector acc_saga = Vector::Zero(5);
    Vector acc_ssnm = Vector::Zero(5);
    Vector exact_ssnm = Vector::Zero(5);
    int count = 0;
    std::function<void(int, int)> rec = [&](int start, int depth) {
      if (depth == s) {
        Vector g = saga.control_mean;
        Vector h = ssnm.control_mean;
        for (int j = 0; j < s; ++j) {
          g += (p.client_grad(idx[j], saga.x) - saga.control[idx[j]]) /
               static_cast<double>(s);
          const Vector y =
              ssnm.tau * ssnm.x + (1.0 - ssnm.tau) * ssnm.anchor[idx[j]];
          h += (p.client_grad(idx[j], y) - ssnm.mu * y -
                ssnm.control[idx[j]]) /
               static_cast<double>(s);
        }
        acc_saga += g;
        acc_ssnm += h;
        ++count;
        return;
      }
      for (int i = start; i < n; ++i) {
        idx[depth] = i;
        rec(i + 1, depth + 1);
      }
    };
    rec(0, 0);
    acc_saga /= count;
    acc_ssnm /= count;
    for (int i = 0; i < n; ++i) {
      const Vector y = ssnm.tau * ssnm.x + (1.0 - ssnm.tau) * ssnm.anchor[i];
      exact_ssnm += (p.client_grad(i, y) - ssnm.mu * y) / n;
    }
    const double err_saga = (acc_saga - p.grad(saga.x)).norm();
    const double err_ssnm = (acc_ssnm - exact_ssnm).norm();
    if (err_saga > 1e-12 || err_ssnm > 1e-12) {
      ok = false;
      os << "unbiasedness N=" << n << " saga=" << err_saga
         << " ssnm=" << err_ssnm << "; ";
    }
  }

  // variance laws at 1e4 repeats
  {
    const auto p = make_two_client_toy();
    Vector x(1);
    x << 0.25;
    OracleConfig noisy;
    noisy.sigma = 2.0;
    noisy.sigma_f = 1.5;
    const int k = 5, reps = 10000;
    double g2 = 0.0, v2 = 0.0;
    const double gex = p.client_grad(1, x)[0];
    const double vex = p.value(x);
    for (int r = 0; r < reps; ++r) {
      RngStream sg(71, 1, r % (1 << 20), 0, Purpose::kGradNoise);
      const double g = grad_query(p, 1, x, k, noisy, sg)[0];
      g2 += (g - gex) * (g - gex);
      RngStream sv(72, 0, r % (1 << 20), 0, Purpose::kValueNoise);
      const double v = value_query(p, {0, 1}, x, k, noisy, sv);
      v2 += (v - vex) * (v - vex);
    }
    const double want_g = noisy.sigma * noisy.sigma / k;
    const double want_v = noisy.sigma_f * noisy.sigma_f / (2.0 * k);
    if (std::abs(g2 / reps - want_g) > 0.10 * want_g ||
        std::abs(v2 / reps - want_v) > 0.10 * want_v) {
      ok = false;
      os << "variance law grad=" << g2 / reps << "/" << want_g
         << " value=" << v2 / reps << "/" << want_v << "; ";
    }
  }

  // bit-identical reruns: 1 thread vs 8 threads
  {
    Config cfg = Config::parse(
        "problem.family = synthetic\n"
        "problem.zeta = 0.4\n"
        "oracle.sigma = 0.6\n"
        "optimizer.1.method = saga\n"
        "optimizer.1.name = saga\n"
        "optimizer.1.rounds = 30\n"
        "optimizer.1.s = 2\n"
        "optimizer.1.k = 2\n"
        "optimizer.2.method = fedavg\n"
        "optimizer.2.name = fedavg\n"
        "optimizer.2.rounds = 30\n"
        "optimizer.2.s = 2\n"
        "optimizer.2.k = 4\n"
        "run.repeat = 4\n"
        "run.seed = 3\n");
    auto exp = parse_experiment(cfg);
    namespace fs = std::filesystem;
    const auto d1 = fs::temp_directory_path() / "fedchain_acc_t1";
    const auto d8 = fs::temp_directory_path() / "fedchain_acc_t8";
    fs::remove_all(d1);
    fs::remove_all(d8);
    std::ostringstream log;
    exp.threads = 1;
    exp.out_dir = d1.string();
    cli_run(exp, log);
    exp.threads = 8;
    exp.out_dir = d8.string();
    cli_run(exp, log);
    for (const auto& entry : fs::directory_iterator(d1)) {
      std::ifstream a(entry.path(), std::ios::binary);
      std::ifstream b(d8 / entry.path().filename(), std::ios::binary);
      std::stringstream sa, sb;
      sa << a.rdbuf();
      sb << b.rdbuf();
      if (sa.str() != sb.str() || sa.str().empty()) {
        ok = false;
        os << "thread mismatch in " << entry.path().filename() << "; ";
      }
    }
  }

  if (ok) os << "fd audits, unbiasedness, variance laws, thread determinism";
  report("C9 oracle/estimator property suite", ok, timer, os.str());
}

// ---------------------------------------------------------------------------
// C10: multistage schedules.

void criterion10() {
  Timer timer(5.0);
  bool ok = true;
  std::ostringstream os;

  MultistageConfig mc;
  mc.inner = MultistageInner::kFedAvg;
  mc.mu = 1.0;
  mc.k = 4;
  mc.base_eta = std::log(4.0) / (mc.mu * mc.k);
  for (int s = 1; s <= 8; ++s) {
    if (multistage_stage_rounds(mc, s, 4, 4) != (1LL << s)) {
      ok = false;
      os << "R_" << s << " != 2^s; ";
    }
  }

  ProblemSpec ps;
  ps.family = "synthetic";
  ps.clients = 4;
  ps.dim = 10;
  ps.kappa = 10.0;
  ps.zeta = 0.0;
  ps.seed = 4;
  ps.delta = 1.0;
  ps.x0_mode = "slow";
  std::vector<double> msgd_fin, const_fin;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto exp = base_experiment(ps, /*sigma=*/1.0, seed);
    OptimizerSpec cons;
    cons.method = "sgd";
    cons.name = "sgd";
    cons.rounds = 400;
    cons.eta = std::to_string(1.0 / (2.0 * ps.kappa));
    cons.averaging = "none";
    OptimizerSpec ms = cons;
    ms.method = "msgd";
    ms.name = "msgd";
    msgd_fin.push_back(*run_spec(exp, ms, seed * 11).final_subopt);
    const_fin.push_back(*run_spec(exp, cons, seed * 11).final_subopt);
  }
  const double m_ms = median_of(msgd_fin);
  const double m_c = median_of(const_fin);
  if (!(m_ms <= m_c)) {
    ok = false;
  }
  os << "stage lengths exact; median msgd=" << m_ms << " const sgd=" << m_c;
  report("C10 multistage schedules", ok, timer, os.str());
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  if (g_failures == 0) {
    std::printf("all acceptance criteria passed\n");
  } else {
    std::printf("%d acceptance criterion(s) failed\n", g_failures);
  }
  return g_failures;
}
