#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fedchain/chain.hpp"
#include "fedchain/config.hpp"
#include "fedchain/metrics.hpp"
#include "fedchain/optim.hpp"
#include "fedchain/problem.hpp"

namespace fedchain {

struct ProblemSpec {
  std::string family = "synthetic";  // toy | synthetic | shuffle | hard | pl
  int clients = 4;
  int dim = 10;
  double kappa = 10.0;
  double mu = 1.0;
  double zeta = 0.5;
  double homogeneity = 50.0;
  int samples_per_class = 100;
  double l2 = 1.0;
  double zeta_hat = 1.0;
  double hard_mu = 0.0;  // 0 = choose l2/(64 R^2) from the optimizer's rounds
  int hard_dim = 0;      // 0 = smallest valid even dimension
  std::uint64_t seed = 1;
  std::string x0_mode = "auto";  // zero | slow | random | auto
  double delta = 1.0;            // initial suboptimality for slow/random x0
  double x0_scalar = 3.0;        // pl family start
};

struct BuiltProblem {
  FederatedProblem problem;
  Vector x0;
};

BuiltProblem build_problem(const ProblemSpec& spec, int rounds_hint);

struct OptimizerSpec {
  std::string name;
  std::string method = "sgd";
  int rounds = 1;
  int s = 0;  // 0 = all clients
  int k = 1;
  std::string eta = "preset";
  std::string averaging = "auto";  // none | weighted | auto
  int saga_option = 1;
  std::string stage_rule = "halving";  // multistage: halving | saga_pl
  // fedchain
  std::string local_method = "fedavg";
  std::string local_eta = "preset";
  int local_k = 0;  // 0 = k
  std::string global_method = "sgd";
  std::string global_eta = "preset";
  double split = 0.5;
  int select_s = 0;  // 0 = s
  int select_k = 0;  // 0 = local k
  bool switch_on_eta_over_k = false;
  // partial
  std::string eta1 = "preset";
};

struct ExperimentConfig {
  ProblemSpec problem;
  OracleConfig oracle;
  std::vector<OptimizerSpec> optimizers;
  int repeat = 1;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out_dir = ".";
  std::string config_text;
};

// Parses and validates; unknown fields raise ConfigError naming the field.
ExperimentConfig parse_experiment(const Config& cfg);

// Builds the optimizer an OptimizerSpec describes, resolving presets against
// the problem.  start_round offsets random streams (used by chained phases).
std::unique_ptr<OptimizerBase> build_optimizer(const OptimizerSpec& spec,
                                               const BuiltProblem& bp,
                                               const Vector& x0,
                                               int start_round,
                                               RunContext& ctx);

struct SingleRun {
  Trace trace;
  Vector final_point;
  std::optional<double> final_subopt;
  double final_grad_norm_sq = 0;
  std::optional<double> slope;
  OracleCounters counters;
  std::vector<std::string> warnings;
};

SingleRun run_single(const ExperimentConfig& exp, const OptimizerSpec& spec,
                     const BuiltProblem& bp, std::uint64_t run_seed,
                     RoundObserver* observer = nullptr);

// `run`: one CSV per (optimizer, repeat) plus summary.csv in exp.out_dir.
void cli_run(const ExperimentConfig& exp, std::ostream& log);

// `compare`: ranking table by median final suboptimality; writes compare.csv.
void cli_compare(const ExperimentConfig& exp, std::ostream& out);

struct LowerBoundReport {
  double achieved = 0;
  double bound = 0;
  double ratio = 0;
  double initial_gap = 0;
  double initial_gap_formula = 0;
  int support_violations = 0;
  int envelope_size = 0;
  int dim = 0;
  double mu = 0;
  double q = 0;
};

// Runs `method` with exact gradients on the hard instance and checks the
// achieved suboptimality against the analytic floor.  `wild_guess` replaces
// the optimizer with a jump to the closed-form optimum (a support-violating
// baseline that demonstrates the audit's discriminative power).
LowerBoundReport run_lowerbound(double l2, double zeta_hat, double mu,
                                int rounds, const OptimizerSpec& method,
                                bool wild_guess, std::ostream& out);

std::vector<std::string> preset_names();
// Materializes a named preset experiment into one or more ExperimentConfigs.
std::vector<ExperimentConfig> make_preset(const std::string& name,
                                          const std::string& out_dir,
                                          std::uint64_t seed);

}  // namespace fedchain
