#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "fedchain/optim.hpp"

namespace fedchain {

// Builds a phase optimizer at a given start point; start_round offsets the
// random streams so the two phases never share draws.
using OptimizerFactory =
    std::function<std::unique_ptr<OptimizerBase>(Vector x0, int start_round,
                                                 RunContext& ctx)>;

struct ChainConfig {
  Vector x0;
  OptimizerFactory make_local;
  OptimizerFactory make_global;
  int rounds_local = 0;
  int rounds_global = 0;
  int select_s = 1;  // clients used by the selection query
  int select_k = 1;  // per-client samples used by the selection query
};

struct SelectOutcome {
  Vector point;
  bool picked_second = false;  // true when the local-phase output won
};

// Chooses the candidate with the smaller noisy value query; both candidates
// are scored on one shared client subset.  Exact ties keep the newer point.
// Charges 2*S*K value-oracle calls.
SelectOutcome select_better(const Vector& x0, const Vector& x_half,
                            const FederatedProblem& problem, int s, int k,
                            const OracleConfig& oracle, std::uint64_t seed,
                            int round, OracleCounters* counters);

struct ChainResult {
  Vector x_final;
  Trace trace;
  Vector x_half;         // local-phase output
  Vector x_selected;     // global-phase start
  bool selected_local_output = false;
  int boundary_round = 0;
  std::vector<std::string> warnings;
};

ChainResult run_fedchain(const ChainConfig& cfg, const FederatedProblem& p,
                         const OracleConfig& oracle, std::uint64_t seed,
                         int s_clients, int k_samples,
                         RoundObserver* observer = nullptr);

// Simplified partial-participation pipeline: one uniformly chosen client runs
// K weighted-averaged local GD steps, then the server runs plain SGD rounds.
// Requires exact gradients (sigma == 0).
struct PartialChainConfig {
  Vector x0;                    // initial iterate
  double eta1 = 0;              // phase-1 stepsize, must be <= mu / (8 beta^2)
  double mu = 0;                // strong convexity
  int k_local = 0;              // K local steps
  int s_phase2 = 1;             // clients per phase-2 round
  int rounds_total = 1;         // R; phase 2 runs R-1 rounds
  std::vector<double> eta2;     // per-round phase-2 stepsizes; empty = preset
};

// The phase-2 stepsize preset (three cases keyed on R vs 4 beta/mu).
std::vector<double> partial_phase2_etas(double mu, double beta, int rounds);

struct PartialResult {
  Vector x_final;
  Vector x_phase1;  // weighted average the chosen client reports
  int chosen_client = 0;
  Trace trace;
};

PartialResult run_partial_fedavg_sgd(const PartialChainConfig& cfg,
                                     const FederatedProblem& p,
                                     const OracleConfig& oracle,
                                     std::uint64_t seed,
                                     RoundObserver* observer = nullptr);

}  // namespace fedchain
