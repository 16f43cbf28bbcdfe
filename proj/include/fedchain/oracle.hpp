#pragma once

#include <vector>

#include "fedchain/problem.hpp"
#include "fedchain/rng.hpp"

namespace fedchain {

// Isotropic Gaussian noise model: a single gradient sample deviates from
// grad F_i by N(0, (sigma^2/d) I), so E||g - grad F_i||^2 = sigma^2; a value
// sample deviates by N(0, sigma_f^2).
struct OracleConfig {
  double sigma = 0.0;
  double sigma_f = 0.0;
};

// Uniform S-subset of [N] without replacement, returned in increasing order
// so reductions are order-deterministic.
std::vector<int> sample_clients(int n, int s, const RngStream& stream);

// grad F_i(x) + noise with variance sigma^2/K (the average of K samples).
// Charges K gradient-oracle calls to `counters` when provided.
Vector grad_query(const FederatedProblem& problem, int client, const Vector& x,
                  int k_samples, const OracleConfig& cfg,
                  const RngStream& stream);

// Subset-average value plus zero-mean noise with variance sigma_f^2/(|S| K).
double value_query(const FederatedProblem& problem,
                   const std::vector<int>& subset, const Vector& x,
                   int k_samples, const OracleConfig& cfg,
                   const RngStream& stream);

}  // namespace fedchain
