#include "fedchain/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fedchain {

std::vector<int> sample_clients(int n, int s, const RngStream& stream) {
  if (s < 1 || s > n) {
    throw std::invalid_argument("sample_clients: need 1 <= S <= N");
  }
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  // Partial Fisher-Yates keyed to the stream.
  for (int i = 0; i < s; ++i) {
    const std::uint32_t j =
        i + uniform_below(stream, static_cast<std::uint64_t>(i),
                          static_cast<std::uint32_t>(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(s);
  std::sort(idx.begin(), idx.end());
  return idx;
}

Vector grad_query(const FederatedProblem& problem, int client, const Vector& x,
                  int k_samples, const OracleConfig& cfg,
                  const RngStream& stream) {
  if (k_samples < 1) throw std::invalid_argument("grad_query: K must be >= 1");
  Vector g = problem.client_grad(client, x);
  if (cfg.sigma > 0) {
    const int d = static_cast<int>(g.size());
    const double scale =
        cfg.sigma / std::sqrt(static_cast<double>(k_samples) * d);
    g += scale * gaussian(stream, d);
  }
  require_finite(g, "grad_query result");
  return g;
}

double value_query(const FederatedProblem& problem,
                   const std::vector<int>& subset, const Vector& x,
                   int k_samples, const OracleConfig& cfg,
                   const RngStream& stream) {
  if (k_samples < 1) throw std::invalid_argument("value_query: K must be >= 1");
  if (subset.empty()) throw std::invalid_argument("value_query: empty subset");
  double v = 0.0;
  for (int i : subset) v += problem.client_value(i, x);
  v /= static_cast<double>(subset.size());
  if (cfg.sigma_f > 0) {
    const double scale =
        cfg.sigma_f / std::sqrt(static_cast<double>(subset.size()) * k_samples);
    v += scale * normal(stream, 0);
  }
  if (!std::isfinite(v)) throw std::runtime_error("value_query: non-finite");
  return v;
}

}  // namespace fedchain
