#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fedchain {

// One row of a run trace.  Suboptimality and distance are absent when the
// problem does not expose its optimum.
struct RoundRecord {
  int round = 0;
  std::optional<double> suboptimality;
  double grad_norm_sq = 0.0;
  std::optional<double> dist_sq;
  std::int64_t grad_oracle_calls = 0;
  std::int64_t value_oracle_calls = 0;
  std::string phase = "-";
};

using Trace = std::vector<RoundRecord>;

struct OracleCounters {
  std::int64_t grad_calls = 0;
  std::int64_t value_calls = 0;
};

}  // namespace fedchain
