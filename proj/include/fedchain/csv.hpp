#pragma once

#include <string>

#include "fedchain/record.hpp"

namespace fedchain {

// Trace CSV: header row `round,suboptimality,grad_norm_sq,dist_sq,grad_calls,
// value_calls,phase`, one row per round, 12 significant digits, empty cells
// for absent values.  `header_comment` lines are prefixed with "# ".
std::string trace_to_csv(const Trace& trace, const std::string& header_comment);

// Parses what trace_to_csv wrote; values round-trip at 12 significant digits.
Trace trace_from_csv(const std::string& csv);

// %.12g rendering used for every numeric cell.
std::string format_sig12(double v);

}  // namespace fedchain
