#include "fedchain/csv.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace fedchain {

std::string format_sig12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string trace_to_csv(const Trace& trace,
                         const std::string& header_comment) {
  std::ostringstream out;
  if (!header_comment.empty()) {
    std::istringstream lines(header_comment);
    std::string line;
    while (std::getline(lines, line)) out << "# " << line << "\n";
  }
  out << "round,suboptimality,grad_norm_sq,dist_sq,grad_calls,value_calls,"
         "phase\n";
  for (const auto& r : trace) {
    out << r.round << ',';
    if (r.suboptimality) out << format_sig12(*r.suboptimality);
    out << ',' << format_sig12(r.grad_norm_sq) << ',';
    if (r.dist_sq) out << format_sig12(*r.dist_sq);
    out << ',' << r.grad_oracle_calls << ',' << r.value_oracle_calls << ','
        << r.phase << "\n";
  }
  return out.str();
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

Trace trace_from_csv(const std::string& csv) {
  Trace trace;
  std::istringstream in(csv);
  std::string line;
  bool saw_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!saw_header) {
      saw_header = true;  // column header
      continue;
    }
    const auto f = split_fields(line);
    if (f.size() != 7) {
      throw std::runtime_error("trace csv: expected 7 fields, got " +
                               std::to_string(f.size()));
    }
    RoundRecord r;
    r.round = std::stoi(f[0]);
    if (!f[1].empty()) r.suboptimality = std::stod(f[1]);
    r.grad_norm_sq = std::stod(f[2]);
    if (!f[3].empty()) r.dist_sq = std::stod(f[3]);
    r.grad_oracle_calls = std::stoll(f[4]);
    r.value_oracle_calls = std::stoll(f[5]);
    r.phase = f[6];
    trace.push_back(std::move(r));
  }
  return trace;
}

}  // namespace fedchain
