#include "fedchain/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fedchain {

HeterogeneityReport measure_heterogeneity_at(const FederatedProblem& p,
                                             const std::vector<Vector>& probes,
                                             const std::string& probe_desc) {
  if (probes.empty()) {
    throw std::invalid_argument("measure_heterogeneity: empty probe set");
  }
  HeterogeneityReport rep;
  rep.probe = probe_desc;
  for (const auto& x : probes) {
    const Vector g = p.grad(x);
    const double fv = p.value(x);
    for (int i = 0; i < p.n(); ++i) {
      rep.zeta_hat =
          std::max(rep.zeta_hat, (p.client_grad(i, x) - g).norm());
      rep.zeta_f_hat =
          std::max(rep.zeta_f_hat, std::abs(p.client_value(i, x) - fv));
    }
  }
  if (p.zeta_exact) rep.zeta_exact = p.zeta_exact;
  if (p.xstar) {
    double acc = 0.0;
    for (int i = 0; i < p.n(); ++i) {
      acc += p.client_grad(i, *p.xstar).squaredNorm();
    }
    rep.zeta_star = std::sqrt(acc / p.n());
  }
  return rep;
}

HeterogeneityReport measure_heterogeneity_closed_form(const FederatedProblem& p,
                                                      double ball_radius_sq) {
  HeterogeneityReport rep;
  if (p.zeta_exact) {
    // Shared-Hessian federation: the gradient gap is x-free.
    rep.zeta_exact = p.zeta_exact;
    rep.zeta_hat = *p.zeta_exact;
    rep.probe = "closed_form(shared-hessian)";
  } else if (p.hard) {
    // Hard pair: || grad F_1 - grad F_2 ||^2 <= l2^2 (3 zh^2 + 7 ||x||^2)
    // over the audited ball, and the per-client gap is half that norm.
    const auto& h = *p.hard;
    const double xs2 = h.mu > 0 ? h.global_optimum().squaredNorm() : 0.0;
    const double bound2 =
        h.l2 * h.l2 *
        (3.0 * h.zeta_hat * h.zeta_hat +
         14.0 * ball_radius_sq + 14.0 * xs2);
    rep.zeta_exact = 0.5 * std::sqrt(bound2);
    rep.zeta_hat = *rep.zeta_exact;
    rep.probe = "closed_form(hard-pair ball bound)";
  } else {
    throw std::invalid_argument(
        "measure_heterogeneity: closed form unsupported for this family");
  }
  if (p.xstar) {
    double acc = 0.0;
    for (int i = 0; i < p.n(); ++i) {
      acc += p.client_grad(i, *p.xstar).squaredNorm();
    }
    rep.zeta_star = std::sqrt(acc / p.n());
  }
  return rep;
}

std::vector<Vector> random_probe_points(const FederatedProblem& p, int n,
                                        double radius, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("random_probe_points: n must be >= 1");
  const Vector center =
      p.xstar ? *p.xstar : Vector::Zero(p.dim()).eval();
  std::vector<Vector> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) {
    RngStream s(seed, static_cast<std::uint32_t>(i), 0, 0, Purpose::kMisc);
    pts.push_back(center + radius * gaussian(s, p.dim()) /
                               std::sqrt(static_cast<double>(p.dim())));
  }
  return pts;
}

double fit_rate_slope(const Trace& trace, int lo, int hi) {
  if (lo > hi) throw std::invalid_argument("fit_rate_slope: empty window");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& rec : trace) {
    if (rec.round < lo || rec.round > hi) continue;
    if (!rec.suboptimality || *rec.suboptimality <= 0.0) {
      throw std::invalid_argument(
          "fit_rate_slope: window must have positive suboptimality "
          "(it must precede the noise floor)");
    }
    const double x = rec.round;
    const double y = std::log(*rec.suboptimality);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) throw std::invalid_argument("fit_rate_slope: need >= 2 rounds");
  const double denom = n * sxx - sx * sx;
  if (denom == 0) throw std::invalid_argument("fit_rate_slope: degenerate x");
  return (n * sxy - sx * sy) / denom;
}

// ---------------------------------------------------------------- auditors

SupportAuditor::SupportAuditor(int dim, double threshold)
    : dim_(dim), threshold_(threshold), global_(dim, false) {}

std::vector<int> SupportAuditor::support_of(const Vector& v,
                                            double threshold) const {
  std::vector<int> idx;
  for (int i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > threshold) idx.push_back(i);
  }
  return idx;
}

void SupportAuditor::check(const Vector& x, const std::vector<bool>* extra,
                           int round, int client, int step) {
  for (int i : support_of(x, threshold_)) {
    const bool allowed = global_[i] || (extra != nullptr && (*extra)[i]);
    if (!allowed) {
      violations_.push_back({round, client, step, i});
      return;  // one violation per iterate is enough to flag it
    }
  }
}

void SupportAuditor::on_local_iterate(int client, int round, int step,
                                      const Vector& x) {
  auto it = pending_.find(client);
  check(x, it == pending_.end() ? nullptr : &it->second, round, client, step);
}

void SupportAuditor::on_local_grad(int client, int /*round*/, int /*step*/,
                                   const Vector& grad) {
  // Information unlocking is exact: the hard pair's gradients are exactly
  // zero beyond the frontier, so any nonzero entry is real information even
  // when it is still below the iterate-support threshold.
  auto& own = pending_[client];
  if (own.empty()) own.assign(dim_, false);
  for (int i : support_of(grad, 0.0)) own[i] = true;
}

void SupportAuditor::on_server_state(int round, const Vector& x) {
  // Server aggregation = communication: everything queried this round is now
  // public information.
  for (auto& [client, own] : pending_) {
    for (int i = 0; i < dim_; ++i) {
      if (own[i]) global_[i] = true;
    }
  }
  pending_.clear();
  if (!initialized_) {
    // The initial point is the algorithm's own; its support is granted.
    for (int i : support_of(x, 0.0)) global_[i] = true;
    initialized_ = true;
    return;
  }
  check(x, nullptr, round, -1, 0);
}

int SupportAuditor::envelope_size() const {
  return static_cast<int>(std::count(global_.begin(), global_.end(), true));
}

DistanceAuditor::DistanceAuditor(const FederatedProblem& p) {
  if (!p.xstar || p.client_optima.size() != static_cast<std::size_t>(p.n())) {
    throw std::invalid_argument(
        "distance audit: requires known global and per-client optima");
  }
  xstar_ = *p.xstar;
  client_optima_ = p.client_optima;
}

void DistanceAuditor::observe(const Vector& x) {
  if (!have_x0_) {
    x0_ = x;
    have_x0_ = true;
    denom_ = (x0_ - xstar_).squaredNorm();
    for (const auto& xi : client_optima_) {
      denom_ += (x0_ - xi).squaredNorm();
    }
    if (denom_ <= 0) denom_ = 1e-300;  // all optima coincide with x0
  }
  const double c = 2.0 * (x - xstar_).squaredNorm() / denom_;
  c_observed_ = std::max(c_observed_, c);
}

void DistanceAuditor::on_local_iterate(int /*client*/, int /*round*/,
                                       int /*step*/, const Vector& x) {
  observe(x);
}

void DistanceAuditor::on_server_state(int /*round*/, const Vector& x) {
  observe(x);
}

}  // namespace fedchain
