#pragma once

#include <cmath>
#include <vector>

#include "fedchain/objective.hpp"
#include "fedchain/rng.hpp"
#include "fedchain/vec.hpp"

namespace testutil {

using fedchain::Vector;

// Independent gradient oracle: central finite differences with
// h = 1e-6 (1 + ||x||).  Kept free of any knowledge of the objective's own
// gradient path.
inline Vector fd_gradient(const fedchain::ClientObjective& f, const Vector& x) {
  const double h = 1e-6 * (1.0 + x.norm());
  Vector g(x.size());
  for (int j = 0; j < x.size(); ++j) {
    Vector xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    g[j] = (f.value(xp) - f.value(xm)) / (2.0 * h);
  }
  return g;
}

// Max relative error of grad() against finite differences over n random
// points of the given radius.
inline double gradient_audit(const fedchain::ClientObjective& f, int n,
                             double radius, std::uint64_t seed) {
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    fedchain::RngStream s(seed, static_cast<std::uint32_t>(i), 0, 0,
                          fedchain::Purpose::kMisc);
    const Vector x = radius * fedchain::gaussian(s, f.dim()) /
                     std::sqrt(static_cast<double>(f.dim()));
    const Vector g = f.grad(x);
    const Vector gfd = fd_gradient(f, x);
    const double scale = std::max(1.0, gfd.norm());
    worst = std::max(worst, (g - gfd).norm() / scale);
  }
  return worst;
}

}  // namespace testutil
