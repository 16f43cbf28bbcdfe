#include "fedchain/problem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fedchain {

double FederatedProblem::value(const Vector& x) const {
  double v = 0.0;
  for (const auto& c : clients) v += c->value(x);
  return v / static_cast<double>(clients.size());
}

Vector FederatedProblem::grad(const Vector& x) const {
  Vector g = Vector::Zero(dim());
  for (const auto& c : clients) g += c->grad(x);
  return g / static_cast<double>(clients.size());
}

double FederatedProblem::mu() const {
  double m = clients.front()->strong_convexity();
  for (const auto& c : clients) m = std::min(m, c->strong_convexity());
  return m;
}

double FederatedProblem::beta() const {
  double b = clients.front()->smoothness();
  for (const auto& c : clients) b = std::max(b, c->smoothness());
  return b;
}

FederatedProblem make_two_client_toy() {
  FederatedProblem p;
  // F1(x) = (x-1)^2/2 = 0.5 x^2 - x + 0.5
  Matrix a1(1, 1);
  a1(0, 0) = 1.0;
  Vector b1(1);
  b1[0] = 1.0;
  Vector o1(1);
  o1[0] = 1.0;
  p.clients.push_back(
      std::make_shared<QuadraticClient>(a1, b1, 0.5, 1.0, 2.0, o1));
  // F2(x) = (x+1)^2 = x^2 + 2x + 1
  Matrix a2(1, 1);
  a2(0, 0) = 2.0;
  Vector b2(1);
  b2[0] = -2.0;
  Vector o2(1);
  o2[0] = -1.0;
  p.clients.push_back(
      std::make_shared<QuadraticClient>(a2, b2, 1.0, 1.0, 2.0, o2));
  Vector xs(1);
  xs[0] = -1.0 / 3.0;
  p.xstar = xs;
  p.client_optima = {o1, o2};
  return p;
}

FederatedProblem make_synthetic_federation(int n_clients, int dim, double kappa,
                                           double zeta_target,
                                           std::uint64_t seed, double mu) {
  if (n_clients < 2) throw std::invalid_argument("synthetic: N must be >= 2");
  if (kappa < 1.0) throw std::invalid_argument("synthetic: kappa must be >= 1");
  if (zeta_target < 0) {
    throw std::invalid_argument("synthetic: zeta_target must be >= 0");
  }
  const double beta = kappa * mu;

  // Spectrum spanning [mu, beta] and a random orthonormal basis.
  Vector lam(dim);
  for (int i = 0; i < dim; ++i) {
    lam[i] = dim == 1 ? mu
                      : mu * std::pow(kappa, static_cast<double>(i) /
                                                 static_cast<double>(dim - 1));
  }
  RngStream init(seed, 0, 0, 0, Purpose::kProblemInit);
  Matrix g(dim, dim);
  {
    Vector draws = gaussian(init, dim * dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) g(i, j) = draws[i * dim + j];
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Matrix a = q * lam.asDiagonal() * q.transpose();
  a = (0.5 * (a + a.transpose())).eval();

  RngStream sstar(seed, 1, 0, 0, Purpose::kProblemInit);
  Vector xstar = gaussian(sstar, dim) / std::sqrt(static_cast<double>(dim));
  Vector bbar = a * xstar;

  // Zero-sum offsets with max norm exactly zeta_target.
  std::vector<Vector> delta(n_clients, Vector::Zero(dim));
  if (zeta_target > 0) {
    Vector mean = Vector::Zero(dim);
    for (int i = 0; i < n_clients; ++i) {
      RngStream sd(seed, 2, static_cast<std::uint32_t>(i), 0,
                   Purpose::kProblemInit);
      delta[i] = gaussian(sd, dim);
      mean += delta[i];
    }
    mean /= static_cast<double>(n_clients);
    double max_norm = 0.0;
    for (auto& dv : delta) {
      dv -= mean;
      max_norm = std::max(max_norm, dv.norm());
    }
    for (auto& dv : delta) dv *= zeta_target / max_norm;
  }

  FederatedProblem p;
  for (int i = 0; i < n_clients; ++i) {
    Vector bi = bbar + delta[i];
    // x_i* solves A x = b_i; use the known eigendecomposition.
    Vector opt = q * ((q.transpose() * bi).array() / lam.array()).matrix();
    p.clients.push_back(std::make_shared<QuadraticClient>(
        a, bi, 0.0, mu, beta, opt));
    p.client_optima.push_back(std::move(opt));
  }
  p.xstar = xstar;
  p.zeta_exact = zeta_target;
  p.min_curvature_dir = q.col(0);
  return p;
}

LogisticClient::LogisticClient(Matrix x, Vector labels_pm1, double reg)
    : x_(std::move(x)), y_(std::move(labels_pm1)), reg_(reg) {
  if (x_.rows() != y_.size()) {
    throw std::invalid_argument("logistic: rows/labels mismatch");
  }
  // beta estimate: || (1/4n) X'X || + reg via power iteration.
  const int d = static_cast<int>(x_.cols());
  const double n = static_cast<double>(x_.rows());
  Vector v = Vector::Ones(d) / std::sqrt(static_cast<double>(d));
  double lam = 0.0;
  for (int it = 0; it < 50; ++it) {
    Vector w = x_.transpose() * (x_ * v) / (4.0 * n);
    lam = w.norm();
    if (lam <= 0) break;
    v = w / lam;
  }
  beta_ = lam + reg_;
}

double LogisticClient::value(const Vector& w) const {
  const Vector m = (x_ * w).cwiseProduct(y_);
  double s = 0.0;
  for (int j = 0; j < m.size(); ++j) {
    // log(1 + exp(-m)) computed stably
    const double t = -m[j];
    s += t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
  }
  return s / static_cast<double>(m.size()) + 0.5 * reg_ * w.squaredNorm();
}

Vector LogisticClient::grad(const Vector& w) const {
  const Vector m = (x_ * w).cwiseProduct(y_);
  Vector coef(m.size());
  for (int j = 0; j < m.size(); ++j) {
    coef[j] = -y_[j] / (1.0 + std::exp(m[j]));  // -y * sigmoid(-m)
  }
  return x_.transpose() * coef / static_cast<double>(m.size()) + reg_ * w;
}

FederatedProblem make_shuffle_federation(int n_clients, double homogeneity_pct,
                                         int samples_per_class,
                                         std::uint64_t seed) {
  constexpr int kClasses = 10;
  constexpr int kDim = 10;
  constexpr double kScale = 3.0;
  constexpr double kReg = 0.1;
  if (homogeneity_pct < 0.0 || homogeneity_pct > 100.0) {
    throw std::invalid_argument("shuffle: homogeneity must be in [0, 100]");
  }
  if (n_clients * 2 > kClasses) {
    throw std::invalid_argument("shuffle: need N*2 <= number of classes (10)");
  }
  if (samples_per_class < 1) {
    throw std::invalid_argument("shuffle: samples_per_class must be >= 1");
  }

  struct Sample {
    Vector x;
    double y;
  };
  std::vector<Sample> all;
  all.reserve(kClasses * samples_per_class);
  for (int c = 0; c < kClasses; ++c) {
    for (int j = 0; j < samples_per_class; ++j) {
      RngStream s(seed, static_cast<std::uint32_t>(c),
                  static_cast<std::uint32_t>(j), 0, Purpose::kProblemInit);
      Vector x = gaussian(s, kDim);
      x[c] += kScale;
      all.push_back({std::move(x), c % 2 == 0 ? -1.0 : 1.0});
    }
  }

  const int shuffled_per_class =
      static_cast<int>(std::lround(samples_per_class * homogeneity_pct / 100.0));
  std::vector<std::vector<int>> owned(n_clients);

  // Dedicated (non-shuffled) tail of classes 2i and 2i+1 goes to client i.
  std::vector<int> pool;
  for (int c = 0; c < kClasses; ++c) {
    for (int j = 0; j < samples_per_class; ++j) {
      const int idx = c * samples_per_class + j;
      if (j < shuffled_per_class) {
        pool.push_back(idx);
      } else if (c / 2 < n_clients) {
        owned[c / 2].push_back(idx);
      } else {
        pool.push_back(idx);  // classes beyond 2N have no owner
      }
    }
  }

  // Uniform shuffle of the pool, then even partition.
  RngStream sh(seed, 0, 0, 1, Purpose::kProblemInit);
  for (std::size_t i = pool.size(); i > 1; --i) {
    const std::uint32_t j =
        uniform_below(sh, i - 1, static_cast<std::uint32_t>(i));
    std::swap(pool[i - 1], pool[j]);
  }
  for (std::size_t i = 0; i < pool.size(); ++i) {
    owned[i % n_clients].push_back(pool[i]);
  }

  FederatedProblem p;
  for (int i = 0; i < n_clients; ++i) {
    const auto& idxs = owned[i];
    Matrix x(idxs.size(), kDim);
    Vector y(idxs.size());
    for (std::size_t r = 0; r < idxs.size(); ++r) {
      x.row(r) = all[idxs[r]].x.transpose();
      y[r] = all[idxs[r]].y;
    }
    p.clients.push_back(std::make_shared<LogisticClient>(x, y, kReg));
  }
  return p;
}

FederatedProblem make_hard_problem(const HardInstance& inst) {
  auto shared = std::make_shared<HardInstance>(inst);
  FederatedProblem p;
  p.clients.push_back(std::make_shared<HardClient>(shared, 1));
  p.clients.push_back(std::make_shared<HardClient>(shared, 2));
  if (inst.mu > 0) {
    p.xstar = shared->global_optimum();
    p.client_optima = {shared->client1_optimum(), shared->client2_optimum()};
  }
  p.hard = shared;
  return p;
}

FederatedProblem smooth_problem(const FederatedProblem& p, double mu_reg,
                                const Vector& anchor) {
  FederatedProblem out;
  for (const auto& c : p.clients) {
    out.clients.push_back(smooth(c, mu_reg, anchor));
  }
  // The regularized optimum is not carried over; callers that need it must
  // solve for it themselves.
  return out;
}

}  // namespace fedchain
