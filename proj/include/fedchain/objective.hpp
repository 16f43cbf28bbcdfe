#pragma once

#include <memory>
#include <optional>

#include "fedchain/vec.hpp"

namespace fedchain {

enum class ConvexityClass { kStronglyConvex, kConvex, kPl, kNonconvex };

// One client's loss F_i with exact value/gradient access.  Implementations
// are immutable after construction; evaluation is pure and thread-safe.
class ClientObjective {
 public:
  virtual ~ClientObjective() = default;
  virtual int dim() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector grad(const Vector& x) const = 0;
  virtual double smoothness() const = 0;         // beta
  virtual double strong_convexity() const = 0;   // mu, 0 for general convex
  virtual ConvexityClass convexity_class() const = 0;
  virtual std::optional<Vector> optimum() const { return std::nullopt; }
};

using ObjectivePtr = std::shared_ptr<const ClientObjective>;

// F_i(x) = 0.5 x'Ax - b'x + c with A symmetric PSD.
class QuadraticClient : public ClientObjective {
 public:
  QuadraticClient(Matrix a, Vector b, double c, double mu, double beta,
                  std::optional<Vector> opt = std::nullopt)
      : a_(std::move(a)), b_(std::move(b)), c_(c), mu_(mu), beta_(beta),
        opt_(std::move(opt)) {
    if (a_.rows() != a_.cols() || a_.rows() != b_.size()) {
      throw std::invalid_argument("QuadraticClient: shape mismatch");
    }
    if (beta_ < mu_) throw std::invalid_argument("QuadraticClient: beta < mu");
  }

  int dim() const override { return static_cast<int>(b_.size()); }
  double value(const Vector& x) const override {
    return 0.5 * x.dot(a_ * x) - b_.dot(x) + c_;
  }
  Vector grad(const Vector& x) const override { return a_ * x - b_; }
  double smoothness() const override { return beta_; }
  double strong_convexity() const override { return mu_; }
  ConvexityClass convexity_class() const override {
    return mu_ > 0 ? ConvexityClass::kStronglyConvex : ConvexityClass::kConvex;
  }
  std::optional<Vector> optimum() const override { return opt_; }

  const Matrix& hessian() const { return a_; }
  const Vector& linear() const { return b_; }

 private:
  Matrix a_;
  Vector b_;
  double c_;
  double mu_;
  double beta_;
  std::optional<Vector> opt_;
};

// Scalar f(x) = x^2 + 3 sin^2(x): nonconvex, 8-smooth, mu-PL with the
// grid-certified mu = 1/32.
class PlObjective : public ClientObjective {
 public:
  static constexpr double kPlMu = 1.0 / 32.0;

  int dim() const override { return 1; }
  double value(const Vector& x) const override {
    const double t = x[0];
    const double s = std::sin(t);
    return t * t + 3.0 * s * s;
  }
  Vector grad(const Vector& x) const override {
    Vector g(1);
    g[0] = 2.0 * x[0] + 3.0 * std::sin(2.0 * x[0]);
    return g;
  }
  double smoothness() const override { return 8.0; }
  double strong_convexity() const override { return kPlMu; }
  ConvexityClass convexity_class() const override { return ConvexityClass::kPl; }
  std::optional<Vector> optimum() const override {
    return Vector::Zero(1).eval();
  }
};

// F_mu(x) = base(x) + (mu_reg/2) ||x - anchor||^2.
class SmoothedObjective : public ClientObjective {
 public:
  SmoothedObjective(ObjectivePtr base, double mu_reg, Vector anchor)
      : base_(std::move(base)), mu_reg_(mu_reg), anchor_(std::move(anchor)) {
    if (mu_reg_ <= 0) throw std::invalid_argument("smooth: mu_reg must be > 0");
    if (anchor_.size() != base_->dim()) {
      throw std::invalid_argument("smooth: anchor dimension mismatch");
    }
  }

  int dim() const override { return base_->dim(); }
  double value(const Vector& x) const override {
    return base_->value(x) + 0.5 * mu_reg_ * (x - anchor_).squaredNorm();
  }
  Vector grad(const Vector& x) const override {
    return base_->grad(x) + mu_reg_ * (x - anchor_);
  }
  double smoothness() const override { return base_->smoothness() + mu_reg_; }
  double strong_convexity() const override {
    return base_->strong_convexity() + mu_reg_;
  }
  ConvexityClass convexity_class() const override {
    return ConvexityClass::kStronglyConvex;
  }

  const Vector& anchor() const { return anchor_; }
  double mu_reg() const { return mu_reg_; }
  const ClientObjective& base() const { return *base_; }

 private:
  ObjectivePtr base_;
  double mu_reg_;
  Vector anchor_;
};

inline ObjectivePtr smooth(ObjectivePtr base, double mu_reg, Vector anchor) {
  return std::make_shared<SmoothedObjective>(std::move(base), mu_reg,
                                             std::move(anchor));
}

inline ObjectivePtr make_pl_objective() {
  return std::make_shared<PlObjective>();
}

}  // namespace fedchain
