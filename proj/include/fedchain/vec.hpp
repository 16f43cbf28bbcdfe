#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

#include "fedchain/errors.hpp"

namespace fedchain {

// Dense model iterate x in R^d.  All arithmetic is double precision.
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline bool all_finite(const Vector& v) { return v.allFinite(); }

inline void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) {
    throw NonFiniteError(std::string("non-finite entries in ") + what);
  }
}

// a*x + y.  Dimension mismatch is a hard error.
inline Vector axpy(double a, const Vector& x, const Vector& y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("axpy: dimension mismatch (" +
                                std::to_string(x.size()) + " vs " +
                                std::to_string(y.size()) + ")");
  }
  Vector r = a * x + y;
  require_finite(r, "axpy result");
  return r;
}

inline double sq_norm(const Vector& v) { return v.squaredNorm(); }

}  // namespace fedchain
