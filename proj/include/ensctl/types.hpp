#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace ensctl {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

/// A vector with zero absolute mass cannot be turned into a sampling distribution.
class ZeroMass : public Error {
 public:
  ZeroMass() : Error("vector has zero absolute mass; nothing to sample") {}
};

class EmptySampleSet : public Error {
 public:
  EmptySampleSet() : Error("sample set is empty") {}
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Ground-truth discrete-time LTI pair x(k+1) = A x(k) + B u(k).
struct DltiSystem {
  Matrix a;
  Matrix b;

  DltiSystem() = default;
  DltiSystem(Matrix a_matrix, Matrix b_matrix);

  Index n() const { return a.rows(); }
  Index m() const { return b.cols(); }

  Vector step(const Vector& x, const Vector& u) const { return a * x + b * u; }
};

}  // namespace ensctl
