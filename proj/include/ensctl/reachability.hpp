#pragma once

#include "ensctl/rng.hpp"
#include "ensctl/types.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ensctl {

class NotColumnStochastic : public Error {
 public:
  using Error::Error;
};

/// [B, AB, ..., A^{n-1} B] built by repeated multiplication.
Matrix controllability_matrix(const Matrix& a, const Matrix& b);

/// (I - 11^T / n) M: removes the span(1) component of every column.
Matrix project_ones_complement(const Matrix& m);

/// Outcome of the simplex-constrained reachability test.
struct ReachabilityReport {
  bool ones_orthogonality = false;  // |1^T B|_inf <= tol
  double ones_b_norm = 0.0;
  Index projected_rank = 0;
  Index required_rank = 0;  // n - 1
  bool verdict = false;
  std::vector<double> singular_values;

  /// Flat `key=value` lines, one field per line.
  std::string to_key_value() const;
};

/// A column-stochastic (A, B) keeps states on the simplex and can move
/// between any two simplex points iff 1^T B = 0 and the ones-complement
/// projection of the controllability matrix has rank n - 1. `tol` is both
/// the absolute column-sum tolerance and the relative singular-value cutoff.
ReachabilityReport simplex_reachability_check(const Matrix& a, const Matrix& b, double tol = 1e-9);

struct ReachResult {
  bool reachable = false;
  std::vector<Vector> controls;  // u(0..K-1), minimum norm
  double residual = 0.0;         // |x(K) - xf| after forward simulation
};

/// Least-squares K-step input sequence from x0 to xf under (A, B); reachable
/// when the simulated endpoint lies within tol * (1 + |xf|) of xf.
ReachResult reachable_in_k(const Matrix& a, const Matrix& b, const Vector& x0, const Vector& xf,
                           int steps, double tol = 1e-9);

/// Endpoint of x(k+1) = A x(k) + B u(k) from x0 under the given inputs.
Vector simulate(const Matrix& a, const Matrix& b, const Vector& x0, std::span<const Vector> controls);

/// Monte Carlo check that fixed inputs steering the true system from x0 to
/// xf also steer the stochastic ensemble system there on average.
///
/// Every run draws its own initial state and fresh A, B realizations at each
/// step. For each prefix size p, the uniform average of the first p run
/// endpoints is compared with xf; the returned value per prefix is the
/// fraction of `repetitions` independent experiments in which that average
/// is farther than epsilon (2-norm) from xf.
std::vector<double> empirical_approx_reachability(const DltiSystem& truth, const Vector& x0,
                                                  std::span<const Vector> controls,
                                                  const Vector& xf,
                                                  std::span<const std::size_t> prefix_sizes,
                                                  std::size_t repetitions, double epsilon,
                                                  const RngStream& rng, unsigned threads = 1);

}  // namespace ensctl
