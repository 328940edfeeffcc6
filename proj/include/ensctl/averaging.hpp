#pragma once

#include "ensctl/sampling.hpp"
#include "ensctl/types.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ensctl {

enum class Method { uniform, alse, slse };

std::string to_string(Method m);
/// Parses "uniform", "alse" or "slse"; throws InvalidArgument otherwise.
Method parse_method(std::string_view name);

/// A point of the probability simplex: nonnegative entries summing to one.
class WeightVector {
 public:
  static constexpr double kSumTolerance = 1e-12;

  /// Validates the simplex invariant; throws InvalidArgument on violation.
  explicit WeightVector(Vector weights);

  const Vector& values() const { return weights_; }
  Index size() const { return weights_.size(); }
  double operator[](Index i) const { return weights_(i); }
  double squared_sum() const { return weights_.squaredNorm(); }

 private:
  Vector weights_;
};

struct EnsembleEstimate {
  std::vector<SampleMatrix> samples;
  WeightVector weights;
  Matrix estimate;
  double residual;  // Frobenius / 2-norm of estimate - target
  bool converged = true;
};

WeightVector uniform_weights(std::size_t count);

/// Euclidean projection onto the simplex (sort-based threshold algorithm).
WeightVector project_simplex(const Vector& y);

Matrix weighted_sum(std::span<const Matrix> samples, const WeightVector& w);
Matrix weighted_sum(std::span<const SampleMatrix> samples, const WeightVector& w);
Vector weighted_sum(std::span<const SampleVector> samples, const WeightVector& w);

/// Closed-form least-squares weights for singleton-support samples of `target`.
///
/// Sample j hitting component k gets |target_k| / (gamma(target) * n_k),
/// where n_k counts the samples hitting k. The result attains the minimum
/// residual^2 = sum of target_i^2 over components no sample hits, and sums to
/// (hit mass) / gamma, which is below one whenever a nonzero component is
/// missed. It is therefore returned as a raw vector rather than a WeightVector.
struct AlseVectorSolution {
  Vector weights;
  double mass_deficit;  // 1 - sum(weights)
};
AlseVectorSolution alse_vector_weights(const Vector& target, std::span<const SampleVector> samples);

/// Least-squares optimum restricted to the simplex for singleton-support
/// samples. Equal to alse_vector_weights when every nonzero component is
/// hit; otherwise the deficit is spread evenly over the hit components,
/// which is the exact constrained minimiser.
WeightVector alse_vector_simplex_weights(const Vector& target,
                                         std::span<const SampleVector> samples);

struct AlseOptions {
  double tol = 1e-10;  // certified objective gap, relative to max(1, |target|^2)
  int max_iter = 10000;
  /// estimate_alse only: use the best iterate instead of throwing NonConvergence.
  bool accept_unconverged = false;
};

/// Raised when the simplex solver exhausts its iteration budget.
class NonConvergence : public Error {
 public:
  NonConvergence(WeightVector best, double gradient_norm, double gap, int iterations);

  const WeightVector& best() const { return best_; }
  double gradient_norm() const { return gradient_norm_; }
  double gap() const { return gap_; }
  int iterations() const { return iterations_; }

 private:
  WeightVector best_;
  double gradient_norm_;
  double gap_;
  int iterations_;
};

struct AlseReport {
  WeightVector weights;
  double objective;  // squared residual
  double gap;        // Frank-Wolfe duality gap, an upper bound on objective - optimum
  int iterations;
};

/// min over the simplex of |target - sum_i w_i samples_i|^2 by accelerated
/// projected gradient (step 1/L) started from uniform weights.
AlseReport solve_alse(const Matrix& target, std::span<const Matrix> samples,
                      const AlseOptions& options = {});
AlseReport solve_alse(const Matrix& target, std::span<const SampleMatrix> samples,
                      const AlseOptions& options = {});

WeightVector alse_general_weights(const Matrix& target, std::span<const Matrix> samples,
                                  const AlseOptions& options = {});
WeightVector alse_general_weights(const Matrix& target, std::span<const SampleMatrix> samples,
                                  const AlseOptions& options = {});

struct SlseStep {
  double w1;
  double w2;
  Matrix estimate;
};

/// Best convex blend of the previous estimate and a new sample against the target.
SlseStep slse_step(const Matrix& prev_estimate, const Matrix& new_sample, const Matrix& target);
SlseStep slse_step(const Matrix& prev_estimate, const SampleMatrix& new_sample,
                   const Matrix& target);

/// Estimates of `target` from one sample list under each averaging rule.
/// For slse the samples are consumed in order and weights are tracked so the
/// estimate stays an explicit convex combination of the samples.
EnsembleEstimate estimate_uniform(const Matrix& target, std::vector<SampleMatrix> samples);
EnsembleEstimate estimate_alse(const Matrix& target, std::vector<SampleMatrix> samples,
                               const AlseOptions& options = {});
EnsembleEstimate estimate_slse(const Matrix& target, std::vector<SampleMatrix> samples);
EnsembleEstimate estimate(Method method, const Matrix& target, std::vector<SampleMatrix> samples,
                          const AlseOptions& options = {});

}  // namespace ensctl
