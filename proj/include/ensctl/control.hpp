#pragma once

#include "ensctl/averaging.hpp"
#include "ensctl/rng.hpp"
#include "ensctl/sampling.hpp"
#include "ensctl/types.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace ensctl {

/// Default relative singular-value cutoff: max(rows, cols) * machine epsilon.
double default_rank_tolerance(const Matrix& m);

/// Moore-Penrose pseudoinverse via SVD. Singular values at or below
/// tol * sigma_max are treated as zero; a negative tol selects the default.
Matrix pseudo_inverse(const Matrix& m, double tol = -1.0);

/// Minimum-norm least-squares input for x_to = A_hat x_from + B u.
/// `residual` is |B u - (x_to - A_hat x_from)|, zero when the target is in range(B).
struct OneStepControl {
  Vector u;
  double residual;
};

OneStepControl one_step_control(const Matrix& a_hat, const Matrix& b, const Vector& x_from,
                                const Vector& x_to);

/// Caches B and its pseudoinverse for repeated one-step solves.
class ControlSolver {
 public:
  explicit ControlSolver(Matrix b, double tol = -1.0);

  const Matrix& b() const { return b_; }
  const Matrix& b_pinv() const { return b_pinv_; }

  OneStepControl solve(const Matrix& a_hat, const Vector& x_from, const Vector& x_to) const;
  OneStepControl solve_rhs(const Vector& rhs) const;
  /// Per-realization control B^+(xf_s - A_s x0_s) for sampled entities.
  OneStepControl solve(const SampleMatrix& a_hat, const SampleMatrix& x_from,
                       const SampleMatrix& x_to) const;

 private:
  Matrix b_;
  Matrix b_pinv_;
  Matrix range_complement_;  // I - B B^+
};

/// Arithmetic mean of controls, summed in list order.
Vector combine_controls_uniform(std::span<const Vector> controls);

/// Realizations of the initial state, final state and state matrix. Entry
/// sigma of each list belongs to run sigma. States are n x 1 sample matrices
/// so that a zero state (e.g. the origin as target) samples to zero.
struct EnsembleSamples {
  std::vector<SampleMatrix> x0;
  std::vector<SampleMatrix> xf;
  std::vector<SampleMatrix> a;

  std::size_t size() const { return x0.size(); }
};

/// Draws `count` positional realizations of (x0, xf, A).
EnsembleSamples draw_control_ensemble(const Vector& x0, const Vector& xf, const Matrix& a,
                                      std::size_t count, const RngStream& rng,
                                      unsigned threads = 1);

enum class StopReason { error_bound, max_iterations, sources_exhausted };

/// Loop state of the sequential (streaming) control computation.
struct StreamingState {
  Vector x0_hat;
  Vector xf_hat;
  Matrix a_hat;
  Vector v;
  int iterations = 0;
  double last_error = 0.0;
  StopReason stop = StopReason::max_iterations;

  std::vector<int> branches;          // 0 = x0, 1 = xf, 2 = A
  std::vector<double> blend_weights;  // w1 of each update
  std::vector<double> errors;         // |(w1 - 1) v + w2 v'| of each update
  std::vector<double> entity_residuals;  // |estimate - truth| of the updated entity
};

using SampleSource = std::function<std::optional<SampleMatrix>()>;

struct StreamingSources {
  SampleSource x0;
  SampleSource xf;
  SampleSource a;
};

struct StreamingOptions {
  double error_bound = 1e-3;
  int max_iter = 100000;
  /// When false the loop runs until every source is exhausted or max_iter.
  bool stop_on_error = true;
};

/// Sequential control computation with two-term least-squares blending.
///
/// Each iteration picks one entity uniformly at random, blends its estimate
/// with a fresh draw using the weights that best fit the true entity, then
/// blends the control with the same weights. Sources that return nullopt
/// are skipped from then on.
StreamingState streaming_control(const DltiSystem& truth, const Vector& x0, const Vector& xf,
                                 StreamingSources sources, const StreamingOptions& options,
                                 RngStream& rng);

/// Sources that hand out the stored realizations in order, then run dry.
StreamingSources list_sources(const EnsembleSamples& samples);

struct EnsembleControlOptions {
  AlseOptions alse;
  std::uint64_t streaming_seed = 0;  // branch choice of the slse path
};

struct EnsembleControl {
  Vector u;
  /// Entity estimates the control was computed from (uniform: plain means).
  Vector x0_estimate;
  Vector xf_estimate;
  Matrix a_estimate;
  double max_realization_residual = 0.0;  // uniform path only
  int unconverged_solves = 0;             // alse path with accept_unconverged
};

/// Combines per-realization controls into one input for the true system.
///
/// uniform: mean over sigma of B^+(xf_s - A_s x0_s) with positional pairing.
/// alse:    simplex least-squares weights per entity; the control is
///          B^+(F_xf - F_A F_x0), which equals the product-weighted
///          combination sum_{i,j,k} wf_k wA_i w0_j B^+(xf_k - A_i x0_j).
/// slse:    the streaming loop over the stored realizations, consuming all of them.
///
/// The truth is needed only by alse and slse, which fit weights against it.
EnsembleControl ensemble_control(const DltiSystem& truth, const Vector& x0, const Vector& xf,
                                 const EnsembleSamples& samples, Method method,
                                 const EnsembleControlOptions& options = {});

struct TrajectoryResult {
  std::vector<Vector> reference;
  std::vector<Vector> realized;        // states under the computed controls
  std::vector<Vector> actual;          // states under B^+(x(t+1) - A x(t))
  std::vector<Vector> controls;
  std::vector<Vector> actual_controls;
  std::vector<double> relative_errors;  // per step t = 1..K: |realized - actual| / |actual|
};

/// Tracks a reference trajectory one step at a time, applying every
/// combined control to the true system.
TrajectoryResult track_trajectory(const DltiSystem& system, std::span<const Vector> reference,
                                  Method method, std::size_t samples_per_step,
                                  const RngStream& rng, const EnsembleControlOptions& options = {},
                                  unsigned threads = 1);

}  // namespace ensctl
