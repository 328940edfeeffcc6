#pragma once

#include "ensctl/averaging.hpp"
#include "ensctl/rng.hpp"
#include "ensctl/types.hpp"

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace ensctl {

/// Inputs of the weighted Hoeffding tail bound for variables in [a, b].
struct BoundSpec {
  double range_lo = 0.0;
  double range_hi = 1.0;
  WeightVector weights = uniform_weights(1);
  double deviation = 0.0;
  double exponent_constant = 2.0;  // 2 is the Chernoff optimum; 4 is a tighter, unproven variant
};

/// min(1, 2 exp(-c t^2 / ((b - a)^2 sum w_i^2))).
/// A degenerate range a = b gives 0 for t > 0 and 1 for t = 0.
double weighted_hoeffding_bound(const BoundSpec& spec);

struct VarianceBoundInputs {
  double samples = 1.0;  // N
  double epsilon = 0.0;
  double dimension_constant = 1.0;  // C
  // control bound
  double beta = 1.0;
  double gamma_x0 = 0.0;
  double gamma_xf = 0.0;
  double gamma_a = 0.0;
  // state bound
  double u_norm = 0.0;
  double gamma_b = 0.0;
  double a_norm = 0.0;
  double x0_norm = 0.0;
};

/// beta = max(B_A, 1, |x0|) for the control bound.
double control_beta(double a_bound, const Vector& x0);

/// 2C sum over g in {gamma(xf), gamma(x0), gamma(A)} of exp(-2N eps^2 / (9 beta^2 g^2)),
/// capped at 1. A zero gamma contributes nothing (that entity is deterministic).
double control_variance_bound(const VarianceBoundInputs& in);

/// 2C (e^{c1} + e^{c2} + e^{c3}) with
/// c1 = -2N eps^2 / (9 |u|^2 gamma(B)^2), c2 = ... |A|^2 gamma(x0)^2,
/// c3 = ... |x0|^2 gamma(A)^2; capped at 1.
double state_variance_bound(const VarianceBoundInputs& in);

/// Deterministic bound on |B (combined control - mean control)|: xf_err + |A| x0_err.
double one_step_error_bound(double xf_err, double x0_err, double a_norm);

/// (eta, mu) = (sqrt n, sqrt n); C = max(eta, mu).
std::pair<double, double> norm_constants(Index n);
double dimension_constant(Index n);

enum class DeviationNorm { l2, sup };

struct DeviationPoint {
  double t;
  double frequency;
};

/// Fraction of values with deviation >= t, for every t of the grid.
std::vector<DeviationPoint> deviation_frequencies(std::span<const double> deviations,
                                                  std::span<const double> t_grid);

/// Monte Carlo deviation curve of an ensemble estimate of `target`. Trial i
/// draws `samples_per_trial` samples from rng.substream(i) and records
/// |estimate - target| in the chosen norm. Needs at least 100 trials.
std::vector<DeviationPoint> empirical_deviation_curve(const Vector& target, Method method,
                                                      std::span<const double> t_grid,
                                                      std::size_t trials,
                                                      std::size_t samples_per_trial,
                                                      const RngStream& rng,
                                                      DeviationNorm norm = DeviationNorm::l2,
                                                      unsigned threads = 1);

/// Per-component version for the uniform average: entry (i, g) is the
/// fraction of trials with |estimate_i - target_i| >= t_grid[g].
Matrix component_deviation_frequencies(const Vector& target, std::span<const double> t_grid,
                                       std::size_t trials, std::size_t samples_per_trial,
                                       const RngStream& rng, unsigned threads = 1);

}  // namespace ensctl
