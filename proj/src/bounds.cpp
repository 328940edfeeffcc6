#include "ensctl/bounds.hpp"

#include "ensctl/parallel.hpp"
#include "ensctl/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace ensctl {

namespace {

double capped(double p) { return std::clamp(p, 0.0, 1.0); }

// exp(-2 N eps^2 / (9 s^2)), with s = 0 meaning no randomness in that term.
double tail_term(double n, double eps, double scale) {
  if (scale == 0.0) return 0.0;
  return std::exp(-2.0 * n * eps * eps / (9.0 * scale * scale));
}

}  // namespace

double weighted_hoeffding_bound(const BoundSpec& spec) {
  if (spec.range_hi < spec.range_lo) throw InvalidArgument("range_hi < range_lo");
  if (spec.deviation < 0.0) throw InvalidArgument("negative deviation");
  const double width = spec.range_hi - spec.range_lo;
  if (width == 0.0) return spec.deviation > 0.0 ? 0.0 : 1.0;
  const double t = spec.deviation;
  return capped(2.0 * std::exp(-spec.exponent_constant * t * t /
                               (width * width * spec.weights.squared_sum())));
}

double control_beta(double a_bound, const Vector& x0) {
  return std::max({a_bound, 1.0, x0.norm()});
}

double control_variance_bound(const VarianceBoundInputs& in) {
  const double s = tail_term(in.samples, in.epsilon, in.beta * in.gamma_xf) +
                   tail_term(in.samples, in.epsilon, in.beta * in.gamma_x0) +
                   tail_term(in.samples, in.epsilon, in.beta * in.gamma_a);
  return capped(2.0 * in.dimension_constant * s);
}

double state_variance_bound(const VarianceBoundInputs& in) {
  const double s = tail_term(in.samples, in.epsilon, in.u_norm * in.gamma_b) +
                   tail_term(in.samples, in.epsilon, in.a_norm * in.gamma_x0) +
                   tail_term(in.samples, in.epsilon, in.x0_norm * in.gamma_a);
  return capped(2.0 * in.dimension_constant * s);
}

double one_step_error_bound(double xf_err, double x0_err, double a_norm) {
  if (xf_err < 0.0 || x0_err < 0.0 || a_norm < 0.0) throw InvalidArgument("negative error bound input");
  return xf_err + a_norm * x0_err;
}

std::pair<double, double> norm_constants(Index n) {
  if (n < 1) throw InvalidArgument("dimension must be positive");
  const double r = std::sqrt(static_cast<double>(n));
  return {r, r};
}

double dimension_constant(Index n) {
  const auto [eta, mu] = norm_constants(n);
  return std::max(eta, mu);
}

std::vector<DeviationPoint> deviation_frequencies(std::span<const double> deviations,
                                                  std::span<const double> t_grid) {
  std::vector<double> sorted(deviations.begin(), deviations.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<DeviationPoint> out;
  out.reserve(t_grid.size());
  const double total = sorted.empty() ? 1.0 : static_cast<double>(sorted.size());
  for (double t : t_grid) {
    const auto first = std::lower_bound(sorted.begin(), sorted.end(), t);
    out.push_back({t, static_cast<double>(sorted.end() - first) / total});
  }
  return out;
}

std::vector<DeviationPoint> empirical_deviation_curve(const Vector& target, Method method,
                                                      std::span<const double> t_grid,
                                                      std::size_t trials,
                                                      std::size_t samples_per_trial,
                                                      const RngStream& rng, DeviationNorm norm,
                                                      unsigned threads) {
  if (trials < 100) throw InvalidArgument("deviation curves need at least 100 trials");
  if (samples_per_trial == 0) throw EmptySampleSet();
  const Matrix target_m = target;
  std::vector<double> dev(trials);
  parallel_for(trials, threads, [&](std::size_t i) {
    const auto draws = draw_ensemble(target, samples_per_trial, rng.substream(i));
    std::vector<SampleMatrix> samples;
    samples.reserve(draws.size());
    for (const auto& d : draws) samples.push_back(as_matrix(d));
    AlseOptions opts;
    opts.accept_unconverged = true;
    const Vector diff = estimate(method, target_m, std::move(samples), opts).estimate.col(0) - target;
    dev[i] = norm == DeviationNorm::l2 ? diff.norm() : diff.cwiseAbs().maxCoeff();
  });
  return deviation_frequencies(dev, t_grid);
}

Matrix component_deviation_frequencies(const Vector& target, std::span<const double> t_grid,
                                       std::size_t trials, std::size_t samples_per_trial,
                                       const RngStream& rng, unsigned threads) {
  if (trials < 100) throw InvalidArgument("deviation curves need at least 100 trials");
  if (samples_per_trial == 0) throw EmptySampleSet();
  const VectorSampler sampler(target);
  const Index n = target.size();
  const auto grid = static_cast<Index>(t_grid.size());
  Matrix deviations(n, static_cast<Index>(trials));
  parallel_for(trials, threads, [&](std::size_t i) {
    RngStream stream = rng.substream(i);
    Vector sum = Vector::Zero(n);
    for (std::size_t s = 0; s < samples_per_trial; ++s) {
      const SampleVector d = sampler.draw(stream);
      sum(d.support) += d.value;
    }
    deviations.col(static_cast<Index>(i)) =
        (sum / static_cast<double>(samples_per_trial) - target).cwiseAbs();
  });
  Matrix freq(n, grid);
  for (Index k = 0; k < n; ++k) {
    const Vector row = deviations.row(k).transpose();
    const auto points = deviation_frequencies(std::span<const double>(row.data(), row.size()), t_grid);
    for (Index g = 0; g < grid; ++g) freq(k, g) = points[static_cast<std::size_t>(g)].frequency;
  }
  return freq;
}

}  // namespace ensctl
