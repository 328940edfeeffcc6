#include "ensctl/control.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace ensctl {

double default_rank_tolerance(const Matrix& m) {
  return static_cast<double>(std::max(m.rows(), m.cols())) * std::numeric_limits<double>::epsilon();
}

Matrix pseudo_inverse(const Matrix& m, double tol) {
  if (!m.allFinite()) throw InvalidArgument("pseudo_inverse needs a finite matrix");
  if (m.size() == 0) return Matrix::Zero(m.cols(), m.rows());
  if (tol < 0.0) tol = default_rank_tolerance(m);
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sigma = svd.singularValues();
  const double cutoff = tol * (sigma.size() > 0 ? sigma(0) : 0.0);
  Vector inv = Vector::Zero(sigma.size());
  for (Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > cutoff) inv(i) = 1.0 / sigma(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

OneStepControl one_step_control(const Matrix& a_hat, const Matrix& b, const Vector& x_from,
                                const Vector& x_to) {
  return ControlSolver(b).solve(a_hat, x_from, x_to);
}

ControlSolver::ControlSolver(Matrix b, double tol) : b_(std::move(b)) {
  b_pinv_ = pseudo_inverse(b_, tol);
  range_complement_ = Matrix::Identity(b_.rows(), b_.rows()) - b_ * b_pinv_;
}

OneStepControl ControlSolver::solve_rhs(const Vector& rhs) const {
  if (rhs.size() != b_.rows()) throw ShapeMismatch("target dimension does not match B");
  Vector u = b_pinv_ * rhs;
  const double residual = (b_ * u - rhs).norm();
  return {std::move(u), residual};
}

OneStepControl ControlSolver::solve(const Matrix& a_hat, const Vector& x_from,
                                    const Vector& x_to) const {
  if (a_hat.rows() != b_.rows() || a_hat.cols() != x_from.size()) {
    throw ShapeMismatch("A_hat and x_from do not match B");
  }
  return solve_rhs(x_to - a_hat * x_from);
}

OneStepControl ControlSolver::solve(const SampleMatrix& a_hat, const SampleMatrix& x_from,
                                    const SampleMatrix& x_to) const {
  const Index n = b_.rows();
  if (a_hat.rows != n || a_hat.cols != n || x_from.rows != n || x_to.rows != n ||
      x_from.cols != 1 || x_to.cols != 1) {
    throw ShapeMismatch("sampled entities do not match B");
  }
  // Both terms have at most one nonzero entry, so B^+ and I - BB^+ act on two columns.
  Vector u = Vector::Zero(b_.cols());
  Vector res = Vector::Zero(n);
  auto add = [&](Index row, double value) {
    u += value * b_pinv_.col(row);
    res += value * range_complement_.col(row);
  };
  const ColumnSample& xt = x_to.columns[0];
  if (xt.support >= 0) add(xt.support, xt.value);
  const ColumnSample& xs = x_from.columns[0];
  if (xs.support >= 0) {
    const ColumnSample& ac = a_hat.columns[static_cast<std::size_t>(xs.support)];
    if (ac.support >= 0) add(ac.support, -ac.value * xs.value);
  }
  return {std::move(u), res.norm()};
}

Vector combine_controls_uniform(std::span<const Vector> controls) {
  if (controls.empty()) throw InvalidArgument("cannot combine an empty control list");
  Vector sum = Vector::Zero(controls[0].size());
  for (const Vector& u : controls) {
    if (u.size() != sum.size()) throw ShapeMismatch("controls have different dimensions");
    sum += u;
  }
  return sum / static_cast<double>(controls.size());
}

EnsembleSamples draw_control_ensemble(const Vector& x0, const Vector& xf, const Matrix& a,
                                      std::size_t count, const RngStream& rng, unsigned threads) {
  EnsembleSamples s;
  s.x0 = draw_matrix_ensemble(x0, count, rng.substream(0), threads);
  s.xf = draw_matrix_ensemble(xf, count, rng.substream(1), threads);
  s.a = draw_matrix_ensemble(a, count, rng.substream(2), threads);
  return s;
}

StreamingState streaming_control(const DltiSystem& truth, const Vector& x0, const Vector& xf,
                                 StreamingSources sources, const StreamingOptions& options,
                                 RngStream& rng) {
  if (!(options.error_bound > 0.0) && options.stop_on_error) {
    throw InvalidArgument("error bound must be positive");
  }
  const ControlSolver solver(truth.b);
  std::array<SampleSource*, 3> source{&sources.x0, &sources.xf, &sources.a};
  std::array<bool, 3> live{true, true, true};

  auto first = [](SampleSource& src, const char* name) {
    std::optional<SampleMatrix> s = src();
    if (!s) throw InvalidArgument(std::string("no initial realization for ") + name);
    return *s;
  };
  StreamingState st;
  st.x0_hat = first(sources.x0, "x0").dense();
  st.xf_hat = first(sources.xf, "xf").dense();
  st.a_hat = first(sources.a, "A").dense();
  st.v = solver.solve(st.a_hat, st.x0_hat, st.xf_hat).u;
  st.last_error = std::numeric_limits<double>::infinity();

  const Matrix x0_truth = x0;
  const Matrix xf_truth = xf;
  while (!(options.stop_on_error && st.last_error <= options.error_bound)) {
    if (st.iterations >= options.max_iter) {
      st.stop = StopReason::max_iterations;
      return st;
    }
    std::array<int, 3> open{};
    int open_count = 0;
    for (int i = 0; i < 3; ++i) {
      if (live[static_cast<std::size_t>(i)]) open[static_cast<std::size_t>(open_count++)] = i;
    }
    if (open_count == 0) {
      st.stop = StopReason::sources_exhausted;
      return st;
    }
    const int branch = open[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(open_count)))];
    std::optional<SampleMatrix> fresh = (*source[static_cast<std::size_t>(branch)])();
    if (!fresh) {
      live[static_cast<std::size_t>(branch)] = false;
      continue;
    }
    SlseStep step{1.0, 0.0, {}};
    double entity_residual = 0.0;
    if (branch == 0) {
      step = slse_step(Matrix(st.x0_hat), *fresh, x0_truth);
      st.x0_hat = step.estimate.col(0);
      entity_residual = (st.x0_hat - x0).norm();
    } else if (branch == 1) {
      step = slse_step(Matrix(st.xf_hat), *fresh, xf_truth);
      st.xf_hat = step.estimate.col(0);
      entity_residual = (st.xf_hat - xf).norm();
    } else {
      step = slse_step(st.a_hat, *fresh, truth.a);
      st.a_hat = std::move(step.estimate);
      entity_residual = (st.a_hat - truth.a).norm();
    }
    const Vector v_new = solver.solve(st.a_hat, st.x0_hat, st.xf_hat).u;
    st.last_error = ((step.w1 - 1.0) * st.v + step.w2 * v_new).norm();
    st.v = step.w1 * st.v + step.w2 * v_new;
    ++st.iterations;
    st.branches.push_back(branch);
    st.blend_weights.push_back(step.w1);
    st.errors.push_back(st.last_error);
    st.entity_residuals.push_back(entity_residual);
  }
  st.stop = StopReason::error_bound;
  return st;
}

StreamingSources list_sources(const EnsembleSamples& samples) {
  auto make = [](const std::vector<SampleMatrix>& list) -> SampleSource {
    return [&list, next = std::size_t{0}]() mutable -> std::optional<SampleMatrix> {
      if (next >= list.size()) return std::nullopt;
      return list[next++];
    };
  };
  return {make(samples.x0), make(samples.xf), make(samples.a)};
}

namespace {

void check_ensemble(const DltiSystem& truth, const Vector& x0, const Vector& xf,
                    const EnsembleSamples& samples) {
  if (samples.x0.empty()) throw EmptySampleSet();
  if (samples.xf.size() != samples.x0.size() || samples.a.size() != samples.x0.size()) {
    throw ShapeMismatch("entity ensembles must have equal sample counts");
  }
  if (x0.size() != truth.n() || xf.size() != truth.n()) {
    throw ShapeMismatch("state dimension does not match the system");
  }
}

}  // namespace

EnsembleControl ensemble_control(const DltiSystem& truth, const Vector& x0, const Vector& xf,
                                 const EnsembleSamples& samples, Method method,
                                 const EnsembleControlOptions& options) {
  check_ensemble(truth, x0, xf, samples);
  const ControlSolver solver(truth.b);
  EnsembleControl out;

  switch (method) {
    case Method::uniform: {
      const std::size_t n = samples.size();
      Vector sum = Vector::Zero(truth.m());
      for (std::size_t s = 0; s < n; ++s) {
        OneStepControl c = solver.solve(samples.a[s], samples.x0[s], samples.xf[s]);
        sum += c.u;
        out.max_realization_residual = std::max(out.max_realization_residual, c.residual);
      }
      out.u = sum / static_cast<double>(n);
      const WeightVector w = uniform_weights(n);
      out.x0_estimate = weighted_sum(std::span<const SampleMatrix>(samples.x0), w).col(0);
      out.xf_estimate = weighted_sum(std::span<const SampleMatrix>(samples.xf), w).col(0);
      out.a_estimate = weighted_sum(std::span<const SampleMatrix>(samples.a), w);
      return out;
    }
    case Method::alse: {
      AlseOptions opts = options.alse;
      EnsembleEstimate e0 = estimate_alse(Matrix(x0), samples.x0, opts);
      EnsembleEstimate ef = estimate_alse(Matrix(xf), samples.xf, opts);
      EnsembleEstimate ea = estimate_alse(truth.a, samples.a, opts);
      out.unconverged_solves = int(!e0.converged) + int(!ef.converged) + int(!ea.converged);
      out.x0_estimate = e0.estimate.col(0);
      out.xf_estimate = ef.estimate.col(0);
      out.a_estimate = std::move(ea.estimate);
      out.u = solver.solve(out.a_estimate, out.x0_estimate, out.xf_estimate).u;
      return out;
    }
    case Method::slse: {
      StreamingOptions so;
      so.stop_on_error = false;
      so.max_iter = std::numeric_limits<int>::max();
      RngStream rng(options.streaming_seed, hash_tag("slse-branch"));
      StreamingState st = streaming_control(truth, x0, xf, list_sources(samples), so, rng);
      out.u = std::move(st.v);
      out.x0_estimate = std::move(st.x0_hat);
      out.xf_estimate = std::move(st.xf_hat);
      out.a_estimate = std::move(st.a_hat);
      return out;
    }
  }
  throw InvalidArgument("unknown method");
}

TrajectoryResult track_trajectory(const DltiSystem& system, std::span<const Vector> reference,
                                  Method method, std::size_t samples_per_step,
                                  const RngStream& rng, const EnsembleControlOptions& options,
                                  unsigned threads) {
  if (reference.size() < 2) throw InvalidArgument("reference trajectory needs at least two states");
  for (const Vector& x : reference) {
    if (x.size() != system.n()) throw ShapeMismatch("reference state dimension does not match A");
  }
  const ControlSolver solver(system.b);
  TrajectoryResult r;
  r.reference.assign(reference.begin(), reference.end());
  r.realized.push_back(reference[0]);
  r.actual.push_back(reference[0]);
  for (std::size_t t = 0; t + 1 < reference.size(); ++t) {
    const Vector& from = reference[t];
    const Vector& to = reference[t + 1];
    EnsembleSamples samples =
        draw_control_ensemble(from, to, system.a, samples_per_step, rng.substream(t), threads);
    EnsembleControlOptions step_options = options;
    step_options.streaming_seed = hash_words({options.streaming_seed, t});
    EnsembleControl c = ensemble_control(system, from, to, samples, method, step_options);
    const Vector u_actual = solver.solve(system.a, from, to).u;

    r.realized.push_back(system.step(r.realized.back(), c.u));
    r.actual.push_back(system.step(r.actual.back(), u_actual));
    const double denom = r.actual.back().norm();
    const double diff = (r.realized.back() - r.actual.back()).norm();
    r.relative_errors.push_back(denom > 0.0 ? diff / denom : diff);
    r.controls.push_back(std::move(c.u));
    r.actual_controls.push_back(u_actual);
  }
  return r;
}

}  // namespace ensctl
