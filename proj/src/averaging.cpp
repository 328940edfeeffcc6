#include "ensctl/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include <Eigen/Sparse>

namespace ensctl {

std::string to_string(Method m) {
  switch (m) {
    case Method::uniform:
      return "uniform";
    case Method::alse:
      return "alse";
    case Method::slse:
      return "slse";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "uniform") return Method::uniform;
  if (name == "alse") return Method::alse;
  if (name == "slse") return Method::slse;
  throw InvalidArgument("unknown averaging method '" + std::string(name) + "'");
}

WeightVector::WeightVector(Vector weights) : weights_(std::move(weights)) {
  if (weights_.size() == 0) throw InvalidArgument("weight vector is empty");
  if (!weights_.allFinite()) throw InvalidArgument("weights must be finite");
  if (weights_.minCoeff() < 0.0) throw InvalidArgument("weights must be nonnegative");
  if (std::abs(weights_.sum() - 1.0) > kSumTolerance) {
    throw InvalidArgument("weights must sum to one");
  }
}

WeightVector uniform_weights(std::size_t count) {
  if (count == 0) throw InvalidArgument("uniform weights need a positive count");
  return WeightVector(Vector::Constant(static_cast<Index>(count), 1.0 / static_cast<double>(count)));
}

WeightVector project_simplex(const Vector& y) {
  if (y.size() == 0) throw InvalidArgument("cannot project an empty vector");
  if (!y.allFinite()) throw InvalidArgument("vector to project must be finite");
  std::vector<double> sorted(y.data(), y.data() + y.size());
  std::stable_sort(sorted.begin(), sorted.end(), std::greater<>());
  double running = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    running += sorted[k];
    const double candidate = (running - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) theta = candidate;
  }
  Vector w = (y.array() - theta).max(0.0).matrix();
  const double total = w.sum();
  if (total > 0.0) w /= total;
  return WeightVector(std::move(w));
}

namespace {

void check_count(std::size_t samples, Index weights) {
  if (samples == 0) throw EmptySampleSet();
  if (static_cast<Index>(samples) != weights) {
    throw ShapeMismatch("sample count does not match weight count");
  }
}

}  // namespace

Matrix weighted_sum(std::span<const Matrix> samples, const WeightVector& w) {
  check_count(samples.size(), w.size());
  Matrix out = Matrix::Zero(samples[0].rows(), samples[0].cols());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].rows() != out.rows() || samples[i].cols() != out.cols()) {
      throw ShapeMismatch("samples have different shapes");
    }
    out += w[static_cast<Index>(i)] * samples[i];
  }
  return out;
}

Matrix weighted_sum(std::span<const SampleMatrix> samples, const WeightVector& w) {
  check_count(samples.size(), w.size());
  Matrix out = Matrix::Zero(samples[0].rows, samples[0].cols);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].rows != out.rows() || samples[i].cols != out.cols()) {
      throw ShapeMismatch("samples have different shapes");
    }
    samples[i].accumulate(out, w[static_cast<Index>(i)]);
  }
  return out;
}

Vector weighted_sum(std::span<const SampleVector> samples, const WeightVector& w) {
  check_count(samples.size(), w.size());
  Vector out = Vector::Zero(samples[0].dimension);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].dimension != out.size()) throw ShapeMismatch("samples have different dimensions");
    out(samples[i].support) += w[static_cast<Index>(i)] * samples[i].value;
  }
  return out;
}

namespace {

// Hit counts per component, after checking that every sample follows the
// singleton scheme for `target`.
std::vector<std::size_t> hit_counts(const Vector& target, std::span<const SampleVector> samples,
                                    double gamma) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(target.size()), 0);
  for (const SampleVector& s : samples) {
    if (s.dimension != target.size() || s.support < 0 || s.support >= target.size()) {
      throw ShapeMismatch("sample does not match target dimension");
    }
    const double t = target(s.support);
    const bool sign_ok = (t > 0 && s.value > 0) || (t < 0 && s.value < 0);
    if (!sign_ok || std::abs(std::abs(s.value) - gamma) > 1e-12 * gamma) {
      throw InvalidArgument("sample was not drawn from the target by the singleton scheme");
    }
    ++counts[static_cast<std::size_t>(s.support)];
  }
  return counts;
}

}  // namespace

AlseVectorSolution alse_vector_weights(const Vector& target, std::span<const SampleVector> samples) {
  if (samples.empty()) throw EmptySampleSet();
  const double gamma = gamma_vec(target);
  const auto n = static_cast<Index>(samples.size());
  if (!(gamma > 0.0)) {
    return {Vector::Constant(n, 1.0 / static_cast<double>(n)), 0.0};
  }
  const auto counts = hit_counts(target, samples, gamma);
  Vector w(n);
  for (Index j = 0; j < n; ++j) {
    const Index k = samples[static_cast<std::size_t>(j)].support;
    w(j) = std::abs(target(k)) / (gamma * static_cast<double>(counts[static_cast<std::size_t>(k)]));
  }
  const double deficit = 1.0 - w.sum();
  return {std::move(w), deficit};
}

WeightVector alse_vector_simplex_weights(const Vector& target,
                                         std::span<const SampleVector> samples) {
  if (samples.empty()) throw EmptySampleSet();
  const double gamma = gamma_vec(target);
  const auto n = static_cast<Index>(samples.size());
  if (!(gamma > 0.0)) return uniform_weights(samples.size());
  const auto counts = hit_counts(target, samples, gamma);

  double hit_mass = 0.0;
  std::size_t hit_components = 0;
  for (Index k = 0; k < target.size(); ++k) {
    if (counts[static_cast<std::size_t>(k)] > 0) {
      hit_mass += std::abs(target(k));
      ++hit_components;
    }
  }
  // Total weight per hit component is |t_k|/gamma plus an equal share of the deficit.
  const double share = std::max(0.0, 1.0 - hit_mass / gamma) / static_cast<double>(hit_components);
  Vector w(n);
  for (Index j = 0; j < n; ++j) {
    const Index k = samples[static_cast<std::size_t>(j)].support;
    const double per_component = std::abs(target(k)) / gamma + share;
    w(j) = per_component / static_cast<double>(counts[static_cast<std::size_t>(k)]);
  }
  w /= w.sum();
  return WeightVector(std::move(w));
}

NonConvergence::NonConvergence(WeightVector best, double gradient_norm, double gap, int iterations)
    : Error("simplex least-squares solver did not converge within " + std::to_string(iterations) +
            " iterations"),
      best_(std::move(best)),
      gradient_norm_(gradient_norm),
      gap_(gap),
      iterations_(iterations) {}

namespace {

// Samples flattened (column-major) into a compressed column list so dense
// and singleton-support inputs share one solver.
class SampleOperator {
 public:
  SampleOperator(Index rows, Index cols) : rows_(rows), cols_(cols) { offsets_.push_back(0); }

  void add(const Matrix& m) {
    check(m.rows(), m.cols());
    for (Index j = 0; j < m.cols(); ++j) {
      for (Index i = 0; i < m.rows(); ++i) {
        if (m(i, j) != 0.0) push(j * rows_ + i, m(i, j));
      }
    }
    offsets_.push_back(index_.size());
  }

  void add(const SampleMatrix& s) {
    check(s.rows, s.cols);
    for (Index j = 0; j < s.cols; ++j) {
      const ColumnSample& c = s.columns[static_cast<std::size_t>(j)];
      if (c.support >= 0 && c.value != 0.0) push(j * rows_ + c.support, c.value);
    }
    offsets_.push_back(index_.size());
  }

  Index count() const { return static_cast<Index>(offsets_.size()) - 1; }

  // S_F^T S_F and S_F^T t restricted to the samples in `subset`.
  void reduced_normal_equations(const std::vector<Index>& subset, const Vector& t, Matrix& gram,
                                Vector& rhs) const {
    std::vector<Eigen::Triplet<double>> entries;
    for (std::size_t k = 0; k < subset.size(); ++k) {
      const auto i = static_cast<std::size_t>(subset[k]);
      for (std::size_t e = offsets_[i]; e < offsets_[i + 1]; ++e) {
        entries.emplace_back(index_[e], static_cast<Index>(k), value_[e]);
      }
    }
    Eigen::SparseMatrix<double> s(dim(), static_cast<Index>(subset.size()));
    s.setFromTriplets(entries.begin(), entries.end());
    gram = Matrix(s.transpose() * s);
    rhs = s.transpose() * t;
  }
  Index dim() const { return rows_ * cols_; }

  void apply(const Vector& w, Vector& out) const {
    out.setZero(dim());
    for (Index i = 0; i < count(); ++i) {
      const double wi = w(i);
      if (wi == 0.0) continue;
      for (std::size_t e = offsets_[static_cast<std::size_t>(i)];
           e < offsets_[static_cast<std::size_t>(i) + 1]; ++e) {
        out(index_[e]) += wi * value_[e];
      }
    }
  }

  void adjoint(const Vector& r, Vector& out) const {
    out.resize(count());
    for (Index i = 0; i < count(); ++i) {
      double s = 0.0;
      for (std::size_t e = offsets_[static_cast<std::size_t>(i)];
           e < offsets_[static_cast<std::size_t>(i) + 1]; ++e) {
        s += value_[e] * r(index_[e]);
      }
      out(i) = s;
    }
  }

 private:
  void check(Index rows, Index cols) const {
    if (rows != rows_ || cols != cols_) throw ShapeMismatch("sample shape differs from target");
  }
  void push(Index flat, double v) {
    index_.push_back(flat);
    value_.push_back(v);
  }

  Index rows_;
  Index cols_;
  std::vector<std::size_t> offsets_;
  std::vector<Index> index_;
  std::vector<double> value_;
};

// Largest eigenvalue of S^T S by power iteration.
double gram_top_eigenvalue(const SampleOperator& op) {
  const Index n = op.count();
  Vector v = Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  Vector sv, u;
  double lambda = 0.0;
  for (int it = 0; it < 500; ++it) {
    op.apply(v, sv);
    op.adjoint(sv, u);
    const double next = u.norm();
    if (next == 0.0) return 0.0;
    v = u / next;
    if (std::abs(next - lambda) <= 1e-9 * next) return next;
    lambda = next;
  }
  return lambda;
}

// Exact minimiser over the affine hull of the support of w, kept only when
// it stays inside the simplex. FISTA finds the optimal face quickly but
// crawls along degenerate ones; this jumps to the face optimum.
constexpr std::size_t kMaxPolishSupport = 400;

std::optional<Vector> polish(const SampleOperator& op, const Vector& t, const Vector& w) {
  std::vector<Index> support;
  for (Index i = 0; i < w.size(); ++i) {
    if (w(i) > 0.0) support.push_back(i);
  }
  if (support.size() < 2 || support.size() > kMaxPolishSupport) return std::nullopt;
  const auto k = static_cast<Index>(support.size());
  Matrix gram;
  Vector rhs;
  op.reduced_normal_equations(support, t, gram, rhs);
  Matrix kkt = Matrix::Zero(k + 1, k + 1);
  kkt.topLeftCorner(k, k) = 2.0 * gram;
  kkt.col(k).head(k).setOnes();
  kkt.row(k).head(k).setOnes();
  Vector r(k + 1);
  r.head(k) = 2.0 * rhs;
  r(k) = 1.0;
  const Vector z = kkt.completeOrthogonalDecomposition().solve(r).head(k);
  if (!z.allFinite() || z.minCoeff() < -1e-12) return std::nullopt;
  Vector out = Vector::Zero(w.size());
  for (Index i = 0; i < k; ++i) out(support[static_cast<std::size_t>(i)]) = std::max(0.0, z(i));
  const double total = out.sum();
  if (!(total > 0.0)) return std::nullopt;
  return Vector(out / total);
}

AlseReport run_solver(const Matrix& target, const SampleOperator& op, const AlseOptions& options) {
  if (op.count() == 0) throw EmptySampleSet();
  if (options.max_iter < 1) throw InvalidArgument("max_iter must be at least 1");
  const Index n = op.count();
  const Vector t = Eigen::Map<const Vector>(target.data(), target.size());
  const double scale = std::max(1.0, t.squaredNorm());
  const double tol = options.tol * scale;

  Vector scratch;
  auto evaluate = [&](const Vector& w, Vector& grad) {
    op.apply(w, scratch);
    scratch -= t;
    op.adjoint(scratch, grad);
    grad *= 2.0;
    return scratch.squaredNorm();
  };
  auto fw_gap = [](const Vector& w, const Vector& g) { return std::max(0.0, g.dot(w) - g.minCoeff()); };

  Vector w = Vector::Constant(n, 1.0 / static_cast<double>(n));
  Vector g;
  double f = evaluate(w, g);
  double gap = fw_gap(w, g);
  if (n == 1 || gap <= tol) return {WeightVector(w), f, gap, 0};

  double lipschitz = 2.0 * gram_top_eigenvalue(op) * 1.05;
  if (!(lipschitz > 0.0)) return {WeightVector(w), f, gap, 0};

  Vector best = w;
  double best_f = f;
  double best_gap = gap;
  Vector y = w;
  Vector gy, g_next;
  double momentum = 1.0;
  int it = 1;
  for (; it <= options.max_iter; ++it) {
    evaluate(y, gy);
    Vector w_next = project_simplex(y - gy / lipschitz).values();
    double f_next = evaluate(w_next, g_next);
    if (f_next > f) {
      // Restart the momentum and fall back to a plain projected-gradient step.
      momentum = 1.0;
      w_next = project_simplex(w - g / lipschitz).values();
      f_next = evaluate(w_next, g_next);
      // With L above the true constant this step cannot increase f except
      // by rounding, so only a clear increase means L was underestimated.
      if (f_next > f + 1e-13 * scale) {
        lipschitz *= 2.0;
        y = w;
        continue;
      }
    }
    const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    y = w_next + ((momentum - 1.0) / next_momentum) * (w_next - w);
    momentum = next_momentum;
    w = std::move(w_next);
    f = f_next;
    g = g_next;
    gap = fw_gap(w, g);
    if (f < best_f || (f == best_f && gap < best_gap)) {
      best = w;
      best_f = f;
      best_gap = gap;
    }
    if (gap <= tol) return {WeightVector(w), f, gap, it};

    if (it % 50 == 0) {
      if (std::optional<Vector> cand = polish(op, t, w)) {
        Vector g_cand;
        const double f_cand = evaluate(*cand, g_cand);
        const double gap_cand = fw_gap(*cand, g_cand);
        if (f_cand <= f && gap_cand <= tol) return {WeightVector(*cand), f_cand, gap_cand, it};
        if (f_cand < f) {
          w = std::move(*cand);
          f = f_cand;
          g = std::move(g_cand);
          y = w;
          momentum = 1.0;
          if (f < best_f) {
            best = w;
            best_f = f;
            best_gap = gap_cand;
          }
        }
      }
    }
  }
  Vector probe = w - g / lipschitz;
  const double grad_map = lipschitz * (w - project_simplex(probe).values()).norm();
  throw NonConvergence(WeightVector(best), grad_map, best_gap, options.max_iter);
}

}  // namespace

AlseReport solve_alse(const Matrix& target, std::span<const Matrix> samples,
                      const AlseOptions& options) {
  SampleOperator op(target.rows(), target.cols());
  for (const Matrix& m : samples) op.add(m);
  return run_solver(target, op, options);
}

AlseReport solve_alse(const Matrix& target, std::span<const SampleMatrix> samples,
                      const AlseOptions& options) {
  SampleOperator op(target.rows(), target.cols());
  for (const SampleMatrix& s : samples) op.add(s);
  return run_solver(target, op, options);
}

WeightVector alse_general_weights(const Matrix& target, std::span<const Matrix> samples,
                                  const AlseOptions& options) {
  return solve_alse(target, samples, options).weights;
}

WeightVector alse_general_weights(const Matrix& target, std::span<const SampleMatrix> samples,
                                  const AlseOptions& options) {
  return solve_alse(target, samples, options).weights;
}

namespace {

SlseStep blend(const Matrix& prev, const Matrix& direction, const Matrix& target_minus_sample,
               const auto& make_sample_term) {
  const double dd = direction.squaredNorm();
  if (dd == 0.0) return {1.0, 0.0, prev};
  const double w1 = std::clamp(target_minus_sample.cwiseProduct(direction).sum() / dd, 0.0, 1.0);
  const double w2 = 1.0 - w1;
  Matrix estimate = w1 * prev;
  make_sample_term(estimate, w2);
  return {w1, w2, std::move(estimate)};
}

void check_same_shape(const Matrix& a, Index rows, Index cols) {
  if (a.rows() != rows || a.cols() != cols) throw ShapeMismatch("slse operands differ in shape");
}

}  // namespace

SlseStep slse_step(const Matrix& prev_estimate, const Matrix& new_sample, const Matrix& target) {
  check_same_shape(prev_estimate, new_sample.rows(), new_sample.cols());
  check_same_shape(target, new_sample.rows(), new_sample.cols());
  return blend(prev_estimate, prev_estimate - new_sample, target - new_sample,
               [&](Matrix& est, double w2) { est += w2 * new_sample; });
}

SlseStep slse_step(const Matrix& prev_estimate, const SampleMatrix& new_sample,
                   const Matrix& target) {
  check_same_shape(prev_estimate, new_sample.rows, new_sample.cols);
  check_same_shape(target, new_sample.rows, new_sample.cols);
  Matrix direction = prev_estimate;
  new_sample.accumulate(direction, -1.0);
  Matrix target_minus = target;
  new_sample.accumulate(target_minus, -1.0);
  return blend(prev_estimate, direction, target_minus,
               [&](Matrix& est, double w2) { new_sample.accumulate(est, w2); });
}

namespace {

EnsembleEstimate finish(const Matrix& target, std::vector<SampleMatrix> samples, WeightVector w) {
  Matrix est = weighted_sum(std::span<const SampleMatrix>(samples), w);
  const double residual = (est - target).norm();
  return EnsembleEstimate{std::move(samples), std::move(w), std::move(est), residual, true};
}

bool singleton_vector_samples(const Matrix& target, const std::vector<SampleMatrix>& samples) {
  if (target.cols() != 1) return false;
  for (const SampleMatrix& s : samples) {
    if (s.cols != 1 || s.rows != target.rows()) return false;
  }
  return true;
}

}  // namespace

EnsembleEstimate estimate_uniform(const Matrix& target, std::vector<SampleMatrix> samples) {
  if (samples.empty()) throw EmptySampleSet();
  WeightVector w = uniform_weights(samples.size());
  return finish(target, std::move(samples), std::move(w));
}

EnsembleEstimate estimate_alse(const Matrix& target, std::vector<SampleMatrix> samples,
                               const AlseOptions& options) {
  if (samples.empty()) throw EmptySampleSet();
  if (singleton_vector_samples(target, samples) && target.col(0).cwiseAbs().sum() > 0.0) {
    std::vector<SampleVector> vs;
    vs.reserve(samples.size());
    for (const SampleMatrix& s : samples) {
      vs.push_back(SampleVector{s.rows, s.columns[0].support, s.columns[0].value});
    }
    WeightVector w = alse_vector_simplex_weights(target.col(0), vs);
    return finish(target, std::move(samples), std::move(w));
  }
  try {
    WeightVector w = alse_general_weights(target, std::span<const SampleMatrix>(samples), options);
    return finish(target, std::move(samples), std::move(w));
  } catch (const NonConvergence& e) {
    if (!options.accept_unconverged) throw;
    EnsembleEstimate out = finish(target, std::move(samples), e.best());
    out.converged = false;
    return out;
  }
}

EnsembleEstimate estimate_slse(const Matrix& target, std::vector<SampleMatrix> samples) {
  if (samples.empty()) throw EmptySampleSet();
  const auto n = static_cast<Index>(samples.size());
  // w_i = scale * raw_i, so blending all previous weights by w1 is O(1).
  Vector raw = Vector::Zero(n);
  double scale = 1.0;
  raw(0) = 1.0;
  Matrix current = samples[0].dense();
  for (Index k = 1; k < n; ++k) {
    SlseStep step = slse_step(current, samples[static_cast<std::size_t>(k)], target);
    current = std::move(step.estimate);
    if (step.w1 == 0.0) {
      raw.setZero();
      scale = 1.0;
      raw(k) = 1.0;
      continue;
    }
    scale *= step.w1;
    raw(k) = step.w2 / scale;
    if (scale < 1e-200) {
      raw *= scale;
      scale = 1.0;
    }
  }
  Vector w = raw * scale;
  w /= w.sum();
  return finish(target, std::move(samples), WeightVector(std::move(w)));
}

EnsembleEstimate estimate(Method method, const Matrix& target, std::vector<SampleMatrix> samples,
                          const AlseOptions& options) {
  switch (method) {
    case Method::uniform:
      return estimate_uniform(target, std::move(samples));
    case Method::alse:
      return estimate_alse(target, std::move(samples), options);
    case Method::slse:
      return estimate_slse(target, std::move(samples));
  }
  throw InvalidArgument("unknown method");
}

}  // namespace ensctl
