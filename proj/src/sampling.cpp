#include "ensctl/sampling.hpp"

#include "ensctl/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace ensctl {

double gamma_vec(const Vector& w) { return w.cwiseAbs().sum(); }

double gamma_mat(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().colwise().sum().maxCoeff();
}

Vector SampleVector::dense() const {
  Vector v = Vector::Zero(dimension);
  v(support) = value;
  return v;
}

Matrix SampleMatrix::dense() const {
  Matrix out = Matrix::Zero(rows, cols);
  accumulate(out, 1.0);
  return out;
}

void SampleMatrix::accumulate(Matrix& acc, double weight) const {
  for (Index j = 0; j < cols; ++j) {
    const ColumnSample& c = columns[static_cast<std::size_t>(j)];
    if (c.support >= 0) acc(c.support, j) += weight * c.value;
  }
}

Vector SampleMatrix::apply(const Vector& x) const {
  Vector y = Vector::Zero(rows);
  for (Index j = 0; j < cols; ++j) {
    const ColumnSample& c = columns[static_cast<std::size_t>(j)];
    if (c.support >= 0) y(c.support) += c.value * x(j);
  }
  return y;
}

double SampleMatrix::inner(const Matrix& other) const {
  double s = 0.0;
  for (Index j = 0; j < cols; ++j) {
    const ColumnSample& c = columns[static_cast<std::size_t>(j)];
    if (c.support >= 0) s += c.value * other(c.support, j);
  }
  return s;
}

double SampleMatrix::squared_norm() const {
  double s = 0.0;
  for (const ColumnSample& c : columns) s += c.value * c.value;
  return s;
}

SampleMatrix as_matrix(const SampleVector& s) {
  SampleMatrix m;
  m.rows = s.dimension;
  m.cols = 1;
  m.columns = {ColumnSample{s.support, s.value}};
  m.column_gammas = {std::abs(s.value)};
  return m;
}

namespace {

// Smallest index with cumulative > target; zero-mass entries share the
// cumulative value of their predecessor and so are never returned.
Index pick(const std::vector<double>& cumulative, double target) {
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
  if (it == cumulative.end()) {
    // Rounding pushed target to the total; fall back to the last entry with mass.
    it = std::lower_bound(cumulative.begin(), cumulative.end(), cumulative.back());
  }
  return static_cast<Index>(it - cumulative.begin());
}

void build_cumulative(const double* data, Index n, std::vector<double>& cumulative,
                      std::vector<double>& signs) {
  cumulative.resize(static_cast<std::size_t>(n));
  signs.resize(static_cast<std::size_t>(n));
  double running = 0.0;
  for (Index i = 0; i < n; ++i) {
    running += std::abs(data[i]);
    cumulative[static_cast<std::size_t>(i)] = running;
    signs[static_cast<std::size_t>(i)] = data[i] > 0 ? 1.0 : (data[i] < 0 ? -1.0 : 0.0);
  }
}

}  // namespace

VectorSampler::VectorSampler(const Vector& w) {
  if (!w.allFinite()) throw InvalidArgument("vector to sample must be finite");
  gamma_ = gamma_vec(w);
  if (!(gamma_ > 0.0)) throw ZeroMass();
  build_cumulative(w.data(), w.size(), cumulative_, signs_);
}

SampleVector VectorSampler::draw(RngStream& rng) const { return draw_from_uniform(rng.uniform()); }

SampleVector VectorSampler::draw_from_uniform(double u) const {
  const Index j = pick(cumulative_, u * cumulative_.back());
  return SampleVector{dimension(), j, signs_[static_cast<std::size_t>(j)] * gamma_};
}

MatrixSampler::MatrixSampler(const Matrix& m) : rows_(m.rows()) {
  if (!m.allFinite()) throw InvalidArgument("matrix to sample must be finite");
  const auto cols = static_cast<std::size_t>(m.cols());
  columns_.resize(cols);
  signs_.resize(cols);
  gammas_.resize(cols);
  for (Index j = 0; j < m.cols(); ++j) {
    const auto k = static_cast<std::size_t>(j);
    build_cumulative(m.col(j).data(), rows_, columns_[k], signs_[k]);
    gammas_[k] = rows_ > 0 ? columns_[k].back() : 0.0;
  }
}

double MatrixSampler::gamma() const {
  return gammas_.empty() ? 0.0 : *std::max_element(gammas_.begin(), gammas_.end());
}

SampleMatrix MatrixSampler::draw(RngStream& rng) const {
  SampleMatrix s;
  s.rows = rows_;
  s.cols = cols();
  s.columns.resize(columns_.size());
  s.column_gammas = gammas_;
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (!(gammas_[j] > 0.0)) continue;
    // One uniform per nonzero column keeps draws independent across columns.
    const double u = rng.uniform();
    const Index r = pick(columns_[j], u * gammas_[j]);
    s.columns[j] = ColumnSample{r, signs_[j][static_cast<std::size_t>(r)] * gammas_[j]};
  }
  return s;
}

SampleVector sample_vector(const Vector& w, RngStream& rng) { return VectorSampler(w).draw(rng); }

SampleMatrix sample_matrix(const Matrix& m, RngStream& rng) { return MatrixSampler(m).draw(rng); }

std::vector<SampleVector> draw_ensemble(const Vector& target, std::size_t count,
                                        const RngStream& rng, unsigned threads) {
  if (count == 0) throw InvalidArgument("ensemble size must be positive");
  const VectorSampler sampler(target);
  std::vector<SampleVector> out(count);
  parallel_for(count, threads, [&](std::size_t i) {
    RngStream sub = rng.substream(i);
    out[i] = sampler.draw(sub);
  });
  return out;
}

std::vector<SampleMatrix> draw_matrix_ensemble(const Matrix& target, std::size_t count,
                                               const RngStream& rng, unsigned threads) {
  if (count == 0) throw InvalidArgument("ensemble size must be positive");
  const MatrixSampler sampler(target);
  std::vector<SampleMatrix> out(count);
  parallel_for(count, threads, [&](std::size_t i) {
    RngStream sub = rng.substream(i);
    out[i] = sampler.draw(sub);
  });
  return out;
}

double sample_norm_bound(const Matrix& m) {
  return std::sqrt(m.cwiseAbs().colwise().sum().squaredNorm());
}

}  // namespace ensctl
