#pragma once

#include "ensctl/rng.hpp"
#include "ensctl/types.hpp"

#include <cstddef>
#include <vector>

namespace ensctl {

/// Absolute mass of a vector: the sum of |w_i|.
double gamma_vec(const Vector& w);

/// Largest column absolute mass of a matrix.
double gamma_mat(const Matrix& m);

/// One draw of the singleton-support vector scheme.
///
/// Indices are 0-based. `value` is +gamma or -gamma of the source vector,
/// signed like the source entry at `support`.
struct SampleVector {
  Index dimension = 0;
  Index support = 0;
  double value = 0.0;

  Vector dense() const;
  friend bool operator==(const SampleVector&, const SampleVector&) = default;
};

/// Per-column draw; `support < 0` marks a zero column.
struct ColumnSample {
  Index support = -1;
  double value = 0.0;

  friend bool operator==(const ColumnSample&, const ColumnSample&) = default;
};

/// One draw of a matrix: every nonzero column carries a single entry of
/// magnitude equal to that column's absolute mass.
struct SampleMatrix {
  Index rows = 0;
  Index cols = 0;
  std::vector<ColumnSample> columns;
  std::vector<double> column_gammas;

  Matrix dense() const;
  /// acc += weight * sample
  void accumulate(Matrix& acc, double weight) const;
  /// sample * x
  Vector apply(const Vector& x) const;
  /// Frobenius inner product with a dense matrix of the same shape.
  double inner(const Matrix& other) const;
  double squared_norm() const;

  friend bool operator==(const SampleMatrix&, const SampleMatrix&) = default;
};

/// Column view of a vector sample.
SampleMatrix as_matrix(const SampleVector& s);

/// Precomputed inverse-CDF sampler for one vector.
///
/// The draw maps a uniform u in [0,1) to the smallest index whose
/// cumulative mass exceeds u * gamma, so ties resolve toward the lower index
/// and zero entries are never selected.
class VectorSampler {
 public:
  explicit VectorSampler(const Vector& w);

  Index dimension() const { return static_cast<Index>(cumulative_.size()); }
  double gamma() const { return gamma_; }

  SampleVector draw(RngStream& rng) const;
  SampleVector draw_from_uniform(double u) const;

 private:
  std::vector<double> cumulative_;
  std::vector<double> signs_;
  double gamma_ = 0.0;
};

/// Column-by-column sampler for a matrix; zero columns pass through as zero.
class MatrixSampler {
 public:
  explicit MatrixSampler(const Matrix& m);

  Index rows() const { return rows_; }
  Index cols() const { return static_cast<Index>(columns_.size()); }
  double gamma() const;
  const std::vector<double>& column_gammas() const { return gammas_; }

  SampleMatrix draw(RngStream& rng) const;

 private:
  Index rows_ = 0;
  std::vector<std::vector<double>> columns_;  // cumulative |m_ij| per column
  std::vector<std::vector<double>> signs_;
  std::vector<double> gammas_;
};

SampleVector sample_vector(const Vector& w, RngStream& rng);
SampleMatrix sample_matrix(const Matrix& m, RngStream& rng);

/// `count` independent vector draws; draw i uses rng.substream(i), so the
/// list is identical for any thread count. Throws ZeroMass for a zero target.
std::vector<SampleVector> draw_ensemble(const Vector& target, std::size_t count,
                                        const RngStream& rng, unsigned threads = 1);

std::vector<SampleMatrix> draw_matrix_ensemble(const Matrix& target, std::size_t count,
                                               const RngStream& rng, unsigned threads = 1);

/// Upper bound on the spectral norm of any draw of `m`: sqrt(sum_j gamma_j^2).
double sample_norm_bound(const Matrix& m);

}  // namespace ensctl
