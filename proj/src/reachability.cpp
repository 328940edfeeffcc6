#include "ensctl/reachability.hpp"

#include "ensctl/control.hpp"
#include "ensctl/parallel.hpp"
#include "ensctl/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ensctl {

Matrix controllability_matrix(const Matrix& a, const Matrix& b) {
  const Index n = a.rows();
  if (a.cols() != n || b.rows() != n) throw ShapeMismatch("controllability needs square A and B with n rows");
  const Index m = b.cols();
  Matrix c(n, n * m);
  Matrix block = b;
  for (Index k = 0; k < n; ++k) {
    c.middleCols(k * m, m) = block;
    if (k + 1 < n) block = a * block;
  }
  return c;
}

Matrix project_ones_complement(const Matrix& m) {
  if (m.rows() == 0) return m;
  return m.rowwise() - m.colwise().mean();
}

std::string ReachabilityReport::to_key_value() const {
  std::ostringstream out;
  out.precision(17);
  out << "ones_orthogonality=" << (ones_orthogonality ? "true" : "false") << '\n'
      << "ones_b_norm=" << ones_b_norm << '\n'
      << "projected_rank=" << projected_rank << '\n'
      << "required_rank=" << required_rank << '\n'
      << "verdict=" << (verdict ? "true" : "false") << '\n'
      << "singular_values=";
  for (std::size_t i = 0; i < singular_values.size(); ++i) {
    if (i > 0) out << ',';
    out << singular_values[i];
  }
  out << '\n';
  return out.str();
}

ReachabilityReport simplex_reachability_check(const Matrix& a, const Matrix& b, double tol) {
  const Index n = a.rows();
  if (n == 0 || a.cols() != n || b.rows() != n) throw ShapeMismatch("reachability needs square A and B with n rows");
  const Eigen::RowVectorXd col_sums = a.colwise().sum();
  for (Index j = 0; j < n; ++j) {
    if (std::abs(col_sums(j) - 1.0) > tol) {
      throw NotColumnStochastic("column " + std::to_string(j) + " of A sums to " +
                                std::to_string(col_sums(j)));
    }
  }
  ReachabilityReport r;
  r.required_rank = n - 1;
  r.ones_b_norm = b.cols() > 0 ? b.colwise().sum().cwiseAbs().maxCoeff() : 0.0;
  r.ones_orthogonality = r.ones_b_norm <= tol;

  const Matrix projected = project_ones_complement(controllability_matrix(a, b));
  Eigen::BDCSVD<Matrix> svd(projected);
  const Vector& sigma = svd.singularValues();
  r.singular_values.assign(sigma.data(), sigma.data() + sigma.size());
  const double cutoff = sigma.size() > 0 ? tol * sigma(0) : 0.0;
  for (Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > cutoff && sigma(i) > 0.0) ++r.projected_rank;
  }
  r.verdict = r.ones_orthogonality && r.projected_rank == r.required_rank;
  return r;
}

Vector simulate(const Matrix& a, const Matrix& b, const Vector& x0, std::span<const Vector> controls) {
  Vector x = x0;
  for (const Vector& u : controls) x = a * x + b * u;
  return x;
}

ReachResult reachable_in_k(const Matrix& a, const Matrix& b, const Vector& x0, const Vector& xf,
                           int steps, double tol) {
  if (steps < 1) throw InvalidArgument("reachable_in_k needs at least one step");
  const Index n = a.rows();
  const Index m = b.cols();
  if (a.cols() != n || b.rows() != n || x0.size() != n || xf.size() != n) {
    throw ShapeMismatch("reachable_in_k operands do not match");
  }
  // Columns ordered [A^{K-1}B ... AB B] so block k multiplies u(k).
  const auto k_steps = static_cast<Index>(steps);
  Matrix stacked(n, k_steps * m);
  Matrix block = b;
  Vector free_response = x0;
  for (Index j = 0; j < k_steps; ++j) {
    stacked.middleCols((k_steps - 1 - j) * m, m) = block;
    block = a * block;
    free_response = a * free_response;
  }
  const Vector stacked_u = pseudo_inverse(stacked) * (xf - free_response);

  ReachResult r;
  r.controls.reserve(static_cast<std::size_t>(steps));
  for (Index k = 0; k < k_steps; ++k) r.controls.push_back(stacked_u.segment(k * m, m));
  r.residual = (simulate(a, b, x0, r.controls) - xf).norm();
  r.reachable = r.residual <= tol * (1.0 + xf.norm());
  return r;
}

std::vector<double> empirical_approx_reachability(const DltiSystem& truth, const Vector& x0,
                                                  std::span<const Vector> controls,
                                                  const Vector& xf,
                                                  std::span<const std::size_t> prefix_sizes,
                                                  std::size_t repetitions, double epsilon,
                                                  const RngStream& rng, unsigned threads) {
  if (prefix_sizes.empty() || repetitions == 0) throw InvalidArgument("need prefix sizes and repetitions");
  if (!std::is_sorted(prefix_sizes.begin(), prefix_sizes.end()) || prefix_sizes.front() == 0) {
    throw InvalidArgument("prefix sizes must be positive and increasing");
  }
  const Vector endpoint = simulate(truth.a, truth.b, x0, controls);
  if ((endpoint - xf).norm() > 1e-8 * (1.0 + xf.norm())) {
    throw InvalidArgument("controls do not steer the true system from x0 to xf");
  }
  const MatrixSampler x0_sampler{Matrix(x0)};
  const MatrixSampler a_sampler(truth.a);
  const MatrixSampler b_sampler(truth.b);
  const std::size_t runs = prefix_sizes.back();

  std::vector<std::vector<char>> far(repetitions, std::vector<char>(prefix_sizes.size(), 0));
  parallel_for(repetitions, threads, [&](std::size_t rep) {
    const RngStream rep_stream = rng.substream(rep);
    Vector sum = Vector::Zero(x0.size());
    std::size_t next_prefix = 0;
    for (std::size_t s = 0; s < runs; ++s) {
      RngStream run = rep_stream.substream(s);
      Vector x = x0_sampler.draw(run).dense();
      for (const Vector& u : controls) {
        const SampleMatrix a_hat = a_sampler.draw(run);
        const SampleMatrix b_hat = b_sampler.draw(run);
        x = a_hat.apply(x) + b_hat.apply(u);
      }
      sum += x;
      while (next_prefix < prefix_sizes.size() && prefix_sizes[next_prefix] == s + 1) {
        const Vector mean = sum / static_cast<double>(s + 1);
        far[rep][next_prefix] = (mean - xf).norm() > epsilon ? 1 : 0;
        ++next_prefix;
      }
    }
  });

  std::vector<double> freq(prefix_sizes.size(), 0.0);
  for (std::size_t p = 0; p < prefix_sizes.size(); ++p) {
    std::size_t count = 0;
    for (std::size_t rep = 0; rep < repetitions; ++rep) count += static_cast<std::size_t>(far[rep][p]);
    freq[p] = static_cast<double>(count) / static_cast<double>(repetitions);
  }
  return freq;
}

}  // namespace ensctl
