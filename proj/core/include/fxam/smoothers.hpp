#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace fxam {

enum class SmootherKind {
  /// Exact minimiser of weighted squared error plus a second-difference
  /// roughness penalty; symmetric and shrinking.
  Penalized,
  /// Epanechnikov Nadaraya-Watson smoother evaluated by fast sum updating.
  FastKernel,
};

/// One scatterplot smoothing problem. x must be sorted ascending; an empty
/// w means unit weights. `bandwidth` is used by the kernel smoothers and
/// `lambda` by the penalized smoother.
struct SmoothRequest {
  std::span<const double> x;
  std::span<const double> y;
  std::span<const double> w;
  double bandwidth = 1.0;
  double lambda = 0.0;

  void validate(bool needs_bandwidth) const;
  double weight(std::size_t i) const { return w.empty() ? 1.0 : w[i]; }
};

/// 3(1 - u^2)/4 on [-1, 1], zero outside.
double epanechnikov(double u);

/// Rule-of-thumb bandwidth c * range(x) * n^(-1/5); falls back to 1 when x
/// has zero range.
double default_bandwidth(std::span<const double> x, double factor = 0.5,
                         std::size_t n_effective = 0);

/// O(N^2) Nadaraya-Watson reference implementation.
std::vector<double> naive_kernel_smooth(const SmoothRequest& req);

/// Counts elementary window updates performed by fast_kernel_smooth.
struct OpCounter {
  std::uint64_t updates = 0;
};

/// O(N) Nadaraya-Watson smoother. Because the Epanechnikov weight is a
/// quadratic in x_j, every window sum decomposes into running sums of
/// w, w*x, w*x^2 (and the same times y). Sums are kept per unit-bandwidth
/// block relative to the block origin so the quadratic expansion never
/// subtracts large cumulative totals.
std::vector<double> fast_kernel_smooth(const SmoothRequest& req, OpCounter* counter = nullptr);

/// argmin_f sum_i w_i (y_i - f_i)^2 + lambda * f' K f with K = D'D, where
/// row i of D is the quadrature-weighted second divided difference on
/// (x_i, x_i+1, x_i+2). Solved with a pentadiagonal LDL' factorisation.
std::vector<double> penalized_smooth(const SmoothRequest& req);

/// f' K f for the penalty used by penalized_smooth, in O(n).
double roughness_penalty(std::span<const double> knots, std::span<const double> f);

/// Dense K = D'D on the given knots (test support).
Eigen::MatrixXd penalty_matrix(std::span<const double> knots);

/// K as (row, column, value) triplets placed at `offset + index_of[k]` for
/// knot k, so that several penalties can share one sparse system.
void append_penalty_triplets(std::span<const double> knots, std::span<const std::size_t> index_of,
                             double scale, std::vector<Eigen::Triplet<double>>& out);

inline constexpr std::size_t kDefaultDenseBound = 500;

/// Dense matrix of the linear smoother on the given knots: column j is the
/// smoother applied to the j-th unit vector. `parameter` is lambda for the
/// penalized backend and the bandwidth for the kernel backend.
Eigen::MatrixXd smoother_matrix(SmootherKind kind, std::span<const double> knots,
                                double parameter, std::span<const double> weights = {},
                                std::size_t bound = kDefaultDenseBound);

/// Dispatches to the backend selected by `kind`.
std::vector<double> smooth(SmootherKind kind, const SmoothRequest& req);

}  // namespace fxam
