#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "fxam/dataset.hpp"
#include "fxam/error.hpp"

namespace fxam {

/// Ridge normal equations G beta = b with G = Z'Z + lambda I and b = Z'y,
/// assembled from q-hot rows without materialising Z.
struct RidgeSystem {
  std::size_t cardinality = 0;
  double lambda = 0.0;
  Eigen::SparseMatrix<double, Eigen::RowMajor> gram;
  /// Populated when cardinality < kDenseGramThreshold.
  std::optional<Eigen::MatrixXd> dense_gram;
  Eigen::VectorXd rhs;
  /// Set by absorb_intercept: per-label counts s and the record count N.
  /// The operator then becomes G - s s' / N.
  Eigen::VectorXd label_counts;
  double records = 0.0;

  Eigen::VectorXd multiply(const Eigen::VectorXd& v) const;
  /// The operator as a dense matrix.
  Eigen::MatrixXd dense() const;
  /// 0.5 * beta' G beta - b' beta.
  double objective(const Eigen::VectorXd& beta) const;
};

inline constexpr std::size_t kDenseGramThreshold = 64;

/// Builds G (co-occurrence counts plus lambda on the diagonal) and b.
RidgeSystem gram_assemble(const CategoricalEncoding& encoding, std::span<const double> y,
                          double lambda);

/// Profiles out an unpenalized intercept: minimising over (alpha, beta)
/// jointly leaves (G - s s'/N) beta = Z'y - s mean(y) for beta, after which
/// alpha = mean(y - Z beta). The rhs is rebuilt from the stored one.
RidgeSystem absorb_intercept(RidgeSystem system, std::span<const double> y);

/// b = Z'y for an existing encoding; G does not depend on y.
Eigen::VectorXd assemble_rhs(const CategoricalEncoding& encoding, std::span<const double> y);

/// Rayleigh-quotient estimate of the dominant eigenvalue of a symmetric matrix.
struct PowerIterationResult {
  double eigenvalue = 0.0;
  int iterations = 0;
};

PowerIterationResult power_iteration_max_eig(const RidgeSystem& system, double rel_tol = 1e-9,
                                             int max_iter = 1000);
PowerIterationResult power_iteration_max_eig(const Eigen::MatrixXd& matrix, double rel_tol = 1e-9,
                                             int max_iter = 1000);

struct NgaOptions {
  double tol = 1e-8;
  /// 0 selects max(1000, 10c).
  int max_iter = 0;
  /// 0 runs power iteration to obtain 1 / lambda_max(G).
  double step = 0.0;
};

struct NgaResult {
  Eigen::VectorXd beta;
  int iterations = 0;
  double residual = 0.0;  // ||G beta - b||_inf
  double step = 0.0;      // 1 / lambda_max
};

/// Raised when NGA exhausts its iteration budget; carries the last iterate.
class NgaNonConvergence : public ConvergenceError {
 public:
  NgaNonConvergence(Eigen::VectorXd last, double residual, int iterations);
  Eigen::VectorXd last_iterate;
  double residual;
  int iterations;
};

/// Nesterov-accelerated gradient descent on 0.5 beta'G beta - b'beta with step
/// 1/lambda_max(G); the momentum restarts whenever it points uphill. Stops
/// once ||G beta - b||_inf < tol * max(1, ||b||_inf).
NgaResult nga_ridge_solve(const RidgeSystem& system, const NgaOptions& options = {},
                          const Eigen::VectorXd* warm_start = nullptr);

/// Same as above with a replacement right-hand side; G is reused.
NgaResult nga_ridge_solve(const RidgeSystem& system, const Eigen::VectorXd& rhs,
                          const NgaOptions& options, const Eigen::VectorXd* warm_start = nullptr);

inline constexpr std::size_t kClosedFormBound = 1000;

/// Dense Cholesky solve of G beta = b.
Eigen::VectorXd closed_form_ridge(const RidgeSystem& system, std::size_t bound = kClosedFormBound);

/// Expands beta back to records: f_Z[i] = sum over the row's active indices.
std::vector<double> expand_categorical(const CategoricalEncoding& encoding,
                                       const Eigen::VectorXd& beta);

}  // namespace fxam
