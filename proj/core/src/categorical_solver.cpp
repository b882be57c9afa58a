#include "fxam/categorical_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

namespace fxam {

Eigen::VectorXd RidgeSystem::multiply(const Eigen::VectorXd& v) const {
  if (dense_gram) return (*dense_gram) * v;
  Eigen::VectorXd out = gram * v;
  if (records > 0.0) out -= label_counts * (label_counts.dot(v) / records);
  return out;
}

Eigen::MatrixXd RidgeSystem::dense() const {
  if (dense_gram) return *dense_gram;
  Eigen::MatrixXd g(gram);
  if (records > 0.0) g -= label_counts * label_counts.transpose() / records;
  return g;
}

RidgeSystem absorb_intercept(RidgeSystem system, std::span<const double> y) {
  if (system.records > 0.0) throw ConfigError("intercept already absorbed");
  if (y.empty()) throw DataError("absorb_intercept: empty response");
  const auto c = static_cast<Eigen::Index>(system.cardinality);
  Eigen::VectorXd counts(c);
  for (Eigen::Index j = 0; j < c; ++j) counts[j] = system.gram.coeff(j, j) - system.lambda;
  const double n = static_cast<double>(y.size());
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= n;
  system.rhs -= counts * mean;
  system.label_counts = std::move(counts);
  system.records = n;
  if (system.dense_gram) {
    *system.dense_gram -= system.label_counts * system.label_counts.transpose() / n;
  }
  return system;
}

double RidgeSystem::objective(const Eigen::VectorXd& beta) const {
  return 0.5 * beta.dot(multiply(beta)) - rhs.dot(beta);
}

Eigen::VectorXd assemble_rhs(const CategoricalEncoding& encoding, std::span<const double> y) {
  if (y.size() != encoding.num_rows) throw DataError("categorical rhs: length mismatch");
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(encoding.cardinality()));
  for (std::size_t i = 0; i < encoding.num_rows; ++i) {
    for (auto j : encoding.row(i)) b[j] += y[i];
  }
  return b;
}

RidgeSystem gram_assemble(const CategoricalEncoding& encoding, std::span<const double> y,
                          double lambda) {
  const std::size_t c = encoding.cardinality();
  if (c == 0) throw ConfigError("no categorical features");
  if (!(lambda > 0.0)) throw ConfigError("categorical ridge penalty must be > 0");

  RidgeSystem sys;
  sys.cardinality = c;
  sys.lambda = lambda;
  sys.rhs = assemble_rhs(encoding, y);

  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> triplets;
  const auto n = encoding.num_rows;
  if (c <= 4096) {
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(c),
                                                   static_cast<Eigen::Index>(c));
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = encoding.row(i);
      for (auto a : row) {
        for (auto b : row) counts(a, b) += 1.0;
      }
    }
    for (Eigen::Index a = 0; a < counts.rows(); ++a) {
      for (Eigen::Index b = 0; b < counts.cols(); ++b) {
        if (counts(a, b) != 0.0) triplets.emplace_back(a, b, counts(a, b));
      }
    }
  } else {
    std::unordered_map<std::uint64_t, double> counts;
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = encoding.row(i);
      for (auto a : row) {
        for (auto b : row) counts[(static_cast<std::uint64_t>(a) << 32) | b] += 1.0;
      }
    }
    triplets.reserve(counts.size());
    for (const auto& [key, v] : counts) {
      triplets.emplace_back(static_cast<int>(key >> 32), static_cast<int>(key & 0xffffffffu), v);
    }
  }
  for (std::size_t j = 0; j < c; ++j) {
    triplets.emplace_back(static_cast<int>(j), static_cast<int>(j), lambda);
  }
  sys.gram.resize(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c));
  sys.gram.setFromTriplets(triplets.begin(), triplets.end());
  sys.gram.makeCompressed();
  if (c < kDenseGramThreshold) sys.dense_gram = Eigen::MatrixXd(sys.gram);
  return sys;
}

namespace {

Eigen::VectorXd start_vector(Eigen::Index n) {
  // Deterministic, strictly positive, not aligned with any coordinate axis.
  Eigen::VectorXd v(n);
  std::uint64_t state = 0x9e3779b97f4a7c15ull;
  for (Eigen::Index i = 0; i < n; ++i) {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    v[i] = 0.5 + static_cast<double>(state >> 11) * 0x1.0p-53;
  }
  return v.normalized();
}

template <typename MatVec>
PowerIterationResult power_iterate(Eigen::Index n, MatVec&& apply, double rel_tol, int max_iter) {
  Eigen::VectorXd v = start_vector(n);
  PowerIterationResult out;
  double previous = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::VectorXd w = apply(v);
    const double rayleigh = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) throw ConfigError("power iteration: zero matrix");
    out.eigenvalue = rayleigh;
    out.iterations = it;
    if (it > 1 && std::abs(rayleigh - previous) < rel_tol * std::abs(rayleigh)) break;
    previous = rayleigh;
    v = w / norm;
  }
  return out;
}

}  // namespace

PowerIterationResult power_iteration_max_eig(const RidgeSystem& system, double rel_tol,
                                             int max_iter) {
  return power_iterate(
      static_cast<Eigen::Index>(system.cardinality),
      [&](const Eigen::VectorXd& v) { return system.multiply(v); }, rel_tol, max_iter);
}

PowerIterationResult power_iteration_max_eig(const Eigen::MatrixXd& matrix, double rel_tol,
                                             int max_iter) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0) {
    throw ConfigError("power iteration: matrix must be square and nonempty");
  }
  return power_iterate(
      matrix.rows(), [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return matrix * v; },
      rel_tol, max_iter);
}

NgaNonConvergence::NgaNonConvergence(Eigen::VectorXd last, double residual_, int iterations_)
    : ConvergenceError("NGA ridge solve did not converge: residual " + std::to_string(residual_) +
                       " after " + std::to_string(iterations_) + " iterations"),
      last_iterate(std::move(last)),
      residual(residual_),
      iterations(iterations_) {}

NgaResult nga_ridge_solve(const RidgeSystem& system, const NgaOptions& options,
                          const Eigen::VectorXd* warm_start) {
  return nga_ridge_solve(system, system.rhs, options, warm_start);
}

NgaResult nga_ridge_solve(const RidgeSystem& system, const Eigen::VectorXd& rhs,
                          const NgaOptions& options, const Eigen::VectorXd* warm_start) {
  if (!(system.lambda > 0.0)) throw ConfigError("NGA requires lambda > 0");
  const auto c = static_cast<Eigen::Index>(system.cardinality);
  if (rhs.size() != c) throw ConfigError("NGA: rhs has wrong dimension");
  const int max_iter =
      options.max_iter > 0 ? options.max_iter : std::max(1000, 10 * static_cast<int>(c));
  const double threshold = options.tol * std::max(1.0, rhs.lpNorm<Eigen::Infinity>());

  NgaResult out;
  out.step = options.step > 0.0 ? options.step : 1.0 / power_iteration_max_eig(system).eigenvalue;

  Eigen::VectorXd beta = warm_start != nullptr ? *warm_start : Eigen::VectorXd::Zero(c);
  Eigen::VectorXd previous = beta;
  double theta = 1.0;
  for (int it = 0;; ++it) {
    const double residual = (system.multiply(beta) - rhs).lpNorm<Eigen::Infinity>();
    if (residual < threshold) {
      out.beta = std::move(beta);
      out.iterations = it;
      out.residual = residual;
      return out;
    }
    if (it >= max_iter) throw NgaNonConvergence(beta, residual, it);

    const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    const Eigen::VectorXd lookahead = beta + ((theta - 1.0) / theta_next) * (beta - previous);
    const Eigen::VectorXd gradient = system.multiply(lookahead) - rhs;
    previous = std::move(beta);
    beta = lookahead - out.step * gradient;
    theta = theta_next;
    // Gradient restart: once the momentum points uphill, reset it. Without
    // this the plain sequence only converges at 1/k^2 even though G is
    // strongly convex.
    if (gradient.dot(beta - previous) > 0.0) theta = 1.0;
  }
}

Eigen::VectorXd closed_form_ridge(const RidgeSystem& system, std::size_t bound) {
  if (system.cardinality > bound) {
    throw TestSupportError("closed_form_ridge with c=" + std::to_string(system.cardinality));
  }
  const Eigen::MatrixXd g = system.dense();
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success || llt.rcond() < 1e-13) {
    throw ConvergenceError("closed_form_ridge: Gram matrix is singular");
  }
  return llt.solve(system.rhs);
}

std::vector<double> expand_categorical(const CategoricalEncoding& encoding,
                                       const Eigen::VectorXd& beta) {
  std::vector<double> out(encoding.num_rows, 0.0);
  for (std::size_t i = 0; i < encoding.num_rows; ++i) {
    double s = 0.0;
    for (auto j : encoding.row(i)) s += beta[j];
    out[i] = s;
  }
  return out;
}

}  // namespace fxam
