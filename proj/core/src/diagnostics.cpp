// Dense test-support views of the fitting problem: record-space smoother
// matrices, normal-equation residuals and a direct solve of the block system.

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>
#include <Eigen/QR>

#include "fxam/error.hpp"
#include "fxam/trainer.hpp"

namespace fxam {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// M = E S W^-1 E' for a knot-space smoother S = (W + lambda K)^-1 W, where E
// maps knots to records. This equals E (W + lambda K)^-1 E', which is
// symmetric for the penalized backend.
MatrixXd lift_to_records(const MatrixXd& knot_smoother, std::span<const double> weights,
                         std::span<const std::size_t> back_map) {
  const auto n = static_cast<Index>(back_map.size());
  MatrixXd m(n, n);
  for (Index r = 0; r < n; ++r) {
    const auto a = static_cast<Index>(back_map[static_cast<std::size_t>(r)]);
    for (Index c = 0; c < n; ++c) {
      const auto b = static_cast<Index>(back_map[static_cast<std::size_t>(c)]);
      m(r, c) = knot_smoother(a, b) / weights[static_cast<std::size_t>(b)];
    }
  }
  return m;
}

VectorXd as_vector(std::span<const double> v) {
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Index>(v.size()));
}

std::vector<double> as_std(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

std::vector<Trainer::DenseBlock> Trainer::dense_blocks(std::size_t bound) const {
  const std::size_t n = dataset_.size();
  if (n > bound) {
    throw TestSupportError("dense_blocks with N=" + std::to_string(n) + " exceeds bound " +
                           std::to_string(bound));
  }
  const auto nn = static_cast<Index>(n);
  const bool kernel = config_.backend == SmootherKind::FastKernel;
  std::vector<DenseBlock> blocks;

  blocks.push_back({"intercept", MatrixXd::Constant(nn, nn, 1.0 / static_cast<double>(n))});

  for (std::size_t i = 0; i < grids_.size(); ++i) {
    const auto& g = grids_[i];
    const double parameter = kernel ? bandwidths_[i] : config_.lambda;
    const auto s = smoother_matrix(config_.backend, g.knots, parameter, g.weights, bound);
    blocks.push_back({dataset_.numerical[i].name, lift_to_records(s, g.weights, g.back_map)});
  }

  if (ridge_) {
    const auto c = static_cast<Index>(encoding_.cardinality());
    MatrixXd z = MatrixXd::Zero(nn, c);
    for (std::size_t r = 0; r < n; ++r) {
      for (auto j : encoding_.row(r)) z(static_cast<Index>(r), j) = 1.0;
    }
    const MatrixXd g = z.transpose() * z + config_.lambda_z * MatrixXd::Identity(c, c);
    blocks.push_back({"categorical", z * g.llt().solve(z.transpose())});
  }

  const auto dc = decompose_config();
  for (std::size_t k = 0; k < series_.size(); ++k) {
    const auto& s = series_[k];
    const auto& part = partitions_[k];
    const std::vector<double> times(s.times.begin(), s.times.end());
    const std::vector<double> weights(s.weights.begin(), s.weights.end());
    const double trend_parameter =
        kernel ? default_bandwidth(times, dc.trend_parameter, n) : dc.trend_parameter;
    const auto trend = smoother_matrix(config_.backend, times, trend_parameter, weights, bound);
    blocks.push_back({dataset_.temporal[k].name + ":trend",
                      lift_to_records(trend, weights, s.back_map)});

    // Block diagonal over phases, in point space.
    const auto points = static_cast<Index>(s.size());
    MatrixXd seasonal = MatrixXd::Zero(points, points);
    for (const auto& set : part.phase_sets) {
      if (set.empty()) continue;
      std::vector<double> pt;
      std::vector<double> pw;
      for (auto a : set) {
        pt.push_back(times[a]);
        pw.push_back(weights[a]);
      }
      double phase_weight = 0.0;
      for (double w : pw) phase_weight += w;
      const double parameter =
          kernel ? default_bandwidth(pt, dc.seasonal_parameter, static_cast<std::size_t>(phase_weight))
                 : dc.seasonal_parameter;
      const auto sm = smoother_matrix(config_.backend, pt, parameter, pw, bound);
      for (std::size_t a = 0; a < set.size(); ++a) {
        for (std::size_t b = 0; b < set.size(); ++b) {
          seasonal(static_cast<Index>(set[a]), static_cast<Index>(set[b])) =
              sm(static_cast<Index>(a), static_cast<Index>(b));
        }
      }
    }
    blocks.push_back({dataset_.temporal[k].name + ":seasonal",
                      lift_to_records(seasonal, weights, s.back_map)});
  }
  return blocks;
}

namespace {

// Record-space component vectors of a state, in dense_blocks order.
std::vector<VectorXd> state_components(const TrainState& state, bool has_categorical,
                                       std::size_t n) {
  std::vector<VectorXd> out;
  out.push_back(VectorXd::Constant(static_cast<Index>(n), state.intercept));
  for (const auto& f : state.numerical) out.push_back(as_vector(f));
  if (has_categorical) out.push_back(as_vector(state.categorical));
  for (std::size_t k = 0; k < state.trend.size(); ++k) {
    out.push_back(as_vector(state.trend[k]));
    out.push_back(as_vector(state.seasonal[k]));
  }
  return out;
}

}  // namespace

std::vector<BlockResidual> Trainer::normal_equation_residuals(const TrainState& state,
                                                              std::size_t bound) const {
  const auto blocks = dense_blocks(bound);
  const std::size_t n = dataset_.size();
  const auto comps = state_components(state, ridge_ != nullptr, n);
  const VectorXd y = as_vector(dataset_.response);
  VectorXd total = VectorXd::Zero(static_cast<Index>(n));
  for (const auto& c : comps) total += c;

  std::vector<BlockResidual> out;
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    const VectorXd partial = y - (total - comps[j]);
    const VectorXd gap = comps[j] - blocks[j].smoother * partial;
    out.push_back({blocks[j].name, gap.lpNorm<Eigen::Infinity>()});
  }
  return out;
}

TrainState normal_equation_direct_solve(const Trainer& trainer, std::size_t bound) {
  if (trainer.config().backend != SmootherKind::Penalized) {
    throw ConfigError("direct solve needs the penalized backend");
  }
  const auto& data = trainer.dataset();
  const std::size_t n = data.size();
  const std::size_t p = data.numerical.size();
  const bool has_cat = trainer.encoding().cardinality() > 0;
  const std::size_t u = data.temporal.size();
  const std::size_t nblocks = 1 + p + (has_cat ? 1 : 0) + 2 * u;
  if (nblocks * n > bound) {
    throw TestSupportError("direct solve dimension " + std::to_string(nblocks * n) +
                           " exceeds bound " + std::to_string(bound));
  }
  const auto blocks = trainer.dense_blocks(n);
  const auto nn = static_cast<Index>(n);
  const auto dim = static_cast<Index>(nblocks * n);
  const Index constraints = static_cast<Index>(p + 3 * u);

  // Rows [M_j ... I ... M_j] f = M_j y, then the identifiability rows C f = 0.
  // The stacked system is singular exactly along the directions C pins
  // down, so the bordered matrix [A C'; C 0] is square and nonsingular; it is
  // solved by LU, with least squares as the fallback.
  MatrixXd a = MatrixXd::Zero(dim + constraints, dim + constraints);
  VectorXd rhs = VectorXd::Zero(dim + constraints);
  const VectorXd y = as_vector(data.response);
  for (std::size_t j = 0; j < nblocks; ++j) {
    const auto rj = static_cast<Index>(j) * nn;
    for (std::size_t i = 0; i < nblocks; ++i) {
      const auto ci = static_cast<Index>(i) * nn;
      if (i == j) {
        a.block(rj, ci, nn, nn).setIdentity();
      } else {
        a.block(rj, ci, nn, nn) = blocks[j].smoother;
      }
    }
    rhs.segment(rj, nn) = blocks[j].smoother * y;
  }
  Index row = dim;
  for (std::size_t i = 0; i < p; ++i) {
    a.block(row++, static_cast<Index>(1 + i) * nn, 1, nn).setOnes();
  }
  const std::size_t first_temporal = 1 + p + (has_cat ? 1 : 0);
  for (std::size_t k = 0; k < u; ++k) {
    const auto trend_col = static_cast<Index>(first_temporal + 2 * k) * nn;
    const auto seasonal_col = trend_col + nn;
    a.block(row++, trend_col, 1, nn).setOnes();
    a.block(row++, seasonal_col, 1, nn).setOnes();
    const auto& t = data.temporal[k].values;
    double t_mean = 0.0;
    for (auto v : t) t_mean += static_cast<double>(v);
    t_mean /= static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r) {
      a(row, seasonal_col + static_cast<Index>(r)) = static_cast<double>(t[r]) - t_mean;
    }
    ++row;
  }
  a.topRightCorner(dim, constraints) = a.bottomLeftCorner(constraints, dim).transpose();

  VectorXd sol = a.partialPivLu().solve(rhs);
  const double scale = std::max(1.0, rhs.lpNorm<Eigen::Infinity>());
  if (!sol.allFinite() || (a * sol - rhs).lpNorm<Eigen::Infinity>() > 1e-9 * scale ||
      sol.tail(constraints).lpNorm<Eigen::Infinity>() > 1e-9 * scale) {
    const MatrixXd stacked = a.leftCols(dim);
    sol = VectorXd::Zero(dim + constraints);
    sol.head(dim) = stacked.householderQr().solve(rhs);
  }

  auto segment = [&](std::size_t block) {
    return as_std(sol.segment(static_cast<Index>(block) * nn, nn));
  };
  const auto intercept_vec = segment(0);
  double intercept = 0.0;
  for (double v : intercept_vec) intercept += v;
  intercept /= static_cast<double>(n);

  std::vector<std::vector<double>> numerical;
  for (std::size_t i = 0; i < p; ++i) numerical.push_back(segment(1 + i));

  Eigen::VectorXd beta;
  if (has_cat) {
    // Recover the weights from the categorical block's partial residual.
    VectorXd partial = y - VectorXd::Constant(nn, intercept);
    for (std::size_t b = 0; b < nblocks; ++b) {
      if (b == 0 || b == 1 + p) continue;
      partial -= sol.segment(static_cast<Index>(b) * nn, nn);
    }
    const auto& enc = trainer.encoding();
    const auto c = static_cast<Index>(enc.cardinality());
    MatrixXd z = MatrixXd::Zero(nn, c);
    for (std::size_t r = 0; r < n; ++r) {
      for (auto j : enc.row(r)) z(static_cast<Index>(r), j) = 1.0;
    }
    const MatrixXd g =
        z.transpose() * z + trainer.config().lambda_z * MatrixXd::Identity(c, c);
    beta = g.llt().solve(z.transpose() * partial);
  }

  std::vector<std::vector<double>> trend;
  std::vector<std::vector<double>> seasonal;
  for (std::size_t k = 0; k < u; ++k) {
    trend.push_back(segment(first_temporal + 2 * k));
    seasonal.push_back(segment(first_temporal + 2 * k + 1));
  }
  return trainer.state_from_components(intercept, numerical, beta, trend, seasonal);
}

}  // namespace fxam
