#include "fxam/smoothers.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "fxam/error.hpp"

namespace fxam {

void SmoothRequest::validate(bool needs_bandwidth) const {
  if (x.empty()) throw DataError("smoother: empty input");
  if (y.size() != x.size()) throw DataError("smoother: x and y differ in length");
  if (!w.empty() && w.size() != x.size()) throw DataError("smoother: weights differ in length");
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (x[i] < x[i - 1]) throw DataError("smoother: x must be sorted ascending");
  }
  for (double wi : w) {
    if (!(wi > 0.0)) throw DataError("smoother: weights must be positive");
  }
  if (needs_bandwidth && !(bandwidth > 0.0)) throw ConfigError("smoother: bandwidth must be > 0");
  if (!needs_bandwidth && !(lambda >= 0.0)) throw ConfigError("smoother: lambda must be >= 0");
}

double epanechnikov(double u) {
  return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
}

double default_bandwidth(std::span<const double> x, double factor, std::size_t n_effective) {
  if (x.empty()) return 1.0;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) return 1.0;
  const double n = static_cast<double>(n_effective == 0 ? x.size() : n_effective);
  return factor * range * std::pow(n, -0.2);
}

std::vector<double> naive_kernel_smooth(const SmoothRequest& req) {
  req.validate(true);
  const std::size_t n = req.x.size();
  std::vector<double> w(n);
  for (std::size_t j = 0; j < n; ++j) w[j] = req.weight(j);
  const double inv_h = 1.0 / req.bandwidth;
  std::vector<double> out(n);
  // Still every pair; the branch-free kernel just lets the loop vectorise.
  for (std::size_t i = 0; i < n; ++i) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double u = (req.x[i] - req.x[j]) * inv_h;
      const double k = w[j] * 0.75 * std::max(0.0, 1.0 - u * u);
      num += k * req.y[j];
      den += k;
    }
    out[i] = num / den;
  }
  return out;
}

std::vector<double> fast_kernel_smooth(const SmoothRequest& req, OpCounter* counter) {
  req.validate(true);
  const std::size_t n = req.x.size();
  const double h = req.bandwidth;
  const double origin = req.x.front();

  // Six running sums per point, restarted at every block boundary:
  // w, w v, w v^2, wy, wy v, wy v^2 with v = u - block_origin.
  using Sums = std::array<double, 6>;
  std::vector<double> u(n);
  std::vector<std::int64_t> block(n);
  std::vector<std::size_t> block_start(n);
  std::vector<Sums> cum(n);
  std::uint64_t ops = 0;

  for (std::size_t j = 0; j < n; ++j) {
    u[j] = (req.x[j] - origin) / h;
    block[j] = static_cast<std::int64_t>(std::floor(u[j]));
    const bool fresh = j == 0 || block[j] != block[j - 1];
    block_start[j] = fresh ? j : block_start[j - 1];
    const double v = u[j] - static_cast<double>(block[j]);
    const double w = req.weight(j);
    const double wy = w * req.y[j];
    Sums s{w, w * v, w * v * v, wy, wy * v, wy * v * v};
    if (!fresh) {
      for (std::size_t k = 0; k < 6; ++k) s[k] += cum[j - 1][k];
    }
    cum[j] = s;
    ++ops;
  }
  std::vector<std::size_t> block_end(n);
  for (std::size_t j = n; j-- > 0;) {
    block_end[j] = (j + 1 == n || block[j + 1] != block[j]) ? j : block_end[j + 1];
  }

  auto range_sums = [&](std::size_t first, std::size_t last) {
    // Sum over [first, last], both in the same block.
    Sums s = cum[last];
    if (first > block_start[last]) {
      for (std::size_t k = 0; k < 6; ++k) s[k] -= cum[first - 1][k];
    }
    return s;
  };

  std::vector<double> out(n);
  std::size_t lo = 0;
  std::size_t hi = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (u[lo] < u[i] - 1.0) {
      ++lo;
      ++ops;
    }
    while (hi + 1 < n && u[hi + 1] <= u[i] + 1.0) {
      ++hi;
      ++ops;
    }
    // Walk the (at most three) blocks covering [lo, hi].
    double num = 0.0;
    double den = 0.0;
    std::size_t first = lo;
    while (true) {
      const std::size_t last = std::min(hi, block_end[first]);
      const Sums s = range_sums(first, last);
      const double d = u[i] - static_cast<double>(block[first]);
      // sum w (u_i - u_j)^2 = d^2 S0 - 2 d S1 + S2 within the block.
      den += s[0] - (d * d * s[0] - 2.0 * d * s[1] + s[2]);
      num += s[3] - (d * d * s[3] - 2.0 * d * s[4] + s[5]);
      if (last == hi) break;
      first = last + 1;
    }
    out[i] = num / den;
    ++ops;
  }
  if (counter != nullptr) counter->updates += ops;
  return out;
}

namespace {

// Quadrature-weighted second divided difference coefficients for the
// triple (x_i, x_{i+1}, x_{i+2}).
std::array<double, 3> second_difference_row(std::span<const double> x, std::size_t i) {
  const double h1 = x[i + 1] - x[i];
  const double h2 = x[i + 2] - x[i + 1];
  const double span = h1 + h2;
  const double scale = std::sqrt(0.5 * span);
  return {scale * 2.0 / (h1 * span), -scale * 2.0 / (h1 * h2), scale * 2.0 / (h2 * span)};
}

// Upper triangular factor of bandwidth 3 built by Givens rotations, one
// least-squares row at a time. Working on the stacked rows instead of the
// normal equations keeps stiff problems (huge lambda, nearly tied knots)
// accurate.
class BandedGivensQr {
 public:
  explicit BandedGivensQr(std::size_t n) : r_(n, {0.0, 0.0, 0.0}), qtb_(n, 0.0) {}

  // Row with entries v at columns j, j+1, j+2 and right-hand side rhs.
  void add_row(std::size_t j, std::array<double, 3> v, double rhs) {
    const std::size_t n = r_.size();
    for (std::size_t k = j; k < n; ++k) {
      if (v[0] == 0.0) {
        if (v[1] == 0.0 && v[2] == 0.0) return;
      } else {
        auto& row = r_[k];
        if (row[0] == 0.0 && row[1] == 0.0 && row[2] == 0.0) {
          row = v;
          qtb_[k] = rhs;
          return;
        }
        const double h = std::hypot(row[0], v[0]);
        const double c = row[0] / h;
        const double s = v[0] / h;
        for (std::size_t a = 0; a < 3; ++a) {
          const double top = row[a];
          row[a] = c * top + s * v[a];
          v[a] = c * v[a] - s * top;
        }
        const double top = qtb_[k];
        qtb_[k] = c * top + s * rhs;
        rhs = c * rhs - s * top;
      }
      v = {v[1], v[2], 0.0};
    }
  }

  std::vector<double> solve() const {
    const std::size_t n = r_.size();
    std::vector<double> f(n, 0.0);
    for (std::size_t k = n; k-- > 0;) {
      double v = qtb_[k];
      if (k + 1 < n) v -= r_[k][1] * f[k + 1];
      if (k + 2 < n) v -= r_[k][2] * f[k + 2];
      if (!(r_[k][0] != 0.0)) throw ConvergenceError("penalized smoother: system is singular");
      f[k] = v / r_[k][0];
    }
    return f;
  }

 private:
  std::vector<std::array<double, 3>> r_;
  std::vector<double> qtb_;
};

}  // namespace

std::vector<double> penalized_smooth(const SmoothRequest& req) {
  req.validate(false);
  const std::size_t n = req.x.size();
  std::vector<double> f(req.y.begin(), req.y.end());
  if (n < 3 || req.lambda == 0.0) return f;
  for (std::size_t i = 1; i < n; ++i) {
    if (!(req.x[i] > req.x[i - 1])) throw DataError("penalized smoother: knots must be distinct");
  }

  BandedGivensQr qr(n);
  const double root_lambda = std::sqrt(req.lambda);
  // Rows go in by leading column so the rotation fill never runs past the band.
  for (std::size_t i = 0; i < n; ++i) {
    if (i + 2 < n) {
      auto row = second_difference_row(req.x, i);
      for (double& v : row) v *= root_lambda;
      qr.add_row(i, row, 0.0);
    }
    const double rw = std::sqrt(req.weight(i));
    qr.add_row(i, {rw, 0.0, 0.0}, rw * req.y[i]);
  }
  f = qr.solve();
  return f;
}

double roughness_penalty(std::span<const double> knots, std::span<const double> f) {
  double total = 0.0;
  for (std::size_t i = 0; i + 2 < knots.size(); ++i) {
    const auto row = second_difference_row(knots, i);
    const double d = row[0] * f[i] + row[1] * f[i + 1] + row[2] * f[i + 2];
    total += d * d;
  }
  return total;
}

Eigen::MatrixXd penalty_matrix(std::span<const double> knots) {
  const auto n = static_cast<Eigen::Index>(knots.size());
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i + 2 < knots.size(); ++i) {
    const auto row = second_difference_row(knots, i);
    for (std::size_t a = 0; a < 3; ++a) {
      for (std::size_t b = 0; b < 3; ++b) {
        k(static_cast<Eigen::Index>(i + a), static_cast<Eigen::Index>(i + b)) += row[a] * row[b];
      }
    }
  }
  return k;
}

void append_penalty_triplets(std::span<const double> knots, std::span<const std::size_t> index_of,
                             double scale, std::vector<Eigen::Triplet<double>>& out) {
  for (std::size_t i = 0; i + 2 < knots.size(); ++i) {
    const auto row = second_difference_row(knots, i);
    for (std::size_t a = 0; a < 3; ++a) {
      for (std::size_t b = 0; b < 3; ++b) {
        out.emplace_back(static_cast<int>(index_of[i + a]), static_cast<int>(index_of[i + b]),
                         scale * row[a] * row[b]);
      }
    }
  }
}

std::vector<double> smooth(SmootherKind kind, const SmoothRequest& req) {
  switch (kind) {
    case SmootherKind::Penalized: return penalized_smooth(req);
    case SmootherKind::FastKernel: return fast_kernel_smooth(req);
  }
  throw ConfigError("unknown smoother backend");
}

Eigen::MatrixXd smoother_matrix(SmootherKind kind, std::span<const double> knots,
                                double parameter, std::span<const double> weights,
                                std::size_t bound) {
  const std::size_t n = knots.size();
  if (n > bound) {
    throw TestSupportError("smoother_matrix with N=" + std::to_string(n) + " exceeds bound " +
                           std::to_string(bound));
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<double> unit(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    unit[j] = 1.0;
    SmoothRequest req{knots, unit, weights};
    req.bandwidth = parameter;
    req.lambda = parameter;
    const auto col = kind == SmootherKind::Penalized ? penalized_smooth(req)
                                                     : naive_kernel_smooth(req);
    for (std::size_t i = 0; i < n; ++i) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
    }
    unit[j] = 0.0;
  }
  return m;
}

}  // namespace fxam
