#pragma once

#include "pevol/linalg.hpp"
#include "pevol/transport.hpp"
#include "pevol/wave.hpp"

namespace pevol {

/// Energy-isometric reduced coordinates of a wave state: the zero-sum part
/// of the circle field, scaled so the Euclidean norm equals the energy norm.
inline VectorXd wave_coordinates(const WaveState& x) {
  auto f = wave_to_circle(x);
  VectorXd fv = Eigen::Map<const VectorXd>(f.data(), (long)f.size());
  return MeanSplit((int)f.size()).to_reduced(fv) / std::sqrt((double)f.size());
}

inline WaveState wave_from_coordinates(const VectorXd& g, int N) {
  VectorXd fv = MeanSplit(2 * N).from_reduced(g * std::sqrt(2.0 * N));
  std::vector<double> f(fv.data(), fv.data() + fv.size());
  return circle_to_wave(f, 0);
}

/// One-period solution operator in coordinates whose Euclidean norm equals
/// the system's energy norm. Transport keeps its diagonal (multiplication)
/// structure; the wave operator is a dense matrix on the zero-sum reduction
/// of the circle field, scaled so plain 2-norms are energy norms.
class MonodromyOperator {
 public:
  enum class Kind { Diagonal, Dense };

  static MonodromyOperator transport(const DampingRegion& region, int N) {
    linearity_check_transport(region, N);
    MonodromyOperator op;
    op.kind_ = Kind::Diagonal;
    op.period_ = region.period();
    auto profile = line_average(region, N);
    op.exponents_ = profile.values;
    op.multipliers_.resize(N);
    for (int i = 0; i < N; ++i) op.multipliers_[i] = std::exp(-op.exponents_[i]);
    op.norm_ = *std::max_element(op.multipliers_.begin(), op.multipliers_.end());
    return op;
  }

  static MonodromyOperator wave(const DampingRegion& region, int N) {
    detail::check_wave_region(region);
    linearity_check_wave(region, N);
    MonodromyOperator op;
    op.kind_ = Kind::Dense;
    op.period_ = 2.0;
    op.wave_n_ = N;

    // damping factor table: per step, the cells with a factor below 1
    const int steps = 2 * N;
    std::vector<std::vector<std::pair<int, double>>> factors(steps);
    for (int m = 0; m < steps; ++m) {
      double t_mid = (m + 0.5) / N;
      for (int i = 0; i < N; ++i) {
        double b = region.eval((i + 0.5) / N, t_mid);
        if (b > 0) factors[m].push_back({i, std::exp(-b / (2.0 * N))});
      }
    }

    // all basis columns evolve through the same (p, q) mixings, so blocks of
    // them advance together; wt holds the block transposed (basis index fast)
    // and is sized to stay cache-resident across the whole period
    const int d = 2 * N;
    MatrixXd tf(d, d);
    const int block = 256;
    for (int j0 = 0; j0 < d; j0 += block) {
      const int b = std::min(block, d - j0);
      MatrixXd wt = MatrixXd::Zero(b, d);
      for (int c = 0; c < b; ++c) wt(c, j0 + c) = 1.0;
      long offset = 0;
      for (int m = 0; m < steps; ++m) {
        auto half = [&]() {
          long o = ((offset % d) + d) % d;
          for (auto [i, e] : factors[m]) {
            int p = (int)((i + o) % d);
            int q = (int)((2 * N - 1 - i + o) % d);
            double* __restrict cp = wt.data() + (size_t)p * b;
            double* __restrict cq = wt.data() + (size_t)q * b;
            for (int r = 0; r < b; ++r) {
              double avg = (cp[r] + cq[r]) / 2;
              double dif = (cp[r] - cq[r]) / 2 * e;
              cp[r] = avg + dif;
              cq[r] = avg - dif;
            }
          }
        };
        half();
        offset += 1;
        half();
      }
      // offset is 2N here, a full turn, so the fields already sit in base position
      for (int c = 0; c < b; ++c)
        for (int p = 0; p < d; ++p) tf(p, j0 + c) = wt(c, p);
    }
    op.matrix_ = MeanSplit(d).reduce(tf);
    op.norm_ = operator_norm_estimate(op.matrix_);
    return op;
  }

  /// Synthetic dense operator in plain coordinates (tests, counterexamples).
  static MonodromyOperator dense(MatrixXd m, double period = 1.0) {
    MonodromyOperator op;
    op.kind_ = Kind::Dense;
    op.period_ = period;
    op.matrix_ = std::move(m);
    op.norm_ = operator_norm_estimate(op.matrix_);
    return op;
  }

  Kind kind() const { return kind_; }
  double period() const { return period_; }
  bool is_diagonal() const { return kind_ == Kind::Diagonal; }

  int dim() const {
    return is_diagonal() ? (int)multipliers_.size() : (int)matrix_.rows();
  }

  /// Spatial cell count of the originating grid (0 for synthetic operators).
  int wave_n() const { return wave_n_; }
  int grid_n() const { return is_diagonal() ? (int)multipliers_.size() : wave_n_; }

  const std::vector<double>& multipliers() const { return multipliers_; }
  const std::vector<double>& exponents() const { return exponents_; }
  const MatrixXd& matrix() const { return matrix_; }

  /// Operator norm in the energy inner product (2-norm in these coordinates).
  double norm() const { return norm_; }
  /// Excess over 1 in units of the grid spacing; contraction means ~0.
  double contraction_excess() const {
    int n = grid_n();
    return n > 0 ? std::max(0.0, norm_ - 1.0) * n : std::max(0.0, norm_ - 1.0);
  }

  VectorXd apply(const VectorXd& x) const {
    if (is_diagonal()) {
      VectorXd y = x;
      for (int i = 0; i < dim(); ++i) y[i] *= multipliers_[i];
      return y;
    }
    return matrix_ * x;
  }

  VectorXd apply_power(const VectorXd& x, long n) const {
    if (n < 0) throw config_error("monodromy powers require n >= 0");
    if (is_diagonal()) {
      VectorXd y = x;
      for (int i = 0; i < dim(); ++i) y[i] *= std::exp(-(double)n * exponents_[i]);
      return y;
    }
    VectorXd y = x;
    for (long k = 0; k < n; ++k) y = matrix_ * y;
    return y;
  }

  /// Energy-isometric coordinates of a wave state (requires a wave operator).
  VectorXd wave_to_coords(const WaveState& x) const {
    require_wave();
    return wave_coordinates(x);
  }

  WaveState coords_to_wave(const VectorXd& g) const {
    require_wave();
    return wave_from_coordinates(g, wave_n_);
  }

 private:
  static void linearity_check_transport(const DampingRegion& region, int N) {
    Rng rng(9001);
    auto x = TransportState::sample(N, [&](double) { return rng.normal(); });
    auto y = TransportState::sample(N, [&](double) { return rng.normal(); });
    auto both = solve(region, x + y, region.period());
    auto split = solve(region, x, region.period()) + solve(region, y, region.period());
    double scale = x.norm() + y.norm();
    if ((both - split).norm() > 1e-8 * scale)
      throw numerical_error("transport solver failed the linearity check");
  }

  static void linearity_check_wave(const DampingRegion& region, int N) {
    Rng rng(9002);
    auto x = WaveState::sample(
        N, [&](double) { return rng.normal(); }, [&](double) { return rng.normal(); });
    auto y = WaveState::sample(
        N, [&](double) { return rng.normal(); }, [&](double) { return rng.normal(); });
    auto both = damped_solve(region, x + y, 2.0);
    auto split = damped_solve(region, x, 2.0) + damped_solve(region, y, 2.0);
    double scale = x.norm() + y.norm();
    if ((both - split).norm() > 1e-8 * scale)
      throw numerical_error("wave solver failed the linearity check");
  }

  void require_wave() const {
    if (wave_n_ == 0)
      throw config_error("operation requires a wave-assembled monodromy");
  }

  Kind kind_ = Kind::Diagonal;
  double period_ = 1.0;
  int wave_n_ = 0;
  std::vector<double> exponents_;
  std::vector<double> multipliers_;
  MatrixXd matrix_;
  double norm_ = 0;
};

}  // namespace pevol
