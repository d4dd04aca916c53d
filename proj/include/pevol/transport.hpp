#pragma once

#include "pevol/geometry.hpp"

namespace pevol {

/// Grid function on the cell-centered uniform grid over (0,1) with the
/// discrete L2 norm.
struct TransportState {
  std::vector<double> values;

  int n() const { return (int)values.size(); }
  double ds() const { return 1.0 / n(); }
  double center(int i) const { return (i + 0.5) / n(); }

  double norm() const {
    double s = 0;
    for (double v : values) s += v * v;
    return std::sqrt(s * ds());
  }

  static TransportState zero(int N) {
    TransportState x;
    x.values.assign(N, 0.0);
    return x;
  }
  static TransportState constant(int N, double v = 1.0) {
    TransportState x;
    x.values.assign(N, v);
    return x;
  }
  template <class F>
  static TransportState sample(int N, F&& f) {
    TransportState x;
    x.values.resize(N);
    for (int i = 0; i < N; ++i) x.values[i] = f((i + 0.5) / N);
    return x;
  }
};

inline TransportState operator-(const TransportState& a, const TransportState& b) {
  TransportState r = a;
  for (int i = 0; i < r.n(); ++i) r.values[i] -= b.values[i];
  return r;
}

inline TransportState operator+(const TransportState& a, const TransportState& b) {
  TransportState r = a;
  for (int i = 0; i < r.n(); ++i) r.values[i] += b.values[i];
  return r;
}

/// Solution of the damped transport equation: the state given at time t0 is
/// propagated to time t1 along characteristics,
///   z(s, t1) = x(s + (t1-t0)) * exp(-integral of b along the line).
/// The spatial shift is an exact index rotation when (t1-t0)*N is an
/// integer and linear interpolation (O(ds^2)) otherwise; the damping factor
/// is exact either way.
inline TransportState solve(const DampingRegion& region, const TransportState& x,
                            double t0, double t1) {
  if (region.period() != 1.0) throw config_error("transport requires period 1");
  if (t1 < t0) throw config_error("transport solve requires t1 >= t0");
  const int N = x.n();
  const double shift = (t1 - t0) * N;
  const double k = std::round(shift);
  TransportState z = TransportState::zero(N);
  for (int i = 0; i < N; ++i) {
    double xs;
    if (std::abs(shift - k) < 1e-9 * std::max(1.0, std::abs(shift))) {
      xs = x.values[(size_t)(((long)i + (long)k) % N)];
    } else {
      double u = i + shift;
      long base = (long)std::floor(u);
      double w = u - base;
      xs = (1 - w) * x.values[(size_t)(base % N)] +
           w * x.values[(size_t)((base + 1) % N)];
    }
    double L = region.line_integral(x.center(i) + t1, t0, t1);
    z.values[i] = xs * std::exp(-L);
  }
  return z;
}

inline TransportState solve(const DampingRegion& region, const TransportState& x,
                            double t) {
  return solve(region, x, 0.0, t);
}

/// Energy dissipated over [t0, t1] by the state x given at time t0:
/// (|x|^2 - |z(t1)|^2) / 2, evaluated per characteristic without
/// cancellation. Exact in the discrete model.
inline double damping_flux(const DampingRegion& region, const TransportState& x,
                           double t0, double t1) {
  if (region.period() != 1.0) throw config_error("transport requires period 1");
  const int N = x.n();
  double flux = 0;
  for (int i = 0; i < N; ++i) {
    double L = region.line_integral(x.center(i) + t0, t0, t1);
    flux += x.values[i] * x.values[i] * (-std::expm1(-2 * L));
  }
  return flux * x.ds() / 2;
}

struct RateClassResult {
  bool member = false;
  bool inconclusive = false;
  double integral = 0;
};

/// Monodromy operator of the damped transport equation: multiplication by
/// m(s) = exp(-a(s)) on the cell grid.
class TransportMonodromy {
 public:
  TransportMonodromy(DampingRegion region, int N)
      : region_(std::move(region)), profile_(line_average(region_, N)) {
    m_.resize(N);
    for (int i = 0; i < N; ++i) m_[i] = std::exp(-profile_.values[i]);
  }

  int size() const { return profile_.n; }
  const DampingRegion& region() const { return region_; }
  const LineAverageProfile& profile() const { return profile_; }
  const std::vector<double>& multipliers() const { return m_; }

  TransportState apply(const TransportState& x) const {
    check(x);
    TransportState y = x;
    for (int i = 0; i < size(); ++i) y.values[i] *= m_[i];
    return y;
  }

  /// T^n x evaluated elementwise as exp(-n a_i) x_i; underflows to zero
  /// harmlessly for very large n.
  TransportState apply_power(const TransportState& x, double n) const {
    check(x);
    TransportState y = x;
    for (int i = 0; i < size(); ++i) y.values[i] *= std::exp(-n * profile_.values[i]);
    return y;
  }

  /// Orthogonal projection onto Fix T: restriction to the cells where the
  /// accumulated damping vanishes.
  TransportState fixed_projection(const TransportState& x) const {
    check(x);
    TransportState y = x;
    for (int i = 0; i < size(); ++i)
      if (profile_.active(i)) y.values[i] = 0;
    return y;
  }

  /// log |T^n x| via a log-sum-exp over cells; -inf for x = 0.
  double log_power_norm(const TransportState& x, double n) const {
    check(x);
    LogSumExp lse;
    double ds = x.ds();
    for (int i = 0; i < size(); ++i) {
      double v = std::abs(x.values[i]);
      if (v == 0) continue;
      lse.add(std::log(ds) + 2 * std::log(v) - 2 * n * profile_.values[i]);
    }
    return 0.5 * lse.value();
  }

  double power_norm(const TransportState& x, double n) const {
    return std::exp(log_power_norm(x, n));
  }

  /// Operator norm of T^n restricted to the orthogonal complement of Fix T.
  double power_defect_norm(double n) const {
    double amin = profile_.min_active();
    if (!std::isfinite(amin)) return 0.0;  // no damped cells: I - P = 0
    return std::exp(-n * amin);
  }

  double log_power_defect_norm(double n) const {
    double amin = profile_.min_active();
    if (!std::isfinite(amin)) return -std::numeric_limits<double>::infinity();
    return -n * amin;
  }

  /// Decides a^{-gamma} 1_{I_a} x in L2 by grid-refinement convergence of
  /// the defining integral (x extended as a piecewise-constant function).
  RateClassResult rate_class(const TransportState& x, double gamma) const {
    check(x);
    if (gamma <= 0) throw config_error("rate_class requires gamma > 0");
    const double cap = 1e12;
    std::array<double, 3> I{};
    for (int level = 0; level < 3; ++level) {
      int N = size() << level;
      LineAverageProfile prof = level == 0 ? profile_ : line_average(region_, N);
      double sum = 0, ds = 1.0 / N;
      for (int i = 0; i < N; ++i) {
        if (!prof.active(i)) continue;
        double v = x.values[i >> level];
        if (v == 0) continue;
        sum += std::pow(prof.values[i], -2 * gamma) * v * v * ds;
      }
      I[level] = sum;
    }
    RateClassResult r;
    r.integral = I[2];
    if (I[2] > cap) {
      r.member = false;
    } else if (I[2] == 0 || std::abs(I[2] - I[1]) <= 0.1 * I[2]) {
      r.member = true;
    } else {
      r.inconclusive = true;
    }
    return r;
  }

 private:
  void check(const TransportState& x) const {
    if (x.n() != size()) throw config_error("state size does not match monodromy grid");
  }

  DampingRegion region_;
  LineAverageProfile profile_;
  std::vector<double> m_;
};

inline TransportMonodromy monodromy(const DampingRegion& region, int N) {
  return TransportMonodromy(region, N);
}

inline double log_sinhc(double z) {
  z = std::abs(z);
  if (z < 1e-4) return std::log1p(z * z / 6);
  return z - std::log(2 * z) + std::log1p(-std::exp(-2 * z));
}

/// log |T^n x| for the continuum operator: the profile a(s) is integrated
/// exactly over each linear segment (x taken piecewise constant on its
/// grid). Free of the O((n ds)^2) error of cell-center sampling.
inline double log_power_norm_continuum(const PiecewiseLinearProfile& a,
                                       const TransportState& x, double n) {
  LogSumExp lse;
  const int N = x.n();
  for (int i = 0; i < N; ++i) {
    double v = std::abs(x.values[i]);
    if (v == 0) continue;
    a.for_cell(i, N, [&](double lo, double hi, double a_lo, double slope) {
      double len = hi - lo;
      double a_mid = a_lo + 0.5 * slope * len;
      double z = n * slope * len;
      lse.add(2 * std::log(v) - 2 * n * a_mid + std::log(len) + log_sinhc(z));
    });
  }
  return 0.5 * lse.value();
}

inline double power_norm_continuum(const PiecewiseLinearProfile& a,
                                   const TransportState& x, double n) {
  return std::exp(log_power_norm_continuum(a, x, n));
}

}  // namespace pevol
