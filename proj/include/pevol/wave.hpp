#pragma once

#include "pevol/geometry.hpp"

namespace pevol {

/// State of the 1-D Dirichlet wave equation: position u at the N+1 nodes
/// (u_0 = u_N = 0) and velocity v at the N cell centers. The squared norm is
/// twice the discrete energy, |x|^2 = sum (u'^2 + v^2) ds with u' the
/// per-cell difference quotient.
struct WaveState {
  std::vector<double> u;
  std::vector<double> v;

  int n() const { return (int)v.size(); }
  double ds() const { return 1.0 / n(); }

  double du(int i) const { return (u[i + 1] - u[i]) * n(); }

  double norm_sq() const {
    double s = 0;
    for (int i = 0; i < n(); ++i) {
      double d = du(i);
      s += d * d + v[i] * v[i];
    }
    return s * ds();
  }
  double norm() const { return std::sqrt(norm_sq()); }

  static WaveState zero(int N) {
    WaveState x;
    x.u.assign(N + 1, 0.0);
    x.v.assign(N, 0.0);
    return x;
  }

  /// Samples position at nodes and velocity at cell centers; the Dirichlet
  /// values are pinned to zero exactly.
  template <class Fu, class Fv>
  static WaveState sample(int N, Fu&& fu, Fv&& fv) {
    WaveState x = zero(N);
    for (int i = 1; i < N; ++i) x.u[i] = fu((double)i / N);
    for (int i = 0; i < N; ++i) x.v[i] = fv((i + 0.5) / N);
    return x;
  }
};

inline double energy_inner(const WaveState& a, const WaveState& b) {
  double s = 0;
  for (int i = 0; i < a.n(); ++i) s += a.du(i) * b.du(i) + a.v[i] * b.v[i];
  return s * a.ds();
}

inline WaveState operator-(const WaveState& a, const WaveState& b) {
  WaveState r = a;
  for (size_t i = 0; i < r.u.size(); ++i) r.u[i] -= b.u[i];
  for (size_t i = 0; i < r.v.size(); ++i) r.v[i] -= b.v[i];
  return r;
}

inline WaveState operator+(const WaveState& a, const WaveState& b) {
  WaveState r = a;
  for (size_t i = 0; i < r.u.size(); ++i) r.u[i] += b.u[i];
  for (size_t i = 0; i < r.v.size(); ++i) r.v[i] += b.v[i];
  return r;
}

inline WaveState operator*(double c, const WaveState& a) {
  WaveState r = a;
  for (auto& x : r.u) x *= c;
  for (auto& x : r.v) x *= c;
  return r;
}

/// Riemann invariants at cell centers: w+ = v + u_s travels left,
/// w- = v - u_s travels right; both reflect with a sign flip at the walls.
struct RiemannState {
  std::vector<double> wp;
  std::vector<double> wm;
  int n() const { return (int)wp.size(); }
};

inline RiemannState to_riemann(const WaveState& x) {
  RiemannState r;
  int N = x.n();
  r.wp.resize(N);
  r.wm.resize(N);
  for (int i = 0; i < N; ++i) {
    double d = x.du(i);
    r.wp[i] = x.v[i] + d;
    r.wm[i] = x.v[i] - d;
  }
  return r;
}

/// Rebuilds the wave state; u comes from prefix sums of u_s anchored at
/// u(0) = 0. The right-endpoint value (zero in exact arithmetic whenever the
/// data came from a Dirichlet state) is reported through endpoint_residual
/// and pinned, not silently spread over the interior.
inline WaveState from_riemann(const RiemannState& r, double* endpoint_residual = nullptr) {
  int N = r.n();
  WaveState x = WaveState::zero(N);
  double acc = 0, ds = 1.0 / N;
  for (int i = 0; i < N; ++i) {
    x.v[i] = (r.wp[i] + r.wm[i]) / 2;
    acc += ds * (r.wp[i] - r.wm[i]) / 2;
    x.u[i + 1] = acc;
  }
  if (endpoint_residual) *endpoint_residual = acc;
  x.u[N] = 0.0;
  return x;
}

/// The two Riemann fields unfolded onto a circle of circumference 2: the
/// first N entries hold w+ on (0,1), the last N hold the reflected copy
/// -w-(2 - sigma). The undamped wave group is a rigid left rotation of this
/// field, one cell per time step ds.
inline std::vector<double> to_circle(const RiemannState& r) {
  int N = r.n();
  std::vector<double> f(2 * N);
  for (int i = 0; i < N; ++i) {
    f[i] = r.wp[i];
    f[2 * N - 1 - i] = -r.wm[i];
  }
  return f;
}

/// Reads the Riemann fields off the circle after a rotation by `offset`
/// cells: w+(s_i) = f[i + offset], w-(s_i) = -f[2N-1-i + offset].
inline RiemannState circle_to_riemann(const std::vector<double>& f, long offset) {
  int N2 = (int)f.size();
  int N = N2 / 2;
  RiemannState r;
  r.wp.resize(N);
  r.wm.resize(N);
  long o = ((offset % N2) + N2) % N2;
  for (int i = 0; i < N; ++i) {
    r.wp[i] = f[(i + o) % N2];
    r.wm[i] = -f[(2 * N - 1 - i + o) % N2];
  }
  return r;
}

inline std::vector<double> wave_to_circle(const WaveState& x) {
  return to_circle(to_riemann(x));
}

inline WaveState circle_to_wave(const std::vector<double>& f, long offset,
                                double* endpoint_residual = nullptr) {
  return from_riemann(circle_to_riemann(f, offset), endpoint_residual);
}

/// Squared energy norm read directly off the circle field.
inline double circle_norm_sq(const std::vector<double>& f) {
  double s = 0;
  for (double x : f) s += x * x;
  return s / (double)f.size();
}

/// Undamped wave group via d'Alembert's formula in Riemann form: an exact
/// circle rotation when t*N is an integer, linear interpolation of the
/// rotated field (O(ds^2)) otherwise. Defined for all real t.
inline WaveState dalembert(const WaveState& x, double t) {
  const int N = x.n();
  auto f = wave_to_circle(x);
  double shift = t * N;
  double k = std::round(shift);
  if (std::abs(shift - k) < 1e-9 * std::max(1.0, std::abs(shift)))
    return circle_to_wave(f, (long)k);
  long base = (long)std::floor(shift);
  double w = shift - base;
  int N2 = 2 * N;
  std::vector<double> g(N2);
  long o = ((base % N2) + N2) % N2;
  for (int j = 0; j < N2; ++j)
    g[j] = (1 - w) * f[(j + o) % N2] + w * f[(j + o + 1) % N2];
  return circle_to_wave(g, 0);
}

/// Velocity of the undamped solution at cell center i during the time slab
/// ((k-1/2) ds, (k+1/2) ds): both Riemann characteristics stay within one
/// circle cell there, so the value is exact for grid data.
inline double undamped_velocity_slab(const std::vector<double>& f, int i, long k) {
  int N2 = (int)f.size();
  int N = N2 / 2;
  long o = ((k % N2) + N2) % N2;
  return (f[(i + o) % N2] - f[(2 * N - 1 - i + o) % N2]) / 2;
}

namespace detail {

inline void check_wave_region(const DampingRegion& region) {
  if (region.period() != 2.0)
    throw config_error("wave damping regions must have period 2");
}

inline long step_count(double t, int N) {
  double steps = t * N;
  long n = (long)std::round(steps);
  if (n < 0 || std::abs(steps - n) > 1e-9 * std::max(1.0, std::abs(steps)))
    throw config_error("damped wave evolution requires t a nonnegative multiple of ds");
  return n;
}

}  // namespace detail

/// One Strang step of the damped wave equation on the circle field in place:
/// half-step velocity damping, exact one-cell advection, half-step damping.
/// Damping factors are evaluated at cell centers and the step's midpoint
/// time. Returns the energy dissipated by the step (exact for the scheme).
inline double damped_step(const DampingRegion& region, std::vector<double>& f,
                          long& offset, long step_index) {
  const int N2 = (int)f.size();
  const int N = N2 / 2;
  const double dt = 1.0 / N;
  const double t_mid = (step_index + 0.5) * dt;
  double dissipated = 0;
  auto half_damp = [&]() {
    long o = ((offset % N2) + N2) % N2;
    for (int i = 0; i < N; ++i) {
      double b = region.eval((i + 0.5) / N, t_mid);
      if (b == 0) continue;
      double e = std::exp(-b * dt / 2);
      int p = (int)((i + o) % N2);
      int q = (int)((2 * N - 1 - i + o) % N2);
      double avg = (f[p] + f[q]) / 2;
      double dif = (f[p] - f[q]) / 2;  // velocity v_i
      dissipated += dif * dif * (1 - e * e);
      dif *= e;
      f[p] = avg + dif;
      f[q] = avg - dif;
    }
  };
  half_damp();
  offset += 1;
  half_damp();
  return dissipated / N;
}

struct DampedTrajectory {
  WaveState state;
  double dissipated = 0;          // exact energy drop of the scheme
  double endpoint_residual = 0;   // u(1) telescoping diagnostic
};

/// Damped wave evolution U(t,0)x by Strang splitting at CFL = 1
/// (dt = ds, exact advection). Accepts an optional per-step observer
/// observer(step_index, f, offset) called after each full step.
template <class Observer>
DampedTrajectory damped_solve_traced(const DampingRegion& region, const WaveState& x,
                                     double t, Observer&& observer) {
  detail::check_wave_region(region);
  const int N = x.n();
  long steps = detail::step_count(t, N);
  auto f = wave_to_circle(x);
  long offset = 0;
  DampedTrajectory out;
  for (long m = 0; m < steps; ++m) {
    out.dissipated += damped_step(region, f, offset, m);
    observer(m, f, offset);
  }
  out.state = circle_to_wave(f, offset, &out.endpoint_residual);
  return out;
}

inline DampedTrajectory damped_solve_traced(const DampingRegion& region,
                                            const WaveState& x, double t) {
  return damped_solve_traced(region, x, t, [](long, const std::vector<double>&, long) {});
}

inline WaveState damped_solve(const DampingRegion& region, const WaveState& x, double t) {
  return damped_solve_traced(region, x, t).state;
}

/// Integral over the window of b |v(s,t;x)|^2 for the undamped solution:
/// velocities are exact slab constants of the circle field, b is integrated
/// exactly in t over each slab and sampled at cell centers in s.
/// window = (1,2) is the half-period set of the decomposition theorem;
/// (0,2) is the full period.
struct YDefect {
  double second_half = 0;
  double full_period = 0;
};

inline YDefect y_membership_defect(const DampingRegion& region, const WaveState& x) {
  detail::check_wave_region(region);
  const int N = x.n();
  const double ds = 1.0 / N;
  auto f = wave_to_circle(x);
  YDefect d;
  for (int i = 0; i < N; ++i) {
    auto sections = region.t_section_intervals((i + 0.5) / N);
    if (sections.empty()) continue;
    for (long k = 0; k <= 2 * N; ++k) {
      double v = undamped_velocity_slab(f, i, k);
      if (v == 0) continue;
      Interval slab{(k - 0.5) * ds, (k + 0.5) * ds};
      slab.lo = std::max(slab.lo, 0.0);
      slab.hi = std::min(slab.hi, 2.0);
      if (slab.hi <= slab.lo) continue;
      double full = 0, half = 0;
      for (const auto& sec : sections) {
        double lo = std::max(sec.lo, slab.lo), hi = std::min(sec.hi, slab.hi);
        if (hi > lo) full += hi - lo;
        lo = std::max(lo, 1.0);
        if (hi > lo) half += hi - lo;
      }
      d.full_period += v * v * full * ds * region.amplitude();
      d.second_half += v * v * half * ds * region.amplitude();
    }
  }
  return d;
}

/// Membership tolerance for the defect quadratures.
inline double membership_tol(const WaveState& x) { return 1e-6 * x.norm_sq(); }

/// The explicit one-dimensional generator of the undamped component for the
/// moving-band and switched damping examples.
inline WaveState example51_basis(double delta, int N) {
  if (!(delta >= 0 && delta < 0.5))
    throw config_error("explicit decomposition requires delta in [0, 1/2)");
  auto fu = [&](double s) {
    if (s <= delta) return s;
    if (s >= 1 - delta) return s - 1;
    return delta * (1 - 2 * s) / (1 - 2 * delta);
  };
  auto fv = [&](double s) {
    return (s > delta && s < 1 - delta) ? -1.0 / (1 - 2 * delta) : 0.0;
  };
  return WaveState::sample(N, fu, fv);
}

/// The functional phi_{delta,s}(x) = (u(s) - u(delta))/2 + (1/2) int_delta^s v,
/// evaluated with linear interpolation of u and cell-exact integration of v.
inline double phi_functional(const WaveState& x, double delta, double s) {
  const int N = x.n();
  auto u_at = [&](double p) {
    double idx = p * N;
    long j = (long)std::floor(idx);
    j = std::max(0l, std::min((long)N - 1, j));
    double w = idx - j;
    return (1 - w) * x.u[j] + w * x.u[j + 1];
  };
  auto v_int = [&](double a, double b) {  // integral of the cell-constant v
    double total = 0;
    long ja = (long)std::floor(a * N), jb = (long)std::floor(b * N);
    for (long j = std::max(0l, ja); j <= std::min((long)N - 1, jb); ++j) {
      double lo = std::max(a, (double)j / N), hi = std::min(b, (double)(j + 1) / N);
      if (hi > lo) total += x.v[j] * (hi - lo);
    }
    return total;
  };
  return (u_at(s) - u_at(delta)) / 2 + 0.5 * v_int(delta, s);
}

inline double psi_functional(const WaveState& x, double delta) {
  return phi_functional(x, delta, 1 - delta);
}

/// Orthogonal projection onto the undamped subspace of the explicit
/// decomposition: Px = -2 psi(x)/(1+2 delta) (u_d, v_d) + (w, w') with
/// w supported on I_delta = (delta, 1-delta).
inline WaveState example51_projection(double delta, const WaveState& x) {
  if (!(delta >= 0 && delta < 0.5))
    throw config_error("explicit decomposition requires delta in [0, 1/2)");
  const int N = x.n();
  double psi = psi_functional(x, delta);
  WaveState w = WaveState::zero(N);
  for (int i = 1; i < N; ++i) {
    double s = (double)i / N;
    if (s > delta && s < 1 - delta)
      w.u[i] = phi_functional(x, delta, s) - (s - delta) / (1 - 2 * delta) * psi;
  }
  for (int i = 0; i < N; ++i) {
    double s = (i + 0.5) / N;
    if (s > delta && s < 1 - delta)
      w.v[i] = (x.du(i) + x.v[i]) / 2 - psi / (1 - 2 * delta);
  }
  return (-2 * psi / (1 + 2 * delta)) * example51_basis(delta, N) + w;
}

/// Distance-to-Z diagnostic: the L2(I_delta) norm of u' + v plus the
/// component along the distinguished basis vector. Zero exactly on Z.
inline double z_membership_defect(double delta, const WaveState& x) {
  if (!(delta >= 0 && delta < 0.5))
    throw config_error("explicit decomposition requires delta in [0, 1/2)");
  const int N = x.n();
  double acc = 0;
  for (int i = 0; i < N; ++i) {
    double lo = std::max((double)i / N, delta);
    double hi = std::min((double)(i + 1) / N, 1 - delta);
    if (hi <= lo) continue;
    double r = x.du(i) + x.v[i];
    acc += r * r * (hi - lo);
  }
  auto y = example51_basis(delta, N);
  return std::sqrt(acc) + std::abs(energy_inner(x, y)) / y.norm();
}

}  // namespace pevol
