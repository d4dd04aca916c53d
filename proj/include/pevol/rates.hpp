#pragma once

#include <functional>

#include "pevol/observability.hpp"

namespace pevol {

enum class RateVerdict { Exponential, Polynomial, Superpolynomial, Stagnant, Inconclusive };

inline const char* to_string(RateVerdict v) {
  switch (v) {
    case RateVerdict::Exponential: return "exponential";
    case RateVerdict::Polynomial: return "polynomial";
    case RateVerdict::Superpolynomial: return "superpolynomial";
    case RateVerdict::Stagnant: return "stagnant";
    case RateVerdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

struct RateSample {
  double n;  // time in periods
  double t;
  double distance;
};

/// Envelope d(t) <= m exp(-beta t), fitted log-linearly on the window
/// [t_lo, t_hi]. beta = +inf marks a series that never left the zero floor.
/// residual is the unexplained fraction of the log spread, sqrt(1 - R^2):
/// scale-free, so the thresholds mean the same thing across nine decades of
/// decay and across one.
struct ExpFit {
  double beta = 0;
  double m = 0;
  double residual = 0;
  double beta_err = 0;  // standard error of the slope
  double t_lo = 0, t_hi = 0;
  int count = 0;
};

/// Envelope d(t) <= c t^{-gamma}, fitted log-log on [t_lo, t_hi]. residual
/// as in ExpFit.
struct PolyFit {
  double gamma = 0;
  double c = 0;
  double residual = 0;
  double t_lo = 0, t_hi = 0;
  int count = 0;
};

struct RateFit {
  std::vector<RateSample> series;
  ExpFit exp_fit;      // final decade of samples
  PolyFit poly_fit;    // same window
  PolyFit poly_early;  // the decade before, for the growth diagnostic
  RateVerdict verdict = RateVerdict::Inconclusive;
  double tau = 1;
  double horizon = 0;
  double scale = 0;  // norm of the initial state
};

namespace detail {

constexpr double rate_transient_periods = 10;
constexpr double rate_exp_residual_max = 0.01;
constexpr double rate_poly_residual_max = 0.05;
constexpr double rate_beta_horizon_min = 5.0;
constexpr double rate_beta_err_factor = 10.0;
constexpr double rate_stagnant_floor = 1e-12;
constexpr double rate_stagnant_rel = 1e-6;  // per decade
constexpr int rate_min_fit_points = 10;

inline double unexplained_fraction(const LineFit& f, const std::vector<double>& ys) {
  if (f.count < 2) return 0.0;
  double mean = 0;
  for (double y : ys) mean += y;
  mean /= (double)ys.size();
  double var = 0;
  for (double y : ys) var += (y - mean) * (y - mean);
  double sd = std::sqrt(var / (double)ys.size());
  if (sd < 1e-300) return f.residual > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  return f.residual / sd;
}

/// Fits both envelopes on the final tenth of the series (skipping the first
/// ten periods as transient; the rates are asymptotic statements, and the
/// late window also sits past the slow mixing of clustered modes) and
/// applies the verdict rules in order: floor, stagnation, exponential,
/// growing-exponent, polynomial.
inline void classify(RateFit& r) {
  r.exp_fit = {};
  r.poly_fit = {};
  r.poly_early = {};
  r.verdict = RateVerdict::Inconclusive;
  if (r.series.empty()) return;

  const double t_hi = r.series.back().t;
  const double t_skip = rate_transient_periods * r.tau;
  const double t_lo = std::max(t_skip, 0.9 * t_hi);
  const double t_early = 0.8 * t_hi;
  const double floor = std::max(rate_stagnant_floor, 1e-14 * r.scale);

  std::vector<double> ts, lts, lds, e_lts, e_lds;
  int window_count = 0;
  double window_max = 0;
  for (const auto& s : r.series) {
    if (s.t < t_skip) continue;
    if (s.t >= t_lo) {
      ++window_count;
      window_max = std::max(window_max, s.distance);
      if (s.distance > 0) {
        ts.push_back(s.t);
        lts.push_back(std::log(s.t));
        lds.push_back(std::log(s.distance));
      }
    } else if (s.t >= t_early && s.distance > 0) {
      e_lts.push_back(std::log(s.t));
      e_lds.push_back(std::log(s.distance));
    }
  }
  if (window_count == 0) return;  // horizon shorter than the transient window

  if (window_max <= floor) {
    // the decay completed before the window opened; infinitely exponential
    // as far as this series can tell
    r.verdict = RateVerdict::Exponential;
    r.exp_fit.beta = std::numeric_limits<double>::infinity();
    r.exp_fit.t_lo = t_lo;
    r.exp_fit.t_hi = t_hi;
    return;
  }

  auto ef = fit_line(ts, lds);
  r.exp_fit.beta = std::max(0.0, -ef.slope);
  r.exp_fit.m = std::exp(ef.intercept);
  r.exp_fit.residual = unexplained_fraction(ef, lds);
  r.exp_fit.beta_err = ef.slope_err;
  r.exp_fit.t_lo = t_lo;
  r.exp_fit.t_hi = t_hi;
  r.exp_fit.count = ef.count;

  auto pf = fit_line(lts, lds);
  r.poly_fit.gamma = std::max(0.0, -pf.slope);
  r.poly_fit.c = std::exp(pf.intercept);
  r.poly_fit.residual = unexplained_fraction(pf, lds);
  r.poly_fit.t_lo = t_lo;
  r.poly_fit.t_hi = t_hi;
  r.poly_fit.count = pf.count;

  auto pe = fit_line(e_lts, e_lds);
  r.poly_early.gamma = std::max(0.0, -pe.slope);
  r.poly_early.c = std::exp(pe.intercept);
  r.poly_early.residual = unexplained_fraction(pe, e_lds);
  r.poly_early.t_lo = t_early;
  r.poly_early.t_hi = t_lo;
  r.poly_early.count = pe.count;

  const auto& last = r.series.back();
  if (t_hi / 10 >= r.series.front().t && last.distance > rate_stagnant_floor) {
    double best = std::numeric_limits<double>::infinity(), d_dec = -1;
    for (const auto& s : r.series) {
      double gap = std::abs(s.t - t_hi / 10);
      if (gap < best) {
        best = gap;
        d_dec = s.distance;
      }
    }
    if (d_dec > 0 && std::abs(d_dec - last.distance) < rate_stagnant_rel * last.distance) {
      r.verdict = RateVerdict::Stagnant;
      return;
    }
  }

  bool can_fit = r.exp_fit.count >= rate_min_fit_points;
  if (can_fit && r.exp_fit.beta > 0 && r.exp_fit.residual < rate_exp_residual_max &&
      r.exp_fit.residual < r.poly_fit.residual &&
      r.exp_fit.beta * t_hi > rate_beta_horizon_min &&
      r.exp_fit.beta > rate_beta_err_factor * r.exp_fit.beta_err) {
    r.verdict = RateVerdict::Exponential;
    return;
  }
  if (can_fit && r.poly_early.count >= rate_min_fit_points &&
      r.poly_fit.gamma > std::max(r.poly_early.gamma + 0.75, 1.05 * r.poly_early.gamma)) {
    r.verdict = RateVerdict::Superpolynomial;
    return;
  }
  if (can_fit && r.poly_fit.residual < rate_poly_residual_max && r.poly_fit.gamma > 0.01) {
    r.verdict = RateVerdict::Polynomial;
    return;
  }
}

inline long period_count(double horizon, double tau) {
  long n = std::llround(horizon / tau);
  if (n < 1 || std::abs(horizon - (double)n * tau) > 1e-9)
    throw config_error("horizon must be a positive multiple of the period");
  return n;
}

}  // namespace detail

/// Distance of the damped transport evolution to the periodic orbit of the
/// fixed component, sampled at every period (exactly, in log space) and at
/// `stride` points inside each period. The fixed part cancels from the
/// difference exactly, so only x - Px is evolved.
inline RateFit measure(const DampingRegion& region, const TransportState& x,
                       double horizon, int stride = 1) {
  if (region.period() != 1.0) throw config_error("transport requires period 1");
  if (stride < 1) throw config_error("stride must be >= 1");
  const long n_end = detail::period_count(horizon, 1.0);
  TransportMonodromy op(region, x.n());
  TransportState y = x - op.fixed_projection(x);

  RateFit r;
  r.tau = 1.0;
  r.horizon = horizon;
  r.scale = x.norm();
  r.series.reserve((size_t)n_end * stride + 1);
  r.series.push_back({0.0, 0.0, y.norm()});
  const int N = x.n();
  for (long n = 0; n < n_end; ++n) {
    if (stride > 1) {
      TransportState zn = op.apply_power(y, (double)n);
      long prev = 0;
      for (int j = 1; j < stride; ++j) {
        // snap to whole grid steps: the shift stays an exact rotation and
        // the samples stay monotone
        long steps = std::llround(j * (double)N / stride);
        if (steps <= prev || steps >= N) continue;
        prev = steps;
        double sigma = (double)steps / N;
        double t = (double)n + sigma;
        r.series.push_back({t, t, solve(region, zn, sigma).norm()});
      }
    }
    double t = (double)(n + 1);
    r.series.push_back({t, t, op.power_norm(y, (double)(n + 1))});
  }
  detail::classify(r);
  return r;
}

/// Wave version against a supplied monodromy operator and mean projection.
/// Period multiples advance the assembled operator one application per
/// period; interior samples rerun the time stepper from the current state
/// and compare with the free (undamped) orbit of Px.
inline RateFit measure(const MonodromyOperator& op, const Projection& p,
                       const DampingRegion& region, const WaveState& x, double horizon,
                       int stride = 1) {
  check_system_region(System::Wave, region);
  if (op.period() != 2.0 || op.wave_n() != x.n())
    throw config_error("monodromy operator does not match the wave grid");
  if (p.dim() != op.dim()) throw config_error("projection does not match the operator");
  if (stride < 1) throw config_error("stride must be >= 1");
  const long n_end = detail::period_count(horizon, 2.0);
  const int N = x.n();

  VectorXd g = wave_coordinates(x);
  VectorXd pg = p.apply(g);
  WaveState px = wave_from_coordinates(pg, N);

  RateFit r;
  r.tau = 2.0;
  r.horizon = horizon;
  r.scale = x.norm();
  r.series.reserve((size_t)n_end * stride + 1);
  VectorXd h = g;
  r.series.push_back({0.0, 0.0, (h - pg).norm()});
  for (long n = 0; n < n_end; ++n) {
    if (stride > 1) {
      WaveState zn = wave_from_coordinates(h, N);
      long prev = 0;
      for (int j = 1; j < stride; ++j) {
        long steps = std::llround(j * 2.0 * N / stride);
        if (steps <= prev || steps >= 2 * N) continue;
        prev = steps;
        double sigma = (double)steps / N;
        double t = 2.0 * (double)n + sigma;
        double d = (damped_solve(region, zn, sigma) - dalembert(px, sigma)).norm();
        r.series.push_back({t / 2, t, d});
      }
    }
    h = op.apply(h);
    double t = 2.0 * (double)(n + 1);
    r.series.push_back({t / 2, t, (h - pg).norm()});
  }
  detail::classify(r);
  return r;
}

inline RateFit measure(const DampingRegion& region, const WaveState& x, double horizon,
                       int stride = 1) {
  auto op = MonodromyOperator::wave(region, x.n());
  auto p = ergodic_projection(op);
  return measure(op, p, region, x, horizon, stride);
}

/// Transport data decaying at the polynomial rate gamma and no faster than
/// gamma + 2 margin + 1/2: the power a^{gamma + margin} on the damped set.
inline TransportState make_polynomial_data(const DampingRegion& region, int N,
                                           double gamma, double margin = 0.1) {
  if (region.period() != 1.0) throw config_error("transport requires period 1");
  if (!(gamma > 0)) throw config_error("polynomial data requires gamma > 0");
  if (!(margin >= 0)) throw config_error("polynomial data requires margin >= 0");
  auto profile = line_average(region, N);
  TransportState x = TransportState::zero(N);
  bool any = false;
  for (int i = 0; i < N; ++i) {
    if (!profile.active(i)) continue;
    x.values[i] = std::pow(profile.values[i], gamma + margin);
    any = true;
  }
  if (!any)
    throw config_error("degenerate polynomial data: the damping vanishes identically");
  return x;
}

struct SlowLevel {
  long n = 0;      // checkpoint
  double eps = 0;  // sub-level threshold of the layer
  double c = 0;    // amplitude added on {0 < a < eps}
};

struct SlowCheckpoint {
  long n = 0;
  double required = 0;
  double achieved = 0;
};

struct SlowData {
  TransportState x;
  std::vector<SlowLevel> levels;
  std::vector<SlowCheckpoint> certificate;
};

namespace detail {

/// Integral of exp(-2 n a) over {0 < a < eps} intersected with (lo, hi),
/// evaluated in closed form per linear piece (measure of {a in dy} is
/// dy / |slope|). n = 0 gives the plain measure of the sub-level set.
inline double sublevel_decay_integral(const PiecewiseLinearProfile& prof, double eps,
                                      double n, double lo = 0.0, double hi = 1.0) {
  double total = 0;
  for (const auto& pc : prof.pieces) {
    double s0 = std::max(lo, pc.lo), s1 = std::min(hi, pc.hi);
    if (s1 <= s0) continue;
    double va = pc.at(s0), vb = pc.at(s1);
    if (pc.slope == 0) {
      if (va > 0 && va < eps) total += (s1 - s0) * std::exp(-2 * n * va);
      continue;
    }
    double ylo = std::max(0.0, std::min(va, vb));
    double yhi = std::min(eps, std::max(va, vb));
    if (yhi <= ylo) continue;
    if (n == 0)
      total += (yhi - ylo) / std::abs(pc.slope);
    else
      total += (std::exp(-2 * n * ylo) - std::exp(-2 * n * yhi)) /
               (2 * n * std::abs(pc.slope));
  }
  return total;
}

/// Essential infimum of the profile over its own support.
inline double profile_essinf_active(const PiecewiseLinearProfile& prof) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& pc : prof.pieces) {
    double v0 = pc.value_lo, v1 = pc.at(pc.hi);
    if (std::max(v0, v1) <= 0) continue;
    m = std::min(m, std::min(v0, v1));
  }
  return m;
}

/// |T^n x|^2 for the layered state sum_k amp_k 1_{0 < a < eps_k} with the
/// eps_k strictly decreasing; the value on the band eps_{j+1} <= a < eps_j
/// is the partial sum of the first j amplitudes.
inline double slow_norm_sq(const PiecewiseLinearProfile& prof, const std::vector<double>& eps,
                           const std::vector<double>& amp, double n) {
  const int K = (int)eps.size();
  double total = 0, s = 0;
  for (int j = 0; j < K; ++j) {
    s += amp[j];
    double cur = sublevel_decay_integral(prof, eps[j], n);
    double next = j + 1 < K ? sublevel_decay_integral(prof, eps[j + 1], n) : 0.0;
    total += s * s * std::max(0.0, cur - next);
  }
  return total;
}

}  // namespace detail

/// Transport data whose orbit decays no faster than the prescribed rate:
/// |T^{n_k} x| >= r(n_k) at the checkpoints n_k = 2^k, k = 1..K. Built as a
/// layered sum of sub-level indicators of the damping profile and certified
/// against the exact profile, not against grid samples, since the midpoint
/// norm acquires a spurious spectral gap at the grid scale.
inline SlowData make_slow_data(const DampingRegion& region, int N,
                               const std::function<double(double)>& r, int K) {
  if (region.period() != 1.0) throw config_error("transport requires period 1");
  if (K < 1 || K > 60) throw config_error("slow data requires 1 <= K <= 60 checkpoints");
  auto prof_opt = exact_profile(region);
  if (!prof_opt)
    throw config_error("slow data requires a region with an exact damping profile");
  const auto& prof = *prof_opt;
  auto grid = line_average(region, N);
  if (grid.active_cells().empty())
    throw config_error("degenerate slow data: the damping vanishes identically");

  SlowData out;
  out.x = TransportState::zero(N);

  std::vector<long> ns(K);
  std::vector<double> req(K);
  double rmax = 0;
  for (int k = 0; k < K; ++k) {
    ns[k] = 1L << (k + 1);
    req[k] = r((double)ns[k]);
    rmax = std::max(rmax, req[k]);
  }

  if (rmax <= 0) {
    // any state meets a zero target; return the normalized damped-set plateau
    for (int i = 0; i < N; ++i)
      if (grid.active(i)) out.x.values[i] = 1.0;
    double nm = out.x.norm();
    for (double& v : out.x.values) v /= nm;
    for (int k = 0; k < K; ++k)
      out.certificate.push_back(
          {ns[k], req[k], power_norm_continuum(prof, out.x, (double)ns[k])});
    return out;
  }

  if (detail::profile_essinf_active(prof) > 1e-12)
    throw config_error(
        "exponential regime: the damping is bounded below on its support, "
        "no slow data exists");

  std::vector<double> eps(K), amp(K, 0.0);
  for (int k = 0; k < K; ++k) {
    eps[k] = 1.0 / (double)ns[k];
    double have_sq = detail::slow_norm_sq(prof, eps, amp, (double)ns[k]);
    if (have_sq >= req[k] * req[k]) continue;
    double gain = detail::sublevel_decay_integral(prof, eps[k], (double)ns[k]);
    if (gain <= 0)
      throw numerical_error("slow-rate certificate failed at checkpoint n = " +
                            std::to_string(ns[k]));
    // the layers are nonnegative, so the new layer's own contribution is a
    // lower bound for the combined norm
    amp[k] = std::sqrt((req[k] * req[k] - have_sq) / gain);
  }

  for (int k = 0; k < K; ++k) {
    double achieved = std::sqrt(detail::slow_norm_sq(prof, eps, amp, (double)ns[k]));
    if (achieved < req[k] * (1 - 1e-9))
      throw numerical_error("slow-rate certificate failed at checkpoint n = " +
                            std::to_string(ns[k]));
    out.levels.push_back({ns[k], eps[k], amp[k]});
    out.certificate.push_back({ns[k], req[k], achieved});
  }

  // grid representation: the cell average of the layered function
  for (int i = 0; i < N; ++i) {
    double lo = (double)i / N, hi = (double)(i + 1) / N, v = 0;
    for (int k = 0; k < K; ++k)
      if (amp[k] > 0)
        v += amp[k] * detail::sublevel_decay_integral(prof, eps[k], 0.0, lo, hi);
    out.x.values[i] = v * N;
  }
  return out;
}

/// Transport data in every polynomial class at once: the seed is cut off
/// smoothly on a neighborhood of the undamped set, so a^{-gamma} x stays
/// square-integrable for all gamma.
inline TransportState make_superpoly_data(const DampingRegion& region,
                                          const TransportState& seed) {
  if (region.period() != 1.0) throw config_error("transport requires period 1");
  auto profile = line_average(region, seed.n());
  double amax = 0;
  for (int i = 0; i < seed.n(); ++i) amax = std::max(amax, profile.values[i]);
  if (amax <= 0)
    throw config_error(
        "degenerate superpolynomial data: the damping vanishes identically");
  const double eps = amax / 8;
  TransportState x = seed;
  for (int i = 0; i < seed.n(); ++i) {
    double w = (profile.values[i] - eps) / eps;  // ramp on eps <= a <= 2 eps
    double chi = w <= 0 ? 0.0 : (w >= 1 ? 1.0 : w * w * (3 - 2 * w));
    x.values[i] *= chi;
  }
  return x;
}

/// Wave data in the range of (I - T)^4: the decaying part of the seed is
/// smoothed by four applications of I - T, the mean part is kept as is. A
/// seed fixed by T comes back unchanged.
inline WaveState make_superpoly_data(const MonodromyOperator& op, const Projection& p,
                                     const WaveState& seed) {
  if (op.period() != 2.0 || op.wave_n() != seed.n())
    throw config_error("monodromy operator does not match the wave grid");
  VectorXd g = wave_coordinates(seed);
  VectorXd y = fractional_power_apply(op, 4.0, g, p);
  return wave_from_coordinates(y + p.apply(g), seed.n());
}

inline WaveState make_superpoly_data(const DampingRegion& region, const WaveState& seed) {
  auto op = MonodromyOperator::wave(region, seed.n());
  auto p = ergodic_projection(op);
  return make_superpoly_data(op, p, seed);
}

}  // namespace pevol
