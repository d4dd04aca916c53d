#pragma once

#include "pevol/spectral.hpp"

namespace pevol {

enum class System { Transport, Wave };

inline void check_system_region(System system, const DampingRegion& region) {
  double want = system == System::Transport ? 1.0 : 2.0;
  if (region.period() != want)
    throw config_error("damping period does not match the system");
}

/// Observation Gramian of the free flow, <Gx,x> = integral over one period
/// of ||B(t)* T0(t) x||^2, in the energy inner product. Transport reduces to
/// multiplication by the ray profile a(s_i); the wave form is assembled on
/// the velocity slab decomposition, where the time integrals are exact for
/// grid data (n_t records the slab count used).
struct Gramian {
  bool diagonal = false;
  std::vector<double> diag;  // transport: a(s_i)
  MatrixXd matrix;           // wave: reduced energy coordinates
  int n = 0;
  int n_t = 0;

  int dim() const { return diagonal ? (int)diag.size() : (int)matrix.rows(); }

  /// <Gx,x> for x in the operator coordinates (transport cell values or
  /// wave reduced coordinates).
  double quadratic(const VectorXd& x) const {
    if (diagonal) {
      double q = 0;
      for (int i = 0; i < dim(); ++i) q += diag[i] * x[i] * x[i];
      return q / n;
    }
    return x.dot(matrix * x);
  }
};

inline Gramian gramian(System system, const DampingRegion& region, int N, int n_t = 0) {
  check_system_region(system, region);
  if (n_t < 0) throw config_error("quadrature resolution must be nonnegative");
  Gramian g;
  g.n = N;
  if (system == System::Transport) {
    g.diagonal = true;
    g.diag = line_average(region, N).values;
    g.n_t = N;
    return g;
  }
  const int d = 2 * N;
  const double ds = 1.0 / N;
  MatrixXd m = MatrixXd::Zero(d, d);
  for (int i = 0; i < N; ++i) {
    auto sections = region.t_section_intervals((i + 0.5) / N);
    if (sections.empty()) continue;
    for (int k = 0; k <= 2 * N; ++k) {
      Interval slab{(k - 0.5) * ds, (k + 0.5) * ds};
      slab.lo = std::max(slab.lo, 0.0);
      slab.hi = std::min(slab.hi, 2.0);
      double mass = 0;
      for (const auto& sec : sections) {
        double lo = std::max(sec.lo, slab.lo), hi = std::min(sec.hi, slab.hi);
        if (hi > lo) mass += hi - lo;
      }
      if (mass == 0) continue;
      mass *= ds * region.amplitude() / 4;  // velocity = (F_p - F_q)/2
      int p = (i + k) % d;
      int q = (d - 1 - i + k) % d;
      m(p, p) += mass;
      m(q, q) += mass;
      m(p, q) -= mass;
      m(q, p) -= mass;
    }
  }
  g.matrix = (double)d * MeanSplit(d).reduce(m);
  g.n_t = 2 * N + 1;
  return g;
}

/// Smallest eigenvalues of the Gramian on the full space and on the
/// complement Z = Ran(I - P). An empty Z reports infinity (the exact
/// observability condition on Z is vacuous there).
struct ObservabilityConstants {
  double kappa_full_sq = 0;
  double kappa_z_sq = 0;
};

inline ObservabilityConstants observability_constants(const Gramian& g,
                                                      const Projection& p) {
  ObservabilityConstants out;
  if (g.diagonal) {
    double full = std::numeric_limits<double>::infinity();
    double z = std::numeric_limits<double>::infinity();
    for (int i = 0; i < g.dim(); ++i) {
      full = std::min(full, g.diag[i]);
      if (p.mask[i] == 0.0) z = std::min(z, g.diag[i]);
    }
    out.kappa_full_sq = full;
    out.kappa_z_sq = z;
    return out;
  }
  out.kappa_full_sq = symmetric_eigs(g.matrix).values[0];
  MatrixXd q = p.complement_basis();
  if (q.cols() == 0) {
    out.kappa_z_sq = std::numeric_limits<double>::infinity();
    return out;
  }
  MatrixXd gz = q.transpose() * (g.matrix * q);
  gz = 0.5 * (gz + gz.transpose().eval());
  out.kappa_z_sq = symmetric_eigs(gz).values[0];
  return out;
}

/// Two-sided comparison of the damped and free observation integrals,
/// (1/c^2) I_free <= I_damped <= I_free with c = 1 + \int ||B(t)||^2 dt.
struct SandwichSample {
  double damped = 0;  // integral along U(t,0)x
  double free = 0;    // integral along T0(t)x
  double upper = 0;   // damped / free, bounded by 1
  double lower = 0;   // free / (c^2 damped), bounded by 1
  bool vacuous = false;
};

struct SandwichReport {
  double c_tau = 1;
  double slack = 0.05;
  std::vector<SandwichSample> samples;
  double worst_upper = 0;
  double worst_lower = 0;
  bool pass = true;
  int offending = -1;
};

inline SandwichReport sandwich_check(System system, const DampingRegion& region,
                                     int samples, int N, unsigned seed = 2718) {
  check_system_region(system, region);
  if (samples < 20) throw config_error("sandwich check needs at least 20 samples");
  SandwichReport rep;
  rep.c_tau = 1.0 + region.sup_b_time_integral();
  const double c2 = rep.c_tau * rep.c_tau;
  Rng rng(seed);

  Gramian g;
  std::vector<double> profile;
  if (system == System::Transport) {
    profile = line_average(region, N).values;
  } else {
    g = gramian(System::Wave, region, N);
  }

  for (int k = 0; k < samples; ++k) {
    SandwichSample s;
    if (system == System::Transport) {
      auto x = TransportState::sample(N, [&](double) { return rng.normal(); });
      for (int i = 0; i < N; ++i) {
        double w = x.values[i] * x.values[i] / N;
        s.free += profile[i] * w;
        s.damped += -std::expm1(-2.0 * profile[i]) / 2.0 * w;
      }
    } else {
      auto x = WaveState::sample(
          N, [&](double) { return rng.normal(); }, [&](double) { return rng.normal(); });
      s.free = g.quadratic(wave_coordinates(x));
      s.damped = damped_solve_traced(region, x, 2.0).dissipated / 2.0;
    }
    double floor = 1e-14;
    if (s.free <= floor && s.damped <= floor) {
      s.vacuous = true;
    } else {
      s.upper = s.damped / s.free;
      s.lower = s.free / (c2 * s.damped);
      rep.worst_upper = std::max(rep.worst_upper, s.upper);
      rep.worst_lower = std::max(rep.worst_lower, s.lower);
      if ((s.upper > 1 + rep.slack || s.lower > 1 + rep.slack) && rep.offending < 0) {
        rep.pass = false;
        rep.offending = k;
      }
    }
    rep.samples.push_back(s);
  }
  return rep;
}

/// Geometric control: dwell time of every characteristic ray inside the
/// damping set over the time window. Wave rays reflect at both walls
/// (s(t) = fold(s0 +- t)); transport rays circulate as s(t) = s0 - t mod 1.
struct GCCVerdict {
  bool holds = false;
  double min_dwell = 0;
  bool has_witness = false;
  double witness_s0 = 0;
  int witness_direction = 0;
};

namespace detail {

/// Exact dwell of the ray through s0 over (0, window). The path is split at
/// wall reflections and period boundaries; each piece is a straight segment
/// within one period cell, intersected exactly with the region.
inline double ray_dwell(System system, const DampingRegion& region, double s0,
                        int direction, double window) {
  const double period = region.period();
  std::vector<double> cuts = {0.0, window};
  for (double t = period; t < window; t += period) cuts.push_back(t);
  if (system == System::Wave) {
    // fold(s0 + dir t) crosses a wall when s0 + dir t is an integer
    for (double m = std::ceil(direction > 0 ? s0 : s0 - window);; m += 1.0) {
      double t = direction > 0 ? m - s0 : s0 - m;
      if (direction > 0 ? t >= window : t <= 0) break;
      if (t > 0 && t < window) cuts.push_back(t);
    }
  } else {
    for (double t = wrap(s0, 1.0); t < window; t += 1.0)
      if (t > 0) cuts.push_back(t);
  }
  std::sort(cuts.begin(), cuts.end());
  double dwell = 0;
  for (size_t j = 0; j + 1 < cuts.size(); ++j) {
    double ta = cuts[j], tb = cuts[j + 1];
    if (tb - ta < 1e-13) continue;
    double tm = (ta + tb) / 2;
    double sm, slope;
    if (system == System::Wave) {
      double xi = wrap(s0 + direction * tm, 2.0);
      sm = fold(s0 + direction * tm);
      slope = (xi < 1.0 ? 1.0 : -1.0) * direction;
    } else {
      sm = wrap(s0 - tm, 1.0);
      slope = -1.0;
    }
    double tr = period * std::floor(tm / period);  // period cell of the piece
    Point p0{sm + slope * (ta - tm), ta - tr};
    Point p1{sm + slope * (tb - tm), tb - tr};
    auto hits = region.segment_dwell_intervals(p0, p1, 0.0, 1.0);
    dwell += (tb - ta) * total_length(hits);
  }
  return dwell;
}

}  // namespace detail

inline GCCVerdict gcc_check(System system, const DampingRegion& region, double window,
                            int M = 4096) {
  check_system_region(system, region);
  if (!region.is_indicator())
    throw config_error("geometric control check requires an indicator region");
  if (!(window > 0)) throw config_error("geometric control window must be positive");

  // candidate ray parameters: uniform grid plus corner-aligned rays, where
  // the piecewise-linear dwell function attains its breakpoints
  std::vector<std::pair<double, int>> rays;
  std::vector<int> directions =
      system == System::Wave ? std::vector<int>{1, -1} : std::vector<int>{-1};
  for (int dir : directions)
    for (int j = 0; j <= M; ++j) rays.push_back({(double)j / M, dir});
  std::vector<Point> corners;
  for (const auto& q : region.rects()) {
    corners.push_back({q.s0, q.t0});
    corners.push_back({q.s0, q.t1});
    corners.push_back({q.s1, q.t0});
    corners.push_back({q.s1, q.t1});
  }
  double del = region.delta();
  if (region.rects().empty() && del > 0)  // diamond vertices
    for (auto [ds, dt] : {std::pair{del, 0.0}, {-del, 0.0}, {0.0, del}, {0.0, -del}})
      corners.push_back({0.5 + ds, 0.5 + dt});
  for (const auto& c : corners) {
    if (system == System::Wave) {
      for (double raw : {wrap(c.x - c.y, 2.0), wrap(-c.x - c.y, 2.0)}) {
        if (raw <= 1.0)
          rays.push_back({raw, 1});
        else
          rays.push_back({2.0 - raw, -1});
      }
    } else {
      rays.push_back({wrap(c.x + c.y, 1.0), -1});
    }
  }
  if (region.kind() == RegionKind::RayBand && del > 0)
    for (int dir : directions)
      for (double s0 : {del, 1 - del}) rays.push_back({s0, dir});

  GCCVerdict v;
  v.min_dwell = std::numeric_limits<double>::infinity();
  for (const auto& [s0, dir] : rays) {
    double d = detail::ray_dwell(system, region, s0, dir, window);
    if (d < v.min_dwell) {
      v.min_dwell = d;
      if (d <= 0 && !v.has_witness) {
        v.has_witness = true;
        v.witness_s0 = s0;
        v.witness_direction = dir;
      }
    }
  }
  v.holds = v.min_dwell > 0;
  return v;
}

/// Window sweep for switched damping with a general switching period: dwell
/// over (0, n tau) becomes positive for some n when tau is incommensurate
/// with the ray period 2.
struct KroneckerSweep {
  std::vector<std::pair<int, double>> entries;  // (n, min dwell over rays)
  int first_positive = 0;                       // 0 when none found
};

inline KroneckerSweep kronecker_sweep(double delta, double tau, int n_max = 64,
                                      int M = 512) {
  if (!(tau > 0)) throw config_error("switching period must be positive");
  auto region = DampingRegion::rectangles(
      {{1 - delta, 1, 0, tau / 2}, {0, delta, tau / 2, tau}}, tau);
  KroneckerSweep out;
  for (int n = 1; n <= n_max; ++n) {
    double window = n * tau;
    double min_dwell = std::numeric_limits<double>::infinity();
    for (int dir : {1, -1})
      for (int j = 0; j <= M; ++j) {
        double d = detail::ray_dwell(System::Wave, region, (double)j / M, dir, window);
        min_dwell = std::min(min_dwell, d);
      }
    out.entries.push_back({n, min_dwell});
    if (min_dwell > 0) {
      out.first_positive = n;
      break;
    }
  }
  return out;
}

}  // namespace pevol
