#pragma once

#include <array>
#include <functional>
#include <optional>

#include "pevol/common.hpp"

namespace pevol {

enum class RegionKind { Diamond, CornerSquare, RayBand, Switched, RectangleUnion, Analytic };

inline const char* to_string(RegionKind k) {
  switch (k) {
    case RegionKind::Diamond: return "diamond";
    case RegionKind::CornerSquare: return "corner_square";
    case RegionKind::RayBand: return "ray_band";
    case RegionKind::Switched: return "switched";
    case RegionKind::RectangleUnion: return "rectangle_union";
    case RegionKind::Analytic: return "analytic";
  }
  return "?";
}

/// Open axis-aligned rectangle (s0,s1) x (t0,t1) in space-time.
struct Rect {
  double s0, s1, t0, t1;
};

/// Time-periodic damping region: b(s,t) = amplitude * indicator of an open
/// set, or an arbitrary nonnegative coefficient for the Analytic kind.
/// Space variable lives on (0,1); time is reduced modulo the period.
class DampingRegion {
 public:
  static DampingRegion diamond(double delta, double amplitude = 1.0) {
    require(delta >= 0 && delta <= 0.5, "diamond delta must lie in [0, 1/2]");
    DampingRegion r(RegionKind::Diamond, delta, amplitude, 1.0);
    if (delta > 0)
      r.signed_polys_.push_back({{{0.5 + delta, 0.5}, {0.5, 0.5 + delta}, {0.5 - delta, 0.5},
                                  {0.5, 0.5 - delta}},
                                 +1.0});
    return r;
  }

  static DampingRegion corner_square(double delta, double amplitude = 1.0) {
    require(delta >= 0 && delta <= 1, "corner square delta must lie in [0, 1]");
    DampingRegion r(RegionKind::CornerSquare, delta, amplitude, 1.0);
    if (delta > 0) r.rects_.push_back({0, delta, 0, delta});
    return r;
  }

  /// Complement of a moving band of half-width 1/2-delta around the broken
  /// ray through (1/2, 0); period 2.
  static DampingRegion ray_band(double delta, double amplitude = 1.0) {
    require(delta >= 0 && delta <= 0.5, "ray band delta must lie in [0, 1/2]");
    DampingRegion r(RegionKind::RayBand, delta, amplitude, 2.0);
    r.build_ray_band_pieces();
    return r;
  }

  /// Damping on (1-delta,1) for the first half-period and on (0,delta) for
  /// the second; period 2.
  static DampingRegion switched(double delta, double amplitude = 1.0) {
    require(delta >= 0 && delta <= 1, "switched delta must lie in [0, 1]");
    DampingRegion r(RegionKind::Switched, delta, amplitude, 2.0);
    if (delta > 0) {
      r.rects_.push_back({1 - delta, 1, 0, 1});
      r.rects_.push_back({0, delta, 1, 2});
    }
    return r;
  }

  static DampingRegion rectangles(std::vector<Rect> rects, double period,
                                  double amplitude = 1.0) {
    require(period > 0, "period must be positive");
    for (const auto& q : rects) {
      require(q.s0 >= 0 && q.s1 <= 1 && q.s0 < q.s1, "rectangle s-range invalid");
      require(q.t0 >= 0 && q.t1 <= period && q.t0 < q.t1, "rectangle t-range invalid");
    }
    DampingRegion r(RegionKind::RectangleUnion, 0.0, amplitude, period);
    r.rects_ = std::move(rects);
    return r;
  }

  static DampingRegion analytic(std::function<double(double, double)> b, double period,
                                double amplitude = 1.0) {
    require(period > 0, "period must be positive");
    DampingRegion r(RegionKind::Analytic, 0.0, amplitude, period);
    r.fn_ = std::move(b);
    return r;
  }

  RegionKind kind() const { return kind_; }
  double delta() const { return delta_; }
  double amplitude() const { return amplitude_; }
  double period() const { return period_; }
  bool is_indicator() const { return kind_ != RegionKind::Analytic; }
  const std::vector<Rect>& rects() const { return rects_; }

  /// Pointwise coefficient b(s, t mod period). The spatial domain is open.
  double eval(double s, double t) const {
    if (!(s > 0 && s < 1)) throw std::domain_error("eval: s outside (0,1)");
    double w = wrap(t, period_);
    switch (kind_) {
      case RegionKind::Diamond:
        return (std::abs(s - 0.5) + std::abs(w - 0.5) < delta_) ? amplitude_ : 0.0;
      case RegionKind::CornerSquare:
        return (s < delta_ && w > 0 && w < delta_) ? amplitude_ : 0.0;
      case RegionKind::RayBand:
        return (std::abs(s - ray_center(w)) > 0.5 - delta_) ? amplitude_ : 0.0;
      case RegionKind::Switched:
      case RegionKind::RectangleUnion:
        for (const auto& q : rects_)
          if (s > q.s0 && s < q.s1 && w > q.t0 && w < q.t1) return amplitude_;
        return 0.0;
      case RegionKind::Analytic:
        return amplitude_ * fn_(s, w);
    }
    return 0.0;
  }

  /// Center of the undamped band for the RayBand kind.
  static double ray_center(double t) { return fold(0.5 - t); }

  /// Exact mass of b over the box (s0,s1) x (t0,t1); t may span several
  /// periods. Quadrature fallback for the Analytic kind (abs err <= 1e-8).
  double box_mass(double s0, double s1, double t0, double t1) const {
    if (s1 <= s0 || t1 <= t0) return 0;
    s0 = std::max(s0, 0.0);
    s1 = std::min(s1, 1.0);
    if (s1 <= s0) return 0;
    if (kind_ == RegionKind::Analytic) return analytic_box_mass(s0, s1, t0, t1);
    double total = 0;
    double k0 = std::floor(t0 / period_);
    double k1 = std::ceil(t1 / period_);
    for (double k = k0; k < k1; ++k) {
      double lo = std::max(t0 - k * period_, 0.0);
      double hi = std::min(t1 - k * period_, period_);
      if (hi <= lo) continue;
      total += period_cell_box_mass(s0, s1, lo, hi);
    }
    return total;
  }

  /// Mass of b over one full period rectangle (0,1) x (0, period).
  double area() const { return box_mass(0, 1, 0, period_); }

  /// Open sub-intervals of [r0, r1] on which the characteristic point
  /// (frac(sigma - r), r) lies inside the damping set. Indicator kinds only;
  /// requires period 1.
  std::vector<Interval> line_dwell_intervals(double sigma, double r0, double r1) const {
    if (kind_ == RegionKind::Analytic)
      throw std::logic_error("line_dwell_intervals: not defined for analytic coefficients");
    require_unit_period();
    std::vector<Interval> out;
    long k0 = (long)std::floor(r0);
    long k1 = (long)std::ceil(r1);
    for (long k = k0; k < k1; ++k) {
      double c = wrap(sigma - (double)k, 1.0);
      // branch A: s = c - u for u in (0,c); branch B: s = c + 1 - u for u in (c,1)
      collect_branch_dwell({c, 0.0}, {c - 1.0, 1.0}, 0.0, c, (double)k, r0, r1, out);
      collect_branch_dwell({c + 1.0, 0.0}, {c, 1.0}, c, 1.0, (double)k, r0, r1, out);
    }
    merge_intervals(out);
    return out;
  }

  /// Integral of b along the characteristic line, r in [r0, r1]:
  /// the damping accumulated by a transported profile. Exact for indicator
  /// kinds; adaptive Gauss-Legendre (abs err <= 1e-9) otherwise.
  double line_integral(double sigma, double r0, double r1) const {
    if (r1 <= r0) return 0;
    if (is_indicator())
      return amplitude_ * total_length(line_dwell_intervals(sigma, r0, r1));
    require_unit_period();
    auto f = [&](double r) {
      double s = wrap(sigma - r, 1.0);
      if (s <= 0 || s >= 1) return 0.0;  // measure-zero grid points
      return amplitude_ * fn_(s, wrap(r, period_));
    };
    return adaptive_gl(f, r0, r1, 1e-9, 0);
  }

  /// Integral over one period of the essential supremum of b(., t).
  double sup_b_time_integral() const {
    switch (kind_) {
      case RegionKind::Diamond:
        return amplitude_ * 2 * delta_;
      case RegionKind::CornerSquare:
        return amplitude_ * delta_;
      case RegionKind::RayBand:
        return delta_ > 0 ? amplitude_ * period_ : slice_positive_measure_ray_band();
      case RegionKind::Switched:
      case RegionKind::RectangleUnion: {
        std::vector<Interval> ts;
        for (const auto& q : rects_) ts.push_back({q.t0, q.t1});
        merge_intervals(ts);
        return amplitude_ * total_length(ts);
      }
      case RegionKind::Analytic: {
        auto f = [&](double t) {
          double m = 0;
          for (int i = 1; i < 256; ++i) m = std::max(m, fn_(i / 256.0, wrap(t, period_)));
          return amplitude_ * m;
        };
        return adaptive_gl(f, 0, period_, 1e-6, 0);
      }
    }
    return 0;
  }

  /// Time sections {t in [0, period): b(s, t) > 0} at fixed s, as disjoint
  /// ordered intervals. Indicator kinds only.
  std::vector<Interval> t_section_intervals(double s) const {
    if (!(s > 0 && s < 1)) throw std::domain_error("t_section_intervals: s outside (0,1)");
    std::vector<Interval> out;
    switch (kind_) {
      case RegionKind::Diamond: {
        double r = delta_ - std::abs(s - 0.5);
        if (r > 0) out.push_back({0.5 - r, 0.5 + r});
        break;
      }
      case RegionKind::CornerSquare:
        if (s < delta_ && delta_ > 0) out.push_back({0, delta_});
        break;
      case RegionKind::Switched:
      case RegionKind::RectangleUnion:
        for (const auto& q : rects_)
          if (s > q.s0 && s < q.s1) out.push_back({q.t0, q.t1});
        merge_intervals(out);
        break;
      case RegionKind::RayBand: {
        // complement within [0,2) of the two diagonal bands through s
        std::vector<Interval> tube;
        double d = delta_;
        if (d < 0.5) {
          auto push_mod = [&](double lo, double hi) {
            for (double shift : {-2.0, 0.0, 2.0}) {
              double a = std::max(lo + shift, 0.0), b = std::min(hi + shift, 2.0);
              if (b > a) tube.push_back({a, b});
            }
          };
          push_mod(d - s, 1 - d - s);  // frac2(s+t) in (d, 1-d)
          push_mod(d + s, 1 - d + s);  // frac2(t-s) in (d, 1-d)
          merge_intervals(tube);
        }
        double cur = 0;
        for (const auto& I : tube) {
          if (I.lo > cur) out.push_back({cur, I.lo});
          cur = std::max(cur, I.hi);
        }
        if (cur < 2.0) out.push_back({cur, 2.0});
        break;
      }
      case RegionKind::Analytic:
        throw std::logic_error("t_section_intervals: analytic kind unsupported");
    }
    return out;
  }

  /// Point dwell of the straight segment p(u) = p0 + u*(p1-p0), u in [u0,u1],
  /// inside the damping set. The time coordinate is interpreted within one
  /// period (the caller reduces and splits). Returns u-intervals.
  /// Indicator kinds only.
  std::vector<Interval> segment_dwell_intervals(Point p0, Point p1, double u0,
                                                double u1) const {
    if (kind_ == RegionKind::Analytic)
      throw std::logic_error("segment_dwell_intervals: analytic kind unsupported");
    std::vector<Interval> out;
    if (kind_ == RegionKind::RayBand) {
      // complement of a union of diagonal bands inside the period cell
      Interval base = clip_segment(p0, p1, u0, u1,
                                   rect_planes({0, 1, 0, period_}));
      if (base.empty()) return out;
      std::vector<Interval> tube;
      double d = delta_;
      if (d < 0.5) {
        auto band = [&](double a, double b, double lo, double hi) {
          std::vector<HalfPlane> hs = {{-a, -b, -lo}, {a, b, hi}};
          Interval iv = clip_segment(p0, p1, base.lo, base.hi, hs);
          if (!iv.empty()) tube.push_back(iv);
        };
        band(1, 1, d, 1 - d);
        band(1, 1, 2 + d, 3 - d);
        band(-1, 1, d, 1 - d);
        merge_intervals(tube);
      }
      double cur = base.lo;
      for (const auto& I : tube) {
        if (I.lo > cur) out.push_back({cur, I.lo});
        cur = std::max(cur, I.hi);
      }
      if (base.hi > cur) out.push_back({cur, base.hi});
      return out;
    }
    if (!rects_.empty()) {
      for (const auto& q : rects_) {
        Interval iv = clip_segment(p0, p1, u0, u1, rect_planes(q));
        if (!iv.empty()) out.push_back(iv);
      }
      merge_intervals(out);
      return out;
    }
    // diamond: a single convex positive piece carries the set
    for (const auto& sp : signed_polys_) {
      if (sp.second < 0) continue;
      Interval iv = clip_segment(p0, p1, u0, u1, polygon_planes(sp.first));
      if (!iv.empty()) out.push_back(iv);
    }
    merge_intervals(out);
    return out;
  }

 private:
  DampingRegion(RegionKind k, double d, double amp, double per)
      : kind_(k), delta_(d), amplitude_(amp), period_(per) {
    require(amp > 0, "amplitude must be positive");
  }

  static void require(bool ok, const char* msg) {
    if (!ok) throw config_error(msg);
  }

  void require_unit_period() const {
    if (period_ != 1.0)
      throw config_error("operation requires a region of period 1");
  }

  void build_ray_band_pieces() {
    // damped set = full cell minus the union of three diagonal bands
    // (s+t in (d,1-d), s+t in (2+d,3-d), t-s in (d,1-d)); inclusion-exclusion
    double d = delta_;
    Polygon cell = rect_polygon(0, 1, 0, 2);
    if (d >= 0.5) {  // bands are empty; everything but a null set is damped
      signed_polys_.push_back({cell, +1.0});
      return;
    }
    auto strip = [&](double a, double b, double c_lo, double c_hi) {
      // half-planes c_lo < a*s + b*t < c_hi within the cell
      std::vector<HalfPlane> hs = {{-a, -b, -c_lo}, {a, b, c_hi}};
      return clip_polygon(cell, hs);
    };
    Polygon xi0 = strip(1, 1, d, 1 - d);
    Polygon xi1 = strip(1, 1, 2 + d, 3 - d);
    Polygon eta = strip(-1, 1, d, 1 - d);
    signed_polys_.push_back({cell, +1.0});
    for (const Polygon* p : {&xi0, &xi1, &eta})
      if (p->size() >= 3) signed_polys_.push_back({*p, -1.0});
    auto add_intersection = [&](const Polygon& a, double alo, double ahi) {
      std::vector<HalfPlane> hs = {{-1, -1, -alo}, {1, 1, ahi}};
      Polygon q = clip_polygon(a, hs);
      if (q.size() >= 3) signed_polys_.push_back({q, +1.0});
    };
    if (eta.size() >= 3) {
      add_intersection(eta, d, 1 - d);
      add_intersection(eta, 2 + d, 3 - d);
    }
  }

  double slice_positive_measure_ray_band() const {
    // delta = 0: the slice is nonempty except when the band center sits at 1/2
    return amplitude_ * period_;
  }

  static std::vector<HalfPlane> rect_planes(const Rect& q) {
    return {{-1, 0, -q.s0}, {1, 0, q.s1}, {0, -1, -q.t0}, {0, 1, q.t1}};
  }

  static std::vector<HalfPlane> polygon_planes(const Polygon& p) {
    std::vector<HalfPlane> hs;
    for (size_t i = 0; i < p.size(); ++i) {
      const Point& a = p[i];
      const Point& b = p[(i + 1) % p.size()];
      // inward side of edge a->b for a CCW polygon: (x-a) x (b-a) <= 0
      double nx = -(b.y - a.y), ny = b.x - a.x;
      hs.push_back({-nx, -ny, -(nx * a.x + ny * a.y)});
    }
    return hs;
  }

  double period_cell_box_mass(double s0, double s1, double t0, double t1) const {
    if (!rects_.empty()) {
      // union of rectangles, exact under overlap via strip decomposition
      std::vector<double> cuts = {s0, s1};
      for (const auto& q : rects_) {
        if (q.s0 > s0 && q.s0 < s1) cuts.push_back(q.s0);
        if (q.s1 > s0 && q.s1 < s1) cuts.push_back(q.s1);
      }
      std::sort(cuts.begin(), cuts.end());
      double total = 0;
      for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        double mid = 0.5 * (cuts[i] + cuts[i + 1]);
        double w = cuts[i + 1] - cuts[i];
        if (w <= 0) continue;
        std::vector<Interval> ts;
        for (const auto& q : rects_)
          if (mid > q.s0 && mid < q.s1)
            ts.push_back({std::max(q.t0, t0), std::min(q.t1, t1)});
        merge_intervals(ts);
        total += w * total_length(ts);
      }
      return amplitude_ * total;
    }
    double total = 0;
    auto box = std::vector<HalfPlane>{
        {-1, 0, -s0}, {1, 0, s1}, {0, -1, -t0}, {0, 1, t1}};
    for (const auto& sp : signed_polys_) {
      Polygon q = clip_polygon(sp.first, box);
      if (q.size() >= 3) total += sp.second * polygon_area(q);
    }
    return amplitude_ * total;
  }

  double analytic_box_mass(double s0, double s1, double t0, double t1) const {
    auto fs = [&](double t) {
      auto g = [&](double s) { return amplitude_ * fn_(s, wrap(t, period_)); };
      return adaptive_gl(g, s0, s1, 1e-10, 0);
    };
    return adaptive_gl(fs, t0, t1, 1e-8, 0);
  }

  void collect_branch_dwell(Point a, Point b, double u_lo, double u_hi, double k,
                            double r0, double r1, std::vector<Interval>& out) const {
    // branch parametrized by u = r - k; restrict to the requested r-window
    u_lo = std::max(u_lo, r0 - k);
    u_hi = std::min(u_hi, r1 - k);
    if (u_hi <= u_lo) return;
    if (!rects_.empty()) {
      for (const auto& q : rects_) {
        Interval iv = clip_segment(a, b, u_lo, u_hi, rect_planes(q));
        if (!iv.empty()) out.push_back({iv.lo + k, iv.hi + k});
      }
      return;
    }
    for (const auto& sp : signed_polys_) {
      if (sp.second < 0) continue;
      Interval iv = clip_segment(a, b, u_lo, u_hi, polygon_planes(sp.first));
      if (!iv.empty()) out.push_back({iv.lo + k, iv.hi + k});
    }
  }

  template <class F>
  static double adaptive_gl(const F& f, double a, double b, double tol, int depth) {
    double whole = gl16(f, a, b);
    double mid = 0.5 * (a + b);
    double split = gl16(f, a, mid) + gl16(f, mid, b);
    if (std::abs(whole - split) <= tol || depth > 24) return split;
    return adaptive_gl(f, a, mid, tol / 2, depth + 1) +
           adaptive_gl(f, mid, b, tol / 2, depth + 1);
  }

  template <class F>
  static double gl16(const F& f, double a, double b) {
    static const std::array<double, 8> x = {0.0950125098376374, 0.2816035507792589,
                                            0.4580167776572274, 0.6178762444026438,
                                            0.7554044083550030, 0.8656312023878318,
                                            0.9445750230732326, 0.9894009349916499};
    static const std::array<double, 8> w = {0.1894506104550685, 0.1826034150449236,
                                            0.1691565193950025, 0.1495959888165767,
                                            0.1246289712555339, 0.0951585116824928,
                                            0.0622535239386479, 0.0271524594117541};
    double c = 0.5 * (a + b), h = 0.5 * (b - a), s = 0;
    for (int i = 0; i < 8; ++i) s += w[i] * (f(c - h * x[i]) + f(c + h * x[i]));
    return s * h;
  }

  RegionKind kind_;
  double delta_;
  double amplitude_;
  double period_;
  std::vector<Rect> rects_;
  std::vector<std::pair<Polygon, double>> signed_polys_;
  std::function<double(double, double)> fn_;
};

/// Cell-averaged accumulated damping a(s): the line integral of b along the
/// characteristic through s over one period, sampled at cell centers.
struct LineAverageProfile {
  int n = 0;
  std::vector<double> values;
  double atol = 1e-12;

  double ds() const { return 1.0 / n; }
  double center(int i) const { return (i + 0.5) / n; }
  bool active(int i) const { return values[i] > atol; }

  std::vector<int> active_cells() const {
    std::vector<int> out;
    for (int i = 0; i < n; ++i)
      if (active(i)) out.push_back(i);
    return out;
  }
  std::vector<int> null_cells() const {
    std::vector<int> out;
    for (int i = 0; i < n; ++i)
      if (!active(i)) out.push_back(i);
    return out;
  }
  double mass() const {
    double s = 0;
    for (double v : values) s += v;
    return s * ds();
  }
  double min_active() const {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
      if (active(i)) m = std::min(m, values[i]);
    return m;
  }
};

/// Computes the accumulated-damping profile on an N-cell grid. Exact for
/// indicator kinds; adaptive quadrature (abs err <= 1e-8) for analytic ones.
inline LineAverageProfile line_average(const DampingRegion& region, int N) {
  if (region.period() != 1.0)
    throw config_error("line_average requires a region of period 1");
  if (N < 16) throw config_error("line_average requires N >= 16");
  LineAverageProfile p;
  p.n = N;
  p.values.resize(N);
  for (int i = 0; i < N; ++i) p.values[i] = region.line_integral(p.center(i), 0.0, 1.0);
  return p;
}

/// Piecewise-linear profile on [0,1]: breakpoints b0 < ... < bm and a linear
/// value on each piece.
struct PiecewiseLinearProfile {
  struct Piece {
    double lo, hi;
    double value_lo, slope;
    double at(double s) const { return value_lo + slope * (s - lo); }
  };
  std::vector<Piece> pieces;
  /// Set when this profile is a published closed form whose support is known
  /// to disagree with the quadrature oracle; downstream code must prefer the
  /// oracle.
  bool oracle_flagged = false;

  double eval(double s) const {
    for (const auto& p : pieces)
      if (s >= p.lo && s <= p.hi) return p.at(s);
    return 0.0;
  }
  double mass() const {
    double m = 0;
    for (const auto& p : pieces)
      m += (p.hi - p.lo) * (p.value_lo + 0.5 * p.slope * (p.hi - p.lo));
    return m;
  }
  /// Enumerates the linear segments covering cell i of an N-cell grid.
  template <class F>
  void for_cell(int i, int N, F&& f) const {
    double lo = (double)i / N, hi = (double)(i + 1) / N;
    for (const auto& p : pieces) {
      double a = std::max(lo, p.lo), b = std::min(hi, p.hi);
      if (b > a) f(a, b, p.at(a), p.slope);
    }
  }
};

/// Literature closed form of the accumulated damping for the two kinds that
/// have one. The diamond form is flagged: its quadrature oracle places the
/// mass at the interval ends instead (see diamond_profile_exact).
inline PiecewiseLinearProfile closed_form_a(RegionKind kind, double delta,
                                            double amplitude = 1.0) {
  PiecewiseLinearProfile p;
  auto piece = [&](double lo, double hi, double v_lo, double slope) {
    if (hi > lo) p.pieces.push_back({lo, hi, v_lo * amplitude, slope * amplitude});
  };
  if (kind == RegionKind::Diamond) {
    if (delta < 0 || delta > 0.5) throw config_error("diamond delta must lie in [0,1/2]");
    piece(0, 1 - 2 * delta, 0, 0);
    piece(1 - 2 * delta, 1, delta / 2, 0);
    p.oracle_flagged = true;
    return p;
  }
  if (kind == RegionKind::CornerSquare) {
    if (delta < 0 || delta > 1) throw config_error("corner square delta must lie in [0,1]");
    if (delta <= 0.5) {
      piece(0, delta, 0, 1);
      piece(delta, 2 * delta, delta, -1);
      piece(2 * delta, 1, 0, 0);
    } else {
      piece(0, 2 * delta - 1, 2 * delta - 1, 0);
      piece(2 * delta - 1, delta, 2 * delta - 1, 1);
      piece(delta, 1, delta, -1);
    }
    return p;
  }
  throw config_error("closed_form_a supports only the diamond and corner square kinds");
}

/// Accumulated damping of the diamond region computed from the geometry:
/// every characteristic through (0,delta) or (1-delta,1) crosses the diamond
/// for a time of exactly delta.
inline PiecewiseLinearProfile diamond_profile_exact(double delta, double amplitude = 1.0) {
  PiecewiseLinearProfile p;
  if (delta > 0) {
    p.pieces.push_back({0, delta, delta * amplitude, 0});
    p.pieces.push_back({delta, 1 - delta, 0, 0});
    p.pieces.push_back({1 - delta, 1, delta * amplitude, 0});
  } else {
    p.pieces.push_back({0, 1, 0, 0});
  }
  return p;
}

/// Exact piecewise-linear accumulated-damping profile when one is available.
inline std::optional<PiecewiseLinearProfile> exact_profile(const DampingRegion& region) {
  if (region.kind() == RegionKind::Diamond)
    return diamond_profile_exact(region.delta(), region.amplitude());
  if (region.kind() == RegionKind::CornerSquare)
    return closed_form_a(RegionKind::CornerSquare, region.delta(), region.amplitude());
  return std::nullopt;
}

}  // namespace pevol
