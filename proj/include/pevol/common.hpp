#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace pevol {

inline constexpr double pi = 3.14159265358979323846;

/// Raised when user-supplied configuration is invalid (CLI exit code 2).
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when a numerical procedure fails to meet its contract (CLI exit code 3).
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// x reduced to [0, p).
inline double wrap(double x, double p) {
  double r = std::fmod(x, p);
  if (r < 0) r += p;
  return r;
}

/// Reflection of the line onto [0, 1]: tent map with period 2.
inline double fold(double x) {
  double r = wrap(x, 2.0);
  return r <= 1.0 ? r : 2.0 - r;
}

struct Interval {
  double lo = 0, hi = 0;
  bool empty() const { return hi <= lo; }
  double length() const { return empty() ? 0.0 : hi - lo; }
};

/// Sorts and merges overlapping intervals in place, dropping empty ones.
inline void merge_intervals(std::vector<Interval>& v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](const Interval& i) { return i.empty(); }),
          v.end());
  std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> out;
  for (const auto& i : v) {
    if (!out.empty() && i.lo <= out.back().hi)
      out.back().hi = std::max(out.back().hi, i.hi);
    else
      out.push_back(i);
  }
  v = std::move(out);
}

inline double total_length(const std::vector<Interval>& v) {
  double s = 0;
  for (const auto& i : v) s += i.length();
  return s;
}

struct Point {
  double x = 0, y = 0;
};

/// Closed half-plane a*x + b*y <= c.
struct HalfPlane {
  double a = 0, b = 0, c = 0;
  double eval(const Point& p) const { return a * p.x + b * p.y - c; }
};

/// Convex polygon as a counter-clockwise vertex loop.
using Polygon = std::vector<Point>;

inline double polygon_area(const Polygon& p) {
  double s = 0;
  for (size_t i = 0; i < p.size(); ++i) {
    const Point& u = p[i];
    const Point& v = p[(i + 1) % p.size()];
    s += u.x * v.y - v.x * u.y;
  }
  return 0.5 * std::abs(s);
}

/// Sutherland-Hodgman clip of a convex polygon against one half-plane.
inline Polygon clip_polygon(const Polygon& poly, const HalfPlane& h) {
  Polygon out;
  size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Point& cur = poly[i];
    const Point& nxt = poly[(i + 1) % n];
    double dc = h.eval(cur), dn = h.eval(nxt);
    if (dc <= 0) out.push_back(cur);
    if ((dc < 0 && dn > 0) || (dc > 0 && dn < 0)) {
      double t = dc / (dc - dn);
      out.push_back({cur.x + t * (nxt.x - cur.x), cur.y + t * (nxt.y - cur.y)});
    }
  }
  return out;
}

inline Polygon clip_polygon(Polygon poly, const std::vector<HalfPlane>& hs) {
  for (const auto& h : hs) {
    poly = clip_polygon(poly, h);
    if (poly.size() < 3) return {};
  }
  return poly;
}

inline Polygon rect_polygon(double x0, double x1, double y0, double y1) {
  return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

/// Parametric clip of the segment p(u) = p0 + u*(p1-p0), u in [u0,u1],
/// against half-planes; returns the surviving u-interval (possibly empty).
inline Interval clip_segment(const Point& p0, const Point& p1, double u0, double u1,
                             const std::vector<HalfPlane>& hs) {
  double lo = u0, hi = u1;
  for (const auto& h : hs) {
    double f0 = h.eval(p0);
    double df = h.a * (p1.x - p0.x) + h.b * (p1.y - p0.y);
    // need f0 + u*df <= 0
    if (std::abs(df) < 1e-300) {
      if (f0 > 0) return {0, 0};
    } else if (df > 0) {
      hi = std::min(hi, -f0 / df);
    } else {
      lo = std::max(lo, -f0 / df);
    }
    if (hi <= lo) return {0, 0};
  }
  return {lo, hi};
}

/// Accumulates log-space sums: returns log(sum of exp(terms)).
class LogSumExp {
  double max_ = -std::numeric_limits<double>::infinity();
  std::vector<double> terms_;

 public:
  void add(double log_term) {
    if (std::isfinite(log_term)) {
      terms_.push_back(log_term);
      max_ = std::max(max_, log_term);
    }
  }
  double value() const {
    if (terms_.empty()) return -std::numeric_limits<double>::infinity();
    double s = 0;
    for (double t : terms_) s += std::exp(t - max_);
    return max_ + std::log(s);
  }
};

/// Deterministic random source used everywhere randomness is required.
class Rng {
  std::mt19937_64 gen_;

 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(gen_);
  }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen_); }
  int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(gen_); }
  std::mt19937_64& engine() { return gen_; }
};

/// Scientific notation with 17 significant digits, locale independent.
inline std::string format_sci(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", x);
  return buf;
}

inline double sq(double x) { return x * x; }

/// Relative difference |a-b| / max(|a|, |b|, floor).
inline double rel_diff(double a, double b, double floor_val = 1e-300) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor_val});
}

}  // namespace pevol
