#pragma once

#include "config.hpp"

#include <iterator>

namespace pevol {

/// Artifacts of one run: the output directory, the file names written into
/// it (report.txt first), and the report text itself.
struct RunResult {
  std::filesystem::path dir;
  std::vector<std::string> files;
  std::string report;
};

namespace detail {

inline std::string format_g(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

/// CSV sink: mandatory header row, '.' decimal separator, every value in
/// scientific notation with 17 significant digits.
class Csv {
 public:
  Csv(const std::filesystem::path& path, const std::vector<std::string>& header)
      : out_(path) {
    if (!out_) throw config_error("cannot write " + path.string());
    for (size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << "\n";
  }
  void row(const std::vector<double>& vals) {
    for (size_t i = 0; i < vals.size(); ++i)
      out_ << (i ? "," : "") << format_sci(vals[i]);
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

inline std::vector<double> read_numbers(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open initial data file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  for (char& c : text)
    if (c == ',' || c == '\t' || c == '\r' || c == '\n') c = ' ';
  std::istringstream ss(text);
  std::vector<double> vals;
  std::string tok;
  while (ss >> tok) {
    size_t pos = 0;
    double v = 0;
    try {
      v = std::stod(tok, &pos);
    } catch (const std::exception&) {
      pos = std::string::npos;
    }
    if (pos != tok.size())
      throw config_error("initial data file " + path + ": not a number: '" + tok + "'");
    vals.push_back(v);
  }
  return vals;
}

inline WaveState random_wave_state(int N, std::uint64_t seed) {
  Rng rng(seed);
  return WaveState::sample(
      N, [&](double) { return rng.normal(); }, [&](double) { return rng.normal(); });
}

inline TransportState transport_initial(const RunConfig& cfg, const DampingRegion& region,
                                        std::optional<SlowData>& slow_out) {
  const int N = cfg.n;
  const InitialSpec& ini = cfg.initial;
  if (ini.kind == "constant") return TransportState::constant(N);
  if (ini.kind == "random") {
    Rng rng(cfg.seed);
    return TransportState::sample(N, [&](double) { return rng.normal(); });
  }
  if (ini.kind == "sine") {
    const int m = ini.mode;
    return TransportState::sample(N, [&](double s) { return std::sin(2 * pi * m * s); });
  }
  if (ini.kind == "polynomial")
    return make_polynomial_data(region, N, ini.gamma, ini.margin);
  if (ini.kind == "slow") {
    slow_out = make_slow_data(
        region, N, [](double n) { return 1.0 / std::log(n + 2.0); }, ini.levels);
    return slow_out->x;
  }
  if (ini.kind == "superpoly") {
    Rng rng(cfg.seed);
    auto seed_state = TransportState::sample(N, [&](double) { return rng.normal(); });
    return make_superpoly_data(region, seed_state);
  }
  auto vals = read_numbers(ini.path);
  if ((int)vals.size() != N)
    throw config_error("initial data file holds " + std::to_string(vals.size()) +
                       " values, expected N = " + std::to_string(N) + " cell values");
  TransportState x = TransportState::zero(N);
  x.values = vals;
  return x;
}

inline WaveState wave_initial(const RunConfig& cfg, const MonodromyOperator* op,
                              const Projection* proj) {
  const int N = cfg.n;
  const InitialSpec& ini = cfg.initial;
  if (ini.kind == "constant")
    return WaveState::sample(
        N, [](double) { return 0.0; }, [](double) { return 1.0; });
  if (ini.kind == "random") return random_wave_state(N, cfg.seed);
  if (ini.kind == "sine") {
    const int m = ini.mode;
    return WaveState::sample(
        N, [&](double s) { return std::sin(pi * m * s); }, [](double) { return 0.0; });
  }
  if (ini.kind == "superpoly")
    return make_superpoly_data(*op, *proj, random_wave_state(N, cfg.seed));
  auto vals = read_numbers(ini.path);
  if ((int)vals.size() != 2 * N + 1)
    throw config_error("initial data file holds " + std::to_string(vals.size()) +
                       " values, expected N+1 node positions followed by N cell "
                       "velocities (" +
                       std::to_string(2 * N + 1) + " values)");
  double scale = 0;
  for (double v : vals) scale = std::max(scale, std::abs(v));
  if (std::abs(vals[0]) > 1e-9 * scale || std::abs(vals[N]) > 1e-9 * scale)
    throw config_error("Dirichlet endpoints of the position data must vanish");
  WaveState x = WaveState::zero(N);
  for (int i = 1; i < N; ++i) x.u[i] = vals[i];
  for (int i = 0; i < N; ++i) x.v[i] = vals[N + 1 + i];
  return x;
}

}  // namespace detail

/// Executes the configured tasks in dependency order and writes report.txt
/// plus one CSV per task into the output directory. Deterministic: the same
/// config and seed produce byte-identical files.
inline RunResult run(const RunConfig& cfg) {
  validate(cfg);
  const DampingRegion region = cfg.make_region();
  const int N = cfg.n;
  const double tau = region.period();

  RunResult res;
  res.dir = cfg.output.empty()
                ? std::filesystem::path(default_output_root()) / "run"
                : std::filesystem::path(cfg.output);
  try {
    std::filesystem::create_directories(res.dir);
  } catch (const std::filesystem::filesystem_error& e) {
    throw config_error("cannot create output directory " + res.dir.string() + ": " +
                       e.what());
  }
  res.files.push_back("report.txt");

  std::ostringstream rep;
  rep << "pevol run\n";
  rep << "system = " << (cfg.system == System::Transport ? "transport" : "wave") << "\n";
  rep << "region = " << to_string(region.kind()) << ", delta = "
      << detail::format_g(cfg.delta) << ", amplitude = " << detail::format_g(cfg.amplitude)
      << ", period = " << detail::format_g(tau) << "\n";
  rep << "N = " << N << "\n";
  rep << "seed = " << cfg.seed << "\n";
  rep << "tasks =";
  for (Task t : cfg.tasks) rep << " " << to_string(t);
  rep << "\n";

  // shared stages, built once on first use
  std::optional<MonodromyOperator> op;
  std::optional<Projection> proj;
  std::optional<SpectralReport> spectral;
  auto ensure_op = [&]() -> const MonodromyOperator& {
    if (!op)
      op = cfg.system == System::Transport ? MonodromyOperator::transport(region, N)
                                           : MonodromyOperator::wave(region, N);
    return *op;
  };
  auto ensure_proj = [&]() -> const Projection& {
    if (!proj) proj = spectral ? spectral->projection : ergodic_projection(ensure_op());
    return *proj;
  };

  std::optional<TransportState> tx;
  std::optional<WaveState> wx;
  std::optional<SlowData> slow;
  if (cfg.has_task(Task::Simulate) || cfg.has_task(Task::Rates)) {
    if (cfg.system == System::Transport) {
      tx = detail::transport_initial(cfg, region, slow);
      rep << "initial = " << cfg.initial.kind << ", norm = " << format_sci(tx->norm())
          << "\n";
    } else {
      const MonodromyOperator* opp = nullptr;
      const Projection* pp = nullptr;
      if (cfg.initial.kind == "superpoly") {
        opp = &ensure_op();
        pp = &ensure_proj();
      }
      wx = detail::wave_initial(cfg, opp, pp);
      rep << "initial = " << cfg.initial.kind << ", norm = " << format_sci(wx->norm())
          << "\n";
    }
  }

  for (Task task : cfg.tasks) {
    switch (task) {
      case Task::Monodromy: {
        const MonodromyOperator& m = ensure_op();
        rep << "\n[monodromy]\n";
        rep << "dim = " << m.dim() << "\n";
        rep << "norm = " << format_sci(m.norm()) << "\n";
        rep << "contraction excess = " << format_sci(m.contraction_excess()) << "\n";
        if (m.is_diagonal()) {
          int fixed = 0;
          detail::Csv csv(res.dir / "multipliers.csv", {"s", "damping", "multiplier"});
          for (int i = 0; i < m.dim(); ++i) {
            csv.row({(i + 0.5) / m.dim(), m.exponents()[i], m.multipliers()[i]});
            if (m.exponents()[i] == 0.0) ++fixed;
          }
          res.files.push_back("multipliers.csv");
          rep << "undamped cells = " << fixed << " of " << m.dim() << "\n";
        } else {
          rep << "assembled from " << 2 * N << " splitting steps per period\n";
        }
        break;
      }

      case Task::Simulate: {
        const double horizon = cfg.effective_horizon(Task::Simulate);
        const int stride = cfg.effective_stride(Task::Simulate);
        const long steps_per_unit = N;  // dt = ds for both systems
        const long last = std::llround(horizon * steps_per_unit);
        if (last < 1) throw config_error("simulate horizon shorter than one time step");
        detail::Csv csv(res.dir / "trajectory.csv",
                        {"t", "energy", "dissipated", "balance"});
        res.files.push_back("trajectory.csv");
        // sample times snapped to whole grid steps; energy in the squared
        // energy norm, dissipated is the cumulative drop, balance the
        // conservation residual E(0) - E(t) - D(t)
        std::vector<long> samples = {0};
        for (long j = 1;; ++j) {
          long k = std::llround((double)j * tau * steps_per_unit / stride);
          if (k >= last) break;
          if (k > samples.back()) samples.push_back(k);
        }
        if (last > samples.back()) samples.push_back(last);
        double e0 = 0, dissipated = 0, worst = 0;
        if (cfg.system == System::Transport) {
          TransportState z = *tx;
          e0 = sq(z.norm());
          csv.row({0.0, e0, 0.0, 0.0});
          for (size_t j = 1; j < samples.size(); ++j) {
            double t0 = (double)samples[j - 1] / N, t1 = (double)samples[j] / N;
            dissipated += 2 * damping_flux(region, z, t0, t1);
            z = solve(region, z, t0, t1);
            double e = sq(z.norm());
            double bal = e0 - e - dissipated;
            worst = std::max(worst, std::abs(bal));
            csv.row({t1, e, dissipated, bal});
          }
        } else {
          auto f = wave_to_circle(*wx);
          long offset = 0, k = 0;
          e0 = circle_norm_sq(f);
          csv.row({0.0, e0, 0.0, 0.0});
          for (size_t j = 1; j < samples.size(); ++j) {
            for (; k < samples[j]; ++k) dissipated += damped_step(region, f, offset, k);
            double e = circle_norm_sq(f);
            double bal = e0 - e - dissipated;
            worst = std::max(worst, std::abs(bal));
            csv.row({(double)k / N, e, dissipated, bal});
          }
        }
        rep << "\n[simulate]\n";
        rep << "samples = " << samples.size() << "\n";
        rep << "initial energy = " << format_sci(e0) << "\n";
        rep << "dissipated = " << format_sci(dissipated) << "\n";
        rep << "worst balance residual = " << format_sci(worst / std::max(e0, 1e-300))
            << " (relative)\n";
        break;
      }

      case Task::Spectrum: {
        spectral = spectral_report(ensure_op(), cfg.spectral);
        if (!proj) proj = spectral->projection;
        const SpectralReport& sr = *spectral;
        {
          auto eigs = sr.eigenvalues;
          std::sort(eigs.begin(), eigs.end(), [](const Complex& a, const Complex& b) {
            double ma = std::abs(a), mb = std::abs(b);
            if (ma != mb) return ma > mb;
            if (a.real() != b.real()) return a.real() > b.real();
            return a.imag() > b.imag();
          });
          detail::Csv csv(res.dir / "eigenvalues.csv", {"re", "im", "modulus"});
          for (const Complex& l : eigs) csv.row({l.real(), l.imag(), std::abs(l)});
          res.files.push_back("eigenvalues.csv");
        }
        {
          detail::Csv csv(res.dir / "resolvent.csv", {"theta", "norm", "skipped"});
          for (const auto& s : sr.boundary_profile)
            csv.row({s.theta, s.norm, s.skipped ? 1.0 : 0.0});
          res.files.push_back("resolvent.csv");
        }
        {
          detail::Csv csv(res.dir / "kt.csv", {"n", "bound"});
          for (const auto& [n, v] : sr.kt) csv.row({(double)n, v});
          res.files.push_back("kt.csv");
        }
        double radius = 0;
        int near_one = 0;
        for (const Complex& l : sr.eigenvalues) {
          radius = std::max(radius, std::abs(l));
          if (std::abs(l - Complex(1, 0)) <= 1e-6) ++near_one;
        }
        rep << "\n[spectrum]\n";
        rep << "operator norm = " << format_sci(sr.norm) << "\n";
        rep << "contraction excess = " << format_sci(sr.contraction_excess)
            << " (grid units)\n";
        rep << "spectral radius = " << format_sci(radius) << "\n";
        rep << "eigenvalues within 1e-6 of 1 = " << near_one << "\n";
        rep << "fix dimension = " << sr.fix.cols() << "\n";
        rep << "resolvent growth alpha = " << format_sci(sr.alpha_fit.alpha)
            << ", residual = " << format_sci(sr.alpha_fit.residual) << ", window = ["
            << format_sci(sr.alpha_fit.theta_lo) << ", " << format_sci(sr.alpha_fit.theta_hi)
            << "]"
            << (sr.alpha_fit.blow_up ? "" : ", no growth region (bounded resolvent)")
            << "\n";
        rep << "ritt constant = " << format_sci(sr.ritt) << "\n";
        rep << "restricted radius = " << format_sci(sr.restricted.radius)
            << (sr.restricted.slow ? " (no resolvable gap)" : "") << "\n";
        rep << "projection: increment = " << format_sci(sr.projection.increment)
            << ", idempotency = " << format_sci(sr.projection.idempotency)
            << ", commutation = " << format_sci(sr.projection.commutation)
            << ", norm = " << format_sci(sr.projection.norm()) << "\n";
        if (!sr.kt.empty())
          rep << "kt bound at n = " << sr.kt.back().first << ": "
              << format_sci(sr.kt.back().second) << "\n";
        break;
      }

      case Task::Observability: {
        Gramian g = gramian(cfg.system, region, N);
        ObservabilityConstants oc = observability_constants(g, ensure_proj());
        SandwichReport sw = sandwich_check(cfg.system, region, 20, N);
        if (g.diagonal) {
          detail::Csv csv(res.dir / "gramian.csv", {"s", "weight"});
          for (int i = 0; i < g.dim(); ++i) csv.row({(i + 0.5) / g.dim(), g.diag[i]});
          res.files.push_back("gramian.csv");
        } else {
          detail::Csv csv(res.dir / "gramian.csv", {"index", "diagonal"});
          for (int i = 0; i < g.dim(); ++i) csv.row({(double)i, g.matrix(i, i)});
          res.files.push_back("gramian.csv");
        }
        {
          detail::Csv csv(res.dir / "sandwich.csv",
                          {"sample", "damped", "free", "upper", "lower"});
          for (size_t i = 0; i < sw.samples.size(); ++i) {
            const auto& s = sw.samples[i];
            csv.row({(double)i, s.damped, s.free, s.upper, s.lower});
          }
          res.files.push_back("sandwich.csv");
        }
        rep << "\n[observability]\n";
        rep << "kappa_full^2 = " << format_sci(oc.kappa_full_sq) << "\n";
        rep << "kappa_z^2 = " << format_sci(oc.kappa_z_sq) << "\n";
        rep << "c_tau = 1 + int ||B||^2 = " << format_sci(sw.c_tau) << "\n";
        rep << "sandwich worst upper = " << format_sci(sw.worst_upper)
            << ", worst lower = " << format_sci(sw.worst_lower) << ", pass = "
            << (sw.pass ? "yes" : "no") << "\n";
        break;
      }

      case Task::Gcc: {
        const double window = cfg.gcc_window > 0 ? cfg.gcc_window : 2 * tau;
        GCCVerdict v = gcc_check(cfg.system, region, window, cfg.gcc_rays);
        std::vector<int> directions = cfg.system == System::Wave
                                          ? std::vector<int>{1, -1}
                                          : std::vector<int>{-1};
        detail::Csv csv(res.dir / "rays.csv", {"s0", "direction", "dwell"});
        for (int dir : directions)
          for (int j = 0; j <= cfg.gcc_rays; ++j) {
            double s0 = (double)j / cfg.gcc_rays;
            csv.row({s0, (double)dir, detail::ray_dwell(cfg.system, region, s0, dir, window)});
          }
        res.files.push_back("rays.csv");
        rep << "\n[gcc]\n";
        rep << "window = " << detail::format_g(window) << "\n";
        rep << "holds = " << (v.holds ? "yes" : "no") << "\n";
        rep << "minimum dwell = " << format_sci(v.min_dwell) << "\n";
        if (v.has_witness)
          rep << "witness ray: s0 = " << format_sci(v.witness_s0) << ", direction = "
              << v.witness_direction << "\n";
        break;
      }

      case Task::Rates: {
        const double horizon = cfg.effective_horizon(Task::Rates);
        const int stride = cfg.effective_stride(Task::Rates);
        RateFit fit = cfg.system == System::Transport
                          ? measure(region, *tx, horizon, stride)
                          : measure(ensure_op(), ensure_proj(), region, *wx, horizon, stride);
        {
          detail::Csv csv(res.dir / "rates.csv", {"n", "t", "distance"});
          for (const auto& s : fit.series) csv.row({s.n, s.t, s.distance});
          res.files.push_back("rates.csv");
        }
        rep << "\n[rates]\n";
        rep << "samples = " << fit.series.size() << "\n";
        rep << "fit window = [" << format_sci(std::max(10 * fit.tau, 0.9 * fit.horizon))
            << ", " << format_sci(fit.horizon) << "]\n";
        rep << "exponential fit: beta = " << format_sci(fit.exp_fit.beta) << " +- "
            << format_sci(fit.exp_fit.beta_err) << ", residual = "
            << format_sci(fit.exp_fit.residual) << ", points = " << fit.exp_fit.count
            << "\n";
        rep << "polynomial fit: gamma = " << format_sci(fit.poly_fit.gamma)
            << ", residual = " << format_sci(fit.poly_fit.residual) << " (early-window gamma = "
            << format_sci(fit.poly_early.gamma) << ")\n";
        rep << "summary: system="
            << (cfg.system == System::Transport ? "transport" : "wave")
            << ", region=" << to_string(region.kind()) << ", N=" << N << ", verdict="
            << to_string(fit.verdict) << ", beta=" << format_sci(fit.exp_fit.beta)
            << ", gamma=" << format_sci(fit.poly_fit.gamma) << ", exp_residual="
            << format_sci(fit.exp_fit.residual) << ", poly_residual="
            << format_sci(fit.poly_fit.residual) << "\n";
        if (spectral)
          rep << "spectral gap rate = "
              << format_sci(-std::log(std::max(spectral->restricted.radius, 1e-300)) / tau)
              << " per unit time (restricted radius "
              << format_sci(spectral->restricted.radius) << ") vs fitted beta = "
              << format_sci(fit.exp_fit.beta) << "\n";
        if (slow) {
          detail::Csv csv(res.dir / "certificate.csv", {"n", "required", "achieved"});
          for (const auto& c : slow->certificate)
            csv.row({(double)c.n, c.required, c.achieved});
          res.files.push_back("certificate.csv");
          rep << "slow-data certificate: " << slow->certificate.size()
              << " checkpoints against r(n) = 1/log(n+2), all met\n";
        }
        break;
      }
    }
  }

  res.report = rep.str();
  std::ofstream out(res.dir / "report.txt");
  if (!out) throw config_error("cannot write " + (res.dir / "report.txt").string());
  out << res.report;
  return res;
}

/// One published claim checked against the pipeline: `expected` is the
/// published prediction at this delta, `observed` what the modules measured.
/// The reproduction passes when the two agree, so a claim predicted to fail
/// counts as consistent exactly when it does fail.
struct ExampleClaim {
  std::string name;
  std::string invariant;  // module: quantity the verdict is read from
  bool expected = false;
  bool observed = false;
  std::string detail;
  bool consistent() const { return expected == observed; }
};

struct ExampleReport {
  std::string id;
  double delta = 0;
  int n = 0;
  std::string verdict;
  std::vector<ExampleClaim> claims;
  bool all_consistent = true;
  std::string text;
};

namespace detail {

inline void render_claim(std::ostringstream& out, const ExampleClaim& c) {
  if (c.consistent())
    out << "[PASS] " << c.name << ": " << (c.observed ? "holds" : "fails")
        << " as predicted (" << c.invariant
        << (c.detail.empty() ? "" : "; " + c.detail) << ")\n";
  else
    out << "[FAIL] " << c.name << ": predicted to " << (c.expected ? "hold" : "fail")
        << ", observed to " << (c.observed ? "hold" : "fail") << " (" << c.invariant
        << (c.detail.empty() ? "" : "; " + c.detail) << ")\n";
}

inline int example_grid(int n, int n_max) {
  if (n == 0) return 0;
  if (n < 64 || n > n_max || (n & (n - 1)) != 0)
    throw config_error("N must be a power of two between 64 and " +
                       std::to_string(n_max) + ", got " + std::to_string(n));
  return n;
}

}  // namespace detail

/// Reruns one of the four canonical damping configurations through the
/// pipeline and checks every published claim against the measured quantity,
/// printing PASS when measurement and prediction agree. Writes
/// example-<id>-delta<d>.txt when out_dir is nonempty.
inline ExampleReport reproduce_example(
    const std::string& id, double delta = std::numeric_limits<double>::quiet_NaN(),
    int n = 0, const std::filesystem::path& out_dir = {}) {
  ExampleReport r;
  r.id = id;
  auto claim = [&](const std::string& name, const std::string& invariant, bool expected,
                   bool observed, const std::string& detail = "") {
    r.claims.push_back({name, invariant, expected, observed, detail});
  };

  if (id == "4.1") {
    const double d = std::isnan(delta) ? 0.25 : delta;
    if (!(d > 0 && d <= 0.5))
      throw config_error("example 4.1 needs delta in (0, 1/2], got " +
                         detail::format_g(delta));
    const int N = detail::example_grid(n, 16384) ? n : 1024;
    r.delta = d;
    r.n = N;
    auto region = DampingRegion::diamond(d);
    auto prof = line_average(region, N);
    auto exact = diamond_profile_exact(d);
    auto published = closed_form_a(RegionKind::Diamond, d);

    claim("accumulated damping mass equals the region area",
          "geometry: line-average quadrature vs polygon area",
          true, std::abs(prof.mass() - region.area()) <= 1e-6,
          "mass " + format_sci(prof.mass()) + ", area " + format_sci(region.area()));

    auto cell_avg = [&](const PiecewiseLinearProfile& p, int i) {
      double sum = 0;
      p.for_cell(i, N, [&](double a, double b, double v, double slope) {
        sum += (b - a) * (v + 0.5 * slope * (b - a));
      });
      return sum * N;
    };
    double worst_exact = 0, worst_published = 0;
    for (int i = 0; i < N; ++i) {
      worst_exact =
          std::max(worst_exact, std::abs(prof.values[i] - cell_avg(exact, i)));
      worst_published =
          std::max(worst_published, std::abs(prof.values[i] - cell_avg(published, i)));
    }
    claim("quadrature profile matches the ray-dwell oracle",
          "geometry: every characteristic through the support dwells exactly delta",
          true, worst_exact <= 1e-9,
          "largest cell deviation " + format_sci(worst_exact));
    claim("closed form (delta/2 on (1-2delta,1)) matches the oracle",
          "geometry: flagged closed form vs quadrature; the oracle is authoritative",
          false, worst_published <= 1e-9,
          "largest cell deviation " + format_sci(worst_published) +
              "; the oracle carries mass delta on (0,delta) and (1-delta,1), total " +
              format_sci(2 * d * d) + " vs " + format_sci(d * d));

    bool interval_ok = true;
    for (int i = 0; i < N; ++i) {
      double lo = (double)i / N, hi = (double)(i + 1) / N;
      if (lo >= d && hi <= 1 - d) interval_ok &= prof.values[i] <= prof.atol;
      if (hi <= d || lo >= 1 - d) interval_ok &= prof.values[i] > prof.atol;
    }
    claim("undamped interval is (delta, 1-delta)",
          "transport: the fixed fiber is carried by the zero set of the profile",
          true, interval_ok);

    const int cells = (int)std::floor(d * N);
    if (cells >= 1) {
      TransportState ind = TransportState::zero(N);
      for (int i = 0; i < cells; ++i) ind.values[i] = 1.0;
      double expect_log = std::log(ind.norm()) - 5.0 * d * region.amplitude();
      double got_log = log_power_norm_continuum(exact, ind, 5.0);
      claim("data on the damped rays decays at the uniform factor exp(-delta)",
            "transport: continuum power norms on the exact profile",
            true, std::abs(got_log - expect_log) <= 1e-9,
            "log |T^5 x| = " + format_sci(got_log) + ", uniform-rate value " +
                format_sci(expect_log));
    }
    r.verdict =
        "asymptotically periodic; uniform decay factor exp(-delta) on the damped rays; "
        "the published closed form for the accumulated damping does not match the "
        "ray-dwell oracle (documented mismatch, oracle authoritative)";
  } else if (id == "4.2") {
    const double d = std::isnan(delta) ? 0.5 : delta;
    if (!(d > 0 && d <= 1))
      throw config_error("example 4.2 needs delta in (0, 1], got " +
                         detail::format_g(delta));
    const int N = detail::example_grid(n, 16384) ? n : 1024;
    r.delta = d;
    r.n = N;
    auto region = DampingRegion::corner_square(d);
    auto prof = line_average(region, N);
    TransportMonodromy mono(region, N);

    const size_t undamped = prof.null_cells().size();
    claim("stability: the undamped fiber is empty",
          "transport: cells of the accumulated damping profile at zero",
          d >= 0.5, undamped == 0,
          std::to_string(undamped) + " undamped cells of " + std::to_string(N));

    auto x1 = TransportState::constant(N);
    auto px = mono.fixed_projection(x1);
    const double limit_mass = std::max(0.0, 1 - 2 * d);
    claim("periodic limit carries exactly the undamped mass",
          "transport: ergodic projection along characteristics",
          true, std::abs(sq(px.norm()) - limit_mass) <= 2.0 / N,
          "|Px|^2 = " + format_sci(sq(px.norm())) + ", undamped length " +
              format_sci(limit_mass));

    RateFit fit = measure(region, x1, 240.0, 1);
    claim("exponential decay of the distance to the periodic limit",
          "rates: trend classification over the final tenth of the series",
          d > 0.5, fit.verdict == RateVerdict::Exponential,
          std::string("verdict ") + to_string(fit.verdict) + ", beta = " +
              format_sci(fit.exp_fit.beta) + ", residual = " +
              format_sci(fit.exp_fit.residual));

    if (d <= 0.5) {
      auto w = make_polynomial_data(region, N, 1.0);
      auto cls = mono.rate_class(w, 1.0);
      RateFit fw = measure(region, w, 240.0, 1);
      claim("polynomial decay for weighted data",
            "transport: range-power class membership + rates: measured exponent",
            true,
            cls.member && fw.verdict == RateVerdict::Polynomial && fw.poly_fit.gamma > 0.5,
            std::string("class member = ") + (cls.member ? "yes" : "no") +
                ", verdict " + to_string(fw.verdict) + ", gamma = " +
                format_sci(fw.poly_fit.gamma));
    } else {
      double logr = mono.log_power_norm(x1, 201.0) - mono.log_power_norm(x1, 200.0);
      claim("per-period decay factor matches the damping floor exp(-(2delta-1))",
            "transport: log-space power norms",
            true, std::abs(logr + (2 * d - 1) * region.amplitude()) <= 1e-3,
            "log factor " + format_sci(logr) + ", floor " +
                format_sci(-(2 * d - 1) * region.amplitude()));
    }

    bool slow_ok = false;
    std::string slow_detail;
    try {
      SlowData s = make_slow_data(
          region, N, [](double m) { return 1.0 / std::log(m + 2.0); }, 8);
      slow_ok = true;
      slow_detail = "8 checkpoints met against r(n) = 1/log(n+2), last achieved " +
                    format_sci(s.certificate.back().achieved) + " >= required " +
                    format_sci(s.certificate.back().required);
    } catch (const config_error& e) {
      slow_detail = e.what();
    }
    claim("decay below any prescribed rate exists",
          "rates: layered sub-level certificate vs damping gap",
          d <= 0.5, slow_ok, slow_detail);

    if (d == 0.5)
      r.verdict = "stable, not exponential; polynomial for weighted data";
    else if (d > 0.5)
      r.verdict = "stable and exponential; per-period decay factor exp(-(2 delta - 1))";
    else
      r.verdict =
          "asymptotically periodic with a nonzero limit; decay below any prescribed "
          "rate on the damped component";
  } else if (id == "5.1") {
    const double d = std::isnan(delta) ? 0.25 : delta;
    if (!(d >= 0 && d < 0.5))
      throw config_error("example 5.1 needs delta in [0, 1/2), got " +
                         detail::format_g(delta));
    const int N = detail::example_grid(n, 1024) ? n : 256;
    r.delta = d;
    r.n = N;
    auto region = DampingRegion::ray_band(d);
    auto basis = example51_basis(d, N);

    auto yd = y_membership_defect(region, basis);
    claim("the explicit pair lies in the periodic fiber",
          "wave: damping defect quadrature along the free orbit",
          true,
          yd.full_period <= membership_tol(basis) &&
              yd.second_half <= membership_tol(basis),
          "defect " + format_sci(yd.full_period) + " vs tolerance " +
              format_sci(membership_tol(basis)));

    const double published_norm = (1 + 2 * d) / (1 - 2 * d);
    const bool aligned = std::abs(d * N - std::round(d * N)) < 1e-9;
    const double norm_tol = aligned ? 1e-12 : 20.0 / N;
    claim("squared norm of the pair equals (1+2delta)/(1-2delta)",
          "wave: energy norm of the sampled pair",
          true, std::abs(basis.norm_sq() - published_norm) <= norm_tol * published_norm,
          "norm^2 = " + format_sci(basis.norm_sq()) + ", published " +
              format_sci(published_norm) + (aligned ? "" : " (grid-misaligned delta)"));

    bool idem = true, orth = true, fixed_pt = true;
    double worst_idem = 0, worst_orth = 0, worst_fix = 0;
    for (unsigned s = 0; s < 5; ++s) {
      auto x = detail::random_wave_state(N, 700 + s);
      auto pxs = example51_projection(d, x);
      auto ppx = example51_projection(d, pxs);
      worst_idem = std::max(worst_idem, (ppx - pxs).norm() / x.norm());
      worst_orth =
          std::max(worst_orth, std::abs(energy_inner(pxs, x - pxs)) / x.norm_sq());
      auto evolved = damped_solve(region, pxs, 2.0);
      worst_fix = std::max(worst_fix, (evolved - pxs).norm() / x.norm());
    }
    idem = worst_idem <= 1e-10;
    orth = worst_orth <= 1e-8;
    fixed_pt = worst_fix <= 4.0 / N;
    claim("explicit projection is idempotent", "wave: explicit projection formulas",
          true, idem, "worst |P(Px)-Px|/|x| = " + format_sci(worst_idem));
    claim("explicit projection splits orthogonally", "wave: energy inner product",
          true, orth, "worst <Px, x-Px>/|x|^2 = " + format_sci(worst_orth));
    claim("projected states are fixed by the damped period map",
          "wave: splitting scheme over one period",
          true, fixed_pt, "worst |U(2,0)Px - Px|/|x| = " + format_sci(worst_fix));

    if (N <= 1024) {
      auto op = MonodromyOperator::wave(region, N);
      auto p = ergodic_projection(op);
      double worst = 0;
      for (unsigned s = 0; s < 5; ++s) {
        auto x = detail::random_wave_state(N, 800 + s);
        auto px_pow = op.coords_to_wave(p.apply(op.wave_to_coords(x)));
        auto px_exp = example51_projection(d, x);
        worst = std::max(worst, (px_pow - px_exp).norm() / x.norm());
      }
      claim("power-iteration projection agrees with the explicit formulas",
            "spectral: ergodic projection of the assembled monodromy",
            true, worst <= 4.0 / N,
            "worst deviation " + format_sci(worst) + " vs tolerance " +
                format_sci(4.0 / N));
    }
    r.verdict = d == 0
                    ? "periodic fiber reduces per the explicit formulas with the "
                      "degenerate band I0 = (0,1); projections agree"
                    : "periodic fiber is spanned by the explicit pair; explicit and "
                      "power-iteration projections agree";
  } else if (id == "5.2") {
    const double d = std::isnan(delta) ? 0.6 : delta;
    if (!(d > 0 && d <= 1))
      throw config_error("example 5.2 needs delta in (0, 1], got " +
                         detail::format_g(delta));
    const int N = detail::example_grid(n, 1024) ? n : 256;
    r.delta = d;
    r.n = N;
    auto region = DampingRegion::switched(d);
    auto op = MonodromyOperator::wave(region, N);
    auto p = ergodic_projection(op);

    auto fix = fix_basis(op);
    claim("stability: the periodic fiber is trivial at tolerance",
          "spectral: fix basis rank and ergodic projection norm",
          d >= 0.5, fix.cols() == 0 && p.norm() <= 1e-6,
          "fix dimension " + std::to_string(fix.cols()) + ", |P| = " +
              format_sci(p.norm()));

    GCCVerdict g = gcc_check(System::Wave, region, 2 * region.period(), 2048);
    std::string gdetail = "minimum dwell " + format_sci(g.min_dwell);
    if (g.has_witness)
      gdetail += ", witness ray s0 = " + format_sci(g.witness_s0) + ", direction " +
                 std::to_string(g.witness_direction);
    claim("geometric control by the switched windows",
          "observability: exact ray dwell over two periods",
          d > 0.5, g.holds, gdetail);

    auto x = detail::random_wave_state(N, 1);
    RateFit fit = measure(op, p, region, x, 240.0, 1);
    const int Nh = N / 2;
    auto oph = MonodromyOperator::wave(region, Nh);
    auto ph = ergodic_projection(oph);
    RateFit fith = measure(oph, ph, region, detail::random_wave_state(Nh, 1), 240.0, 1);
    bool both_exp = fit.verdict == RateVerdict::Exponential &&
                    fith.verdict == RateVerdict::Exponential;
    bool beta_stable = false;
    if (both_exp) {
      if (std::isinf(fit.exp_fit.beta) && std::isinf(fith.exp_fit.beta))
        beta_stable = true;
      else
        beta_stable = std::abs(fit.exp_fit.beta - fith.exp_fit.beta) <=
                      0.25 * std::max(fit.exp_fit.beta, fith.exp_fit.beta);
    }
    claim("exponential energy decay with a grid-stable rate",
          "rates: measured verdict at N and N/2",
          d > 0.5, both_exp && beta_stable,
          std::string("verdicts ") + to_string(fit.verdict) + " / " +
              to_string(fith.verdict) + ", beta = " + format_sci(fit.exp_fit.beta) +
              " / " + format_sci(fith.exp_fit.beta));

    bool slow_ok = false;
    std::string slow_detail;
    try {
      SlowData s = make_slow_data(
          DampingRegion::corner_square(d), N,
          [](double m) { return 1.0 / std::log(m + 2.0); }, 20);
      slow_ok = true;
      slow_detail =
          "transport model on the folded minus-family rays (corner square, same "
          "vanishing edge profile): 20 checkpoints met against r(n) = 1/log(n+2)";
    } catch (const config_error& e) {
      slow_detail = e.what();
    }
    claim("decay below any prescribed rate exists",
          "rates: layered sub-level certificate on the ray model",
          d <= 0.5, slow_ok, slow_detail);

    if (d > 0.5)
      r.verdict = "exponential";
    else if (d == 0.5)
      r.verdict = "stable; no uniform rate (control fails at the grazing ray)";
    else
      r.verdict =
          "not stable; decay below any prescribed rate on the folded ray model";
  } else {
    throw config_error("unknown example id: " + id + " (known: 4.1, 4.2, 5.1, 5.2)");
  }

  std::ostringstream out;
  out << "reproduce-example " << r.id << ", delta = " << detail::format_g(r.delta)
      << ", N = " << r.n << "\n";
  for (const auto& c : r.claims) {
    detail::render_claim(out, c);
    r.all_consistent &= c.consistent();
  }
  out << "verdict: " << r.verdict << "\n";
  out << (r.all_consistent ? "all claims consistent with the published behavior\n"
                           : "DISAGREEMENT with the published behavior\n");
  r.text = out.str();

  if (!out_dir.empty()) {
    try {
      std::filesystem::create_directories(out_dir);
    } catch (const std::filesystem::filesystem_error& e) {
      throw config_error("cannot create output directory " + out_dir.string() + ": " +
                         e.what());
    }
    std::string fname = "example-" + r.id + "-delta" + detail::format_g(r.delta) + ".txt";
    std::ofstream f(out_dir / fname);
    if (!f) throw config_error("cannot write " + (out_dir / fname).string());
    f << r.text;
  }
  return r;
}

}  // namespace pevol
