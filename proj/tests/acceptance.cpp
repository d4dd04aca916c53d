// Acceptance gate. Each criterion is one self-contained check with its
// tolerances pinned inline; run as `acceptance <1..10>`. Detail lines are
// indented, the verdict is the single [PASS]/[FAIL] line at the end.

#include "pevol/runner.hpp"

#include <cstdio>
#include <cstring>

using namespace pevol;

namespace {

bool g_ok = true;

void check(bool cond, const char* what) {
  std::printf("  %-58s %s\n", what, cond ? "ok" : "VIOLATED");
  if (!cond) g_ok = false;
}

void checkv(bool cond, const std::string& what) { check(cond, what.c_str()); }

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

struct Line {
  double slope = 0, intercept = 0;
};

Line fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  double n = (double)xs.size(), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  Line l;
  l.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  l.intercept = (sy - l.slope * sx) / n;
  return l;
}

WaveState random_wave(int N, unsigned seed) {
  Rng rng(seed);
  return WaveState::sample(
      N, [&](double) { return rng.normal(); }, [&](double) { return rng.normal(); });
}

// ---------------------------------------------------------------- 1
// Energy balance: transport exact path <= 1e-6 over 50 random (region, x);
// wave splitting vs the trapezoid damping integral <= 1e-3 at N = 1024,
// decreasing under N-doubling at observed order >= 1.5.
bool criterion1() {
  Rng rng(401);
  const int N = 512;
  double worst = 0;
  for (int k = 0; k < 50; ++k) {
    DampingRegion region =
        k % 2 == 0 ? DampingRegion::diamond(rng.uniform(0.05, 0.5), rng.uniform(0.5, 2.0))
                   : DampingRegion::corner_square(rng.uniform(0.05, 1.0),
                                                  rng.uniform(0.5, 2.0));
    auto x = TransportState::sample(N, [&](double) { return rng.normal(); });
    double e0 = x.norm() * x.norm();
    // three grid-aligned legs covering a few periods
    double t0 = 0;
    double dissipated = 0;
    TransportState cur = x;
    for (int leg = 0; leg < 3; ++leg) {
      double t1 = t0 + (double)rng.integer(1, 2 * N) / N;
      dissipated += 2.0 * damping_flux(region, cur, t0, t1);
      cur = solve(region, cur, t0, t1);
      t0 = t1;
    }
    double e1 = cur.norm() * cur.norm();
    worst = std::max(worst, std::abs(e1 + dissipated - e0) / e0);
  }
  std::printf("  transport worst residual %.3e\n", worst);
  check(worst <= 1e-6, "transport balance residual <= 1e-6");

  // wave: scheme energy drop vs trapezoid quadrature of b |v|^2
  Rng frng(10);
  std::vector<double> au(20), av(20);
  for (int m = 0; m < 20; ++m) {
    au[m] = frng.normal() / ((m + 1.0) * (m + 1.0));
    av[m] = frng.normal() / ((m + 1.0) * (m + 1.0));
  }
  auto series = [](const std::vector<double>& a, double s) {
    double r = 0;
    for (size_t m = 0; m < a.size(); ++m) r += a[m] * std::sin((m + 1) * pi * s);
    return r;
  };
  auto residual = [&](int n) {
    auto x = WaveState::sample(
        n, [&](double s) { return series(au, s); },
        [&](double s) { return 4 * series(av, s); });
    auto region = DampingRegion::switched(1.0);
    std::vector<std::vector<double>> vs;
    vs.reserve(2 * n + 1);
    {
      auto r0 = to_riemann(x);
      std::vector<double> v0(n);
      for (int i = 0; i < n; ++i) v0[i] = (r0.wp[i] + r0.wm[i]) / 2;
      vs.push_back(v0);
    }
    auto out = damped_solve_traced(region, x, 2.0,
                                   [&](long, const std::vector<double>& f, long o) {
                                     auto r = circle_to_riemann(f, o);
                                     std::vector<double> v(n);
                                     for (int i = 0; i < n; ++i)
                                       v[i] = (r.wp[i] + r.wm[i]) / 2;
                                     vs.push_back(v);
                                   });
    double trap = 0;
    for (long m = 0; m < 2 * n; ++m) {
      double t_mid = (m + 0.5) / n;
      double g = 0;
      for (int i = 0; i < n; ++i) {
        double b = region.eval((i + 0.5) / n, t_mid);
        if (b > 0) g += b * (vs[m][i] * vs[m][i] + vs[m + 1][i] * vs[m + 1][i]) / 2;
      }
      trap += g / (double)n / (double)n;
    }
    double drop = (x.norm_sq() - out.state.norm_sq()) / 2;
    return rel_err(trap, drop);
  };
  double e256 = residual(256), e512 = residual(512), e1024 = residual(1024);
  std::printf("  wave splitting residuals %.3e / %.3e / %.3e at N = 256/512/1024\n",
              e256, e512, e1024);
  check(e1024 <= 1e-3, "wave splitting residual at N=1024 <= 1e-3");
  check(e512 <= e256 / std::pow(2.0, 1.5) && e1024 <= e512 / std::pow(2.0, 1.5),
        "residual decreasing at observed order >= 1.5");
  return g_ok;
}

// ---------------------------------------------------------------- 2
// The undamped propagator at t = 2 is the identity to 1e-12 relative
// energy-norm error at every grid size.
bool criterion2() {
  for (int N : {64, 128, 256, 512, 1024, 2048}) {
    auto x = random_wave(N, 500 + (unsigned)N);
    auto y = dalembert(x, 2.0);
    double rel = (y - x).norm() / x.norm();
    checkv(rel <= 1e-12,
           "N = " + std::to_string(N) + ": |T0(2)x - x|/|x| = " +
               std::to_string(rel) + " <= 1e-12");
  }
  return g_ok;
}

// ---------------------------------------------------------------- 3
// Corner square at the critical delta = 1/2, x = 1: the squared power norms
// match (1 - e^{-n})/n to 2e-3 and the fitted polynomial exponent lies in
// [0.4, 0.6].
bool criterion3() {
  const int N = 2048;
  auto region = DampingRegion::corner_square(0.5);
  auto exact = exact_profile(region);
  if (!exact) {
    check(false, "corner square carries an exact damping profile");
    return g_ok;
  }
  auto x = TransportState::constant(N, 1.0);
  for (double n : {1.0, 10.0, 100.0, 1000.0}) {
    double got = std::exp(2.0 * log_power_norm_continuum(*exact, x, n));
    double want = -std::expm1(-n) / n;
    std::printf("  n = %6.0f: |T^n x|^2 = %.9e vs oracle %.9e (rel %.2e)\n", n, got,
                want, rel_err(got, want));
    checkv(rel_err(got, want) <= 2e-3,
           "n = " + std::to_string((long)n) + ": relative error <= 2e-3");
  }
  std::vector<double> ln, ld;
  for (int k = 0; k <= 24; ++k) {
    double n = 100.0 * std::pow(10.0, k / 24.0);
    ln.push_back(std::log(n));
    ld.push_back(log_power_norm_continuum(*exact, x, n));
  }
  double gamma = -fit_line(ln, ld).slope;
  std::printf("  fitted gamma = %.4f over n in [100, 1000]\n", gamma);
  check(gamma >= 0.4 && gamma <= 0.6, "fitted polynomial exponent in [0.4, 0.6]");
  return g_ok;
}

// ---------------------------------------------------------------- 4
// Ritt structure of the two canonical stable-but-not-exponential pairs: the
// spectrum touches the unit circle only at 1, the resolvent blows up at
// order about 1, the Ritt constant respects 1 + c_tau with 5% slack, and
// the diagonal Katznelson-Tzafriri profile stays under 1/e.
bool criterion4() {
  struct Pair {
    System system;
    DampingRegion region;
  };
  const Pair pairs[] = {{System::Transport, DampingRegion::corner_square(0.25)},
                        {System::Wave, DampingRegion::switched(0.5)}};
  for (const auto& pr : pairs) {
    for (int N : {256, 1024}) {
      auto op = pr.system == System::Transport
                    ? MonodromyOperator::transport(pr.region, N)
                    : MonodromyOperator::wave(pr.region, N);
      std::string tag = std::string(pr.system == System::Transport ? "transport" : "wave") +
                        " N=" + std::to_string(N);

      auto eig = op.is_diagonal() ? [&] {
        std::vector<Complex> e;
        for (double m : op.multipliers()) e.push_back(Complex(m, 0));
        return e;
      }() : dense_eigenvalues(op.matrix());
      int offenders = 0;
      for (auto l : eig)
        if (!(std::abs(l) < 1.0 || std::abs(l - 1.0) <= 1e-6)) ++offenders;
      checkv(offenders == 0, tag + ": eigenvalues inside the disk or at 1");

      auto profile = boundary_resolvent(op, boundary_theta_grid());
      auto af = fit_alpha(profile);
      double ritt = ritt_constant(profile);
      double c_tau = 1.0 + pr.region.sup_b_time_integral();
      std::printf("  %s: alpha = %.4f, ritt = %.4f, bound (1 + c_tau) * 1.05 = %.4f\n",
                  tag.c_str(), af.alpha, ritt, (1.0 + c_tau) * 1.05);
      checkv(af.blow_up && af.alpha >= 0.85 && af.alpha <= 1.15,
             tag + ": fitted alpha in [0.85, 1.15]");
      checkv(ritt <= (1.0 + c_tau) * 1.05, tag + ": ritt constant within the bound");

      if (op.is_diagonal()) {
        double worst = 0;
        for (auto [n, v] : kt_profile(op, 1024)) worst = std::max(worst, v);
        std::printf("  %s: sup_n n |T^n (I - T)| = %.9f\n", tag.c_str(), worst);
        checkv(worst <= 1.0 / std::exp(1.0) + 1e-9,
               tag + ": diagonal KT profile <= 1/e + 1e-9");
      }
    }
  }
  return g_ok;
}

// ---------------------------------------------------------------- 5
// The power-iterated ergodic projection agrees with the explicit formulas
// on the moving-band example, with the discrepancy halving under grid
// doubling; the explicit projection is idempotent and orthogonal.
bool criterion5() {
  for (double d : {0.1, 0.25, 0.4}) {
    double err[2] = {0, 0};
    int slot = 0;
    for (int N : {512, 1024}) {
      auto region = DampingRegion::ray_band(d);
      auto op = MonodromyOperator::wave(region, N);
      auto p = ergodic_projection(op);
      double worst = 0;
      for (unsigned s = 0; s < 20; ++s) {
        auto x = random_wave(N, 900 + s);
        auto px_pow = op.coords_to_wave(p.apply(op.wave_to_coords(x)));
        auto px_exp = example51_projection(d, x);
        worst = std::max(worst, (px_pow - px_exp).norm() / x.norm());
      }
      err[slot++] = worst;
    }
    std::printf("  delta = %.2f: discrepancy %.3e at N=512, %.3e at N=1024\n", d,
                err[0], err[1]);
    checkv(err[1] <= 1e-3, "delta = " + std::to_string(d) + ": discrepancy <= 1e-3");
    // below 1e-10 both grids sit at round-off (aligned band edges): the
    // halving law only binds once discretization error is visible
    checkv(err[0] <= 1e-10 || err[1] <= 0.6 * err[0],
           "delta = " + std::to_string(d) + ": discrepancy halves under N-doubling");
  }

  const int N = 1024;
  double worst_idem = 0, worst_orth = 0;
  for (double d : {0.1, 0.25, 0.4}) {
    for (unsigned s = 0; s < 20; ++s) {
      auto x = random_wave(N, 950 + s);
      auto px = example51_projection(d, x);
      auto ppx = example51_projection(d, px);
      worst_idem = std::max(worst_idem, (ppx - px).norm() / x.norm());
      worst_orth =
          std::max(worst_orth, std::abs(energy_inner(px, x - px)) / x.norm_sq());
    }
  }
  std::printf("  explicit formulas: idempotency %.3e, orthogonality %.3e\n", worst_idem,
              worst_orth);
  check(worst_idem <= 1e-8, "explicit projection idempotency <= 1e-8");
  check(worst_orth <= 1e-8, "explicit projection orthogonality <= 1e-8");
  return g_ok;
}

// ---------------------------------------------------------------- 6
// The two-sided damped/free observation sandwich with c_tau = 1 + int |B|^2
// holds on 20 random states for each canonical pair within the 5% slack;
// the transport Gramian diagonal reproduces the cell averages of the exact
// damping profile to 1e-6.
bool criterion6() {
  struct Pair {
    System system;
    DampingRegion region;
    int n;
    const char* name;
  };
  const Pair pairs[] = {
      {System::Transport, DampingRegion::diamond(0.25), 1024, "transport diamond(0.25)"},
      {System::Transport, DampingRegion::corner_square(0.5), 1024,
       "transport corner-square(0.5)"},
      {System::Wave, DampingRegion::ray_band(0.25), 512, "wave ray-band(0.25)"},
      {System::Wave, DampingRegion::switched(0.6), 512, "wave switched(0.6)"},
  };
  for (const auto& pr : pairs) {
    auto rep = sandwich_check(pr.system, pr.region, 20, pr.n);
    std::printf("  %s: c_tau = %.4f, worst upper %.6f, worst lower %.6f\n", pr.name,
                rep.c_tau, rep.worst_upper, rep.worst_lower);
    checkv(rel_err(rep.c_tau, 1.0 + pr.region.sup_b_time_integral()) <= 1e-12,
           std::string(pr.name) + ": c_tau = 1 + int |B(t)|^2 dt");
    checkv(rep.pass && rep.worst_upper <= 1.05 && rep.worst_lower <= 1.05,
           std::string(pr.name) + ": both inequalities within 5% slack");
  }

  // Gramian diagonal vs the exact profile averaged over each cell.
  for (const auto* pr : {&pairs[0], &pairs[1]}) {
    const int N = pr->n;
    auto g = gramian(System::Transport, pr->region, N);
    auto exact = exact_profile(pr->region);
    double worst = 0;
    for (int i = 0; i < N; ++i) {
      double avg = 0;
      exact->for_cell(i, N, [&](double a, double b, double v, double slope) {
        avg += (b - a) * (v + 0.5 * slope * (b - a));
      });
      avg *= N;
      worst = std::max(worst, std::abs(g.diag[i] - avg));
    }
    std::printf("  %s: max |gramian diag - cell average of a| = %.3e\n", pr->name, worst);
    checkv(worst <= 1e-6, std::string(pr->name) + ": Gramian equals diag(a) to 1e-6");
  }
  return g_ok;
}

// ---------------------------------------------------------------- 7
// Switched damping across the control threshold: delta = 0.6 satisfies the
// geometric control condition with a grid-stable observability constant and
// a clean exponential fit; delta = 0.4 fails it with a witness ray and
// admits data converging slower than 1/log.
bool criterion7() {
  {
    auto region = DampingRegion::switched(0.6);
    auto gcc = gcc_check(System::Wave, region, 2.0 * region.period(), 2048);
    std::printf("  delta = 0.6: gcc %s, min dwell %.6f\n", gcc.holds ? "holds" : "fails",
                gcc.min_dwell);
    check(gcc.holds, "delta = 0.6: geometric control holds");

    double kappa[3] = {0, 0, 0};
    int slot = 0;
    for (int N : {256, 512, 1024}) {
      auto g = gramian(System::Wave, region, N);
      auto op = MonodromyOperator::wave(region, N);
      auto p = ergodic_projection(op);
      kappa[slot++] = observability_constants(g, p).kappa_z_sq;
    }
    std::printf("  kappa_Z^2 = %.6f / %.6f / %.6f at N = 256/512/1024\n", kappa[0],
                kappa[1], kappa[2]);
    double lo = std::min({kappa[0], kappa[1], kappa[2]});
    double hi = std::max({kappa[0], kappa[1], kappa[2]});
    check(lo > 0 && hi / lo <= 1.10, "kappa_Z^2 stable across N (spread <= 10%)");

    auto fit = measure(region, random_wave(256, 3), 240.0);
    std::printf("  fitted beta = %.6f, residual %.6f\n", fit.exp_fit.beta,
                fit.exp_fit.residual);
    check(fit.verdict == RateVerdict::Exponential && fit.exp_fit.beta > 0,
          "delta = 0.6: exponential verdict with beta > 0");
    check(fit.exp_fit.residual < 0.01, "delta = 0.6: log-linear residual < 0.01");
  }
  {
    auto region = DampingRegion::switched(0.4);
    auto gcc = gcc_check(System::Wave, region, 2.0 * region.period(), 2048);
    std::printf("  delta = 0.4: gcc %s, witness s0 = %.6f, direction %+d\n",
                gcc.holds ? "holds" : "fails", gcc.witness_s0, gcc.witness_direction);
    check(!gcc.holds && gcc.has_witness, "delta = 0.4: gcc fails with a witness ray");

    // ray model of the uncontrolled family: transport on the folded
    // characteristics with the same vanishing edge profile
    auto slow = make_slow_data(DampingRegion::corner_square(0.4), 1024,
                               [](double n) { return 1.0 / std::log(n + 2.0); }, 20);
    bool all_met = !slow.certificate.empty();
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& cp : slow.certificate) {
      all_met &= cp.achieved >= cp.required;
      margin = std::min(margin, cp.achieved - cp.required);
    }
    std::printf("  slow-data certificate: %zu checkpoints, min margin %.3e\n",
                slow.certificate.size(), margin);
    check((int)slow.certificate.size() == 20, "certificate carries K = 20 checkpoints");
    check(all_met, "delta = 0.4: certificate passes for r(n) = 1/log(n+2)");
  }
  return g_ok;
}

// ---------------------------------------------------------------- 8
// Stability thresholds of the reproduced examples: the corner square is
// stable exactly from delta = 1/2 on, and the switched wave region keeps a
// trivial periodic fiber exactly from delta = 1/2 on.
bool criterion8() {
  auto observed = [](const ExampleReport& er, const char* claim_name) {
    for (const auto& c : er.claims)
      if (c.name == claim_name) return c.observed;
    throw numerical_error(std::string("claim not found: ") + claim_name);
  };
  for (double d : {0.1, 0.3, 0.5, 0.75, 1.0}) {
    auto er = reproduce_example("4.2", d);
    bool stable = observed(er, "stability: the undamped fiber is empty");
    std::printf("  4.2 delta = %.2f: %s\n", d, stable ? "stable" : "not stable");
    checkv(stable == (d >= 0.5),
           "4.2 delta = " + std::to_string(d) + ": stable iff delta >= 1/2");
    checkv(er.all_consistent,
           "4.2 delta = " + std::to_string(d) + ": all claims consistent");
  }
  for (double d : {0.1, 0.3, 0.5, 0.6, 1.0}) {
    auto er = reproduce_example("5.2", d, 128);
    bool stable = observed(er, "stability: the periodic fiber is trivial at tolerance");
    std::printf("  5.2 delta = %.2f: %s\n", d, stable ? "stable" : "not stable");
    checkv(stable == (d >= 0.5),
           "5.2 delta = " + std::to_string(d) + ": stable iff delta >= 1/2");
    checkv(er.all_consistent,
           "5.2 delta = " + std::to_string(d) + ": all claims consistent");
  }
  return g_ok;
}

// ---------------------------------------------------------------- 9
// Fractional powers and the rate criterion: the series for (I - T)^gamma
// reproduces the diagonal closed form entrywise, and data manufactured to
// lie in the gamma range class is recognized and decays at least that fast.
bool criterion9() {
  {
    const int N = 256;
    auto op = MonodromyOperator::transport(DampingRegion::corner_square(0.25), N);
    auto p = ergodic_projection(op);
    for (double gamma : {0.5, 1.0, 1.7}) {
      double worst = 0;
      for (unsigned s = 0; s < 5; ++s) {
        Rng rng(600 + s);
        VectorXd x(N);
        for (int i = 0; i < N; ++i) x[i] = rng.normal();
        VectorXd got = fractional_power_apply(op, gamma, x, p);
        for (int i = 0; i < N; ++i) {
          double want = std::pow(1.0 - op.multipliers()[i], gamma) * x[i];
          worst = std::max(worst, std::abs(got[i] - want));
        }
      }
      std::printf("  gamma = %.1f: worst entrywise deviation %.3e\n", gamma, worst);
      checkv(worst <= 1e-8,
             "gamma = " + std::to_string(gamma) + ": series matches (1-m)^gamma to 1e-8");
    }
  }
  {
    const int N = 1024;
    auto region = DampingRegion::corner_square(0.5);
    auto mono = monodromy(region, N);
    for (double gamma : {0.5, 1.0, 2.0}) {
      auto x = make_polynomial_data(region, N, gamma);
      auto cls = mono.rate_class(x, gamma);
      auto fit = measure(region, x, 2000.0);
      std::printf("  gamma = %.1f: member = %d, verdict = %s, fitted gamma = %.4f\n",
                  gamma, (int)cls.member, to_string(fit.verdict), fit.poly_fit.gamma);
      checkv(cls.member && !cls.inconclusive,
             "gamma = " + std::to_string(gamma) + ": data recognized in the range class");
      checkv(fit.verdict == RateVerdict::Polynomial,
             "gamma = " + std::to_string(gamma) + ": polynomial verdict");
      checkv(fit.poly_fit.gamma >= gamma - 0.05 && fit.poly_fit.gamma <= gamma + 1.0,
             "gamma = " + std::to_string(gamma) + ": fitted exponent sound (>= gamma)");
    }
  }
  return g_ok;
}

// ---------------------------------------------------------------- 10
// Diamond cross-validation: the quadrature profile conserves mass against
// the region area, and the reproduction report states explicitly whether
// the published closed form matches the oracle.
bool criterion10() {
  const double d = 0.25;
  auto region = DampingRegion::diamond(d);
  auto exact = exact_profile(region);
  if (!exact) {
    check(false, "diamond carries an exact damping profile");
    return g_ok;
  }
  double area = 2.0 * d * d;
  std::printf("  profile mass %.9f vs region area %.9f\n", exact->mass(), area);
  check(std::abs(exact->mass() - area) <= 1e-6, "mass conservation to 1e-6");

  auto er = reproduce_example("4.1", d, 1024);
  const ExampleClaim* mass = nullptr;
  const ExampleClaim* closed = nullptr;
  for (const auto& c : er.claims) {
    if (c.name == "accumulated damping mass equals the region area") mass = &c;
    if (c.name.rfind("closed form", 0) == 0) closed = &c;
  }
  check(mass != nullptr && mass->consistent(), "report checks mass conservation");
  check(closed != nullptr, "report states whether the closed form matches the oracle");
  if (closed != nullptr) {
    std::printf("  closed form matches the oracle: %s (authoritative: the oracle)\n",
                closed->observed ? "YES" : "NO");
    std::printf("  report detail: %s\n", closed->detail.c_str());
    check(closed->consistent(), "closed-form mismatch is the documented outcome");
  }
  check(er.all_consistent, "diamond reproduction is fully consistent");
  return g_ok;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: acceptance <criterion 1..10>\n");
    return 2;
  }
  int k = std::atoi(argv[1]);
  static const char* labels[] = {
      nullptr,
      "energy balance (exact transport path; wave splitting order)",
      "undamped resonance T0(2) = I",
      "critical corner-square power-norm oracle",
      "Ritt structure of the canonical pairs",
      "ergodic vs explicit projection on the moving band",
      "observability sandwich and transport Gramian",
      "geometric control threshold of the switched region",
      "stability thresholds of the reproduced examples",
      "fractional powers and rate-criterion soundness",
      "diamond mass conservation and closed-form audit",
  };
  bool ok = false;
  switch (k) {
    case 1: ok = criterion1(); break;
    case 2: ok = criterion2(); break;
    case 3: ok = criterion3(); break;
    case 4: ok = criterion4(); break;
    case 5: ok = criterion5(); break;
    case 6: ok = criterion6(); break;
    case 7: ok = criterion7(); break;
    case 8: ok = criterion8(); break;
    case 9: ok = criterion9(); break;
    case 10: ok = criterion10(); break;
    default:
      std::fprintf(stderr, "usage: acceptance <criterion 1..10>\n");
      return 2;
  }
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", k, labels[k]);
  return ok ? 0 : 1;
}
