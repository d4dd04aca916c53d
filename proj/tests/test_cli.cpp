#include <catch2/catch_amalgamated.hpp>

#include "pevol/runner.hpp"

#include <fstream>
#include <regex>

using namespace pevol;
using Catch::Matchers::ContainsSubstring;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / "pevol-test-cli" / tag;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
  REQUIRE(out.good());
}

}  // namespace

TEST_CASE("config text parses into a validated run configuration") {
  std::string text =
      "# demo configuration\n"
      "system = transport\n"
      "region = corner-square\n"
      "delta  = 0.5\n"
      "amplitude = 2.0\n"
      "N = 256\n"
      "N_t = 256\n"
      "horizon = 100\n"
      "stride = 4\n"
      "tasks = rates, simulate, monodromy, spectrum, observability, gcc\n"
      "initial = sine\n"
      "mode = 3\n"
      "seed = 42\n"
      "\n"
      "[simulate]\n"
      "horizon = 7\n"
      "stride = 2\n"
      "\n"
      "[spectrum]\n"
      "theta_lo = 0.001\n"
      "theta_per_decade = 10\n"
      "kt_n_max = 500\n"
      "\n"
      "[gcc]\n"
      "window = 3.5\n"
      "rays = 128\n";
  RunConfig cfg = parse_config_string(text);

  CHECK(cfg.system == System::Transport);
  CHECK(cfg.region == RegionKind::CornerSquare);
  CHECK(cfg.delta == 0.5);
  CHECK(cfg.amplitude == 2.0);
  CHECK(cfg.n == 256);
  CHECK(cfg.seed == 42);
  CHECK(cfg.initial.kind == "sine");
  CHECK(cfg.initial.mode == 3);

  // Tasks are re-ordered so producers run before consumers.
  REQUIRE(cfg.tasks.size() == 6);
  CHECK(cfg.tasks.front() == Task::Monodromy);
  CHECK(std::is_sorted(cfg.tasks.begin(), cfg.tasks.end()));

  // Section overrides beat the top-level horizon/stride; rates falls back.
  CHECK(cfg.effective_horizon(Task::Simulate) == 7.0);
  CHECK(cfg.effective_stride(Task::Simulate) == 2);
  CHECK(cfg.effective_horizon(Task::Rates) == 100.0);
  CHECK(cfg.effective_stride(Task::Rates) == 4);

  CHECK(cfg.spectral.theta_lo == 0.001);
  CHECK(cfg.spectral.theta_per_decade == 10);
  CHECK(cfg.spectral.kt_n_max == 500);
  CHECK(cfg.gcc_window == 3.5);
  CHECK(cfg.gcc_rays == 128);
}

TEST_CASE("config defaults are filled in") {
  RunConfig cfg = parse_config_string(
      "system = wave\nregion = switched\ndelta = 0.6\nN = 128\ntasks = monodromy\n");
  CHECK(cfg.system == System::Wave);
  CHECK(cfg.amplitude == 1.0);
  CHECK(cfg.stride == 1);
  CHECK(cfg.seed == 0);
  CHECK(cfg.initial.kind == "constant");
  CHECK(cfg.make_region().period() == 2.0);
}

TEST_CASE("malformed config text is rejected with the offending line") {
  CHECK_THROWS_WITH(parse_config_string("system = transport\nnonsense\n"),
                    ContainsSubstring("line 2: expected key = value"));
  CHECK_THROWS_WITH(parse_config_string("N = 64\nN = 128\n"),
                    ContainsSubstring("duplicate key N"));
  CHECK_THROWS_WITH(parse_config_string("[simulate\nhorizon = 1\n"),
                    ContainsSubstring("unterminated section header"));
  CHECK_THROWS_WITH(parse_config_string("[]\n"), ContainsSubstring("empty section name"));
  CHECK_THROWS_WITH(parse_config_string("= 3\n"), ContainsSubstring("empty key"));
  CHECK_THROWS_WITH(parse_config_string("system = transport\nregion = diamond\n"
                                        "delta = not-a-number\nN = 64\ntasks = gcc\n"),
                    ContainsSubstring("delta: not a number"));
}

TEST_CASE("config validation rejects inconsistent requests") {
  auto base = [](const std::string& extra) {
    return "system = transport\nregion = corner-square\ndelta = 0.5\nN = 64\n" + extra;
  };

  CHECK_THROWS_WITH(parse_config_string(base("tasks =\n")),
                    ContainsSubstring("task list is empty"));
  CHECK_THROWS_WITH(parse_config_string(base("tasks = walk\n")),
                    ContainsSubstring("unknown task: walk"));
  CHECK_THROWS_WITH(parse_config_string(
                        "system = transport\nregion = corner-square\ndelta = 0.5\n"
                        "N = 100\ntasks = monodromy\n"),
                    ContainsSubstring("power of two"));
  CHECK_THROWS_WITH(parse_config_string(base("tasks = monodromy\nN_t = 128\n")),
                    ContainsSubstring("unit-ratio grid"));
  CHECK_THROWS_WITH(parse_config_string(base("tasks = simulate\nhorizon = 10\nstride = 0\n")),
                    ContainsSubstring("stride"));
  CHECK_THROWS_WITH(parse_config_string(base("tasks = simulate\n")),
                    ContainsSubstring("positive horizon"));
  CHECK_THROWS_WITH(parse_config_string(base("tasks = rates\n")),
                    ContainsSubstring("positive horizon"));
  CHECK_THROWS_WITH(parse_config_string(base("tasks = monodromy\nbogus = 1\n")),
                    ContainsSubstring("unknown key: bogus"));
  CHECK_THROWS_WITH(parse_config_string(base("tasks = monodromy\n[gcc]\nrays = 64\n")),
                    ContainsSubstring("section [gcc] without the matching task"));
  CHECK_THROWS_WITH(parse_config_string(base("tasks = gcc\n[gcc]\nbogus = 1\n")),
                    ContainsSubstring("unknown key: [gcc] bogus"));
  CHECK_THROWS_WITH(parse_config_string(base("tasks = gcc\n[gcc]\nrays = 4\n")),
                    ContainsSubstring("at least 16 rays"));
  CHECK_THROWS_WITH(parse_config_string(base("tasks = spectrum\n[spectrum]\ntheta_lo = 2\n")),
                    ContainsSubstring("theta_lo"));

  // Required keys.
  CHECK_THROWS_WITH(parse_config_string("region = diamond\ndelta = 0.2\nN = 64\ntasks = gcc\n"),
                    ContainsSubstring("missing key: system"));
  CHECK_THROWS_WITH(parse_config_string("system = transport\nregion = diamond\nN = 64\ntasks = gcc\n"),
                    ContainsSubstring("missing key: delta"));

  // The damping period must match the system.
  CHECK_THROWS_AS(parse_config_string("system = wave\nregion = diamond\ndelta = 0.2\n"
                                      "N = 64\ntasks = gcc\n"),
                  config_error);
  CHECK_THROWS_AS(parse_config_string("system = transport\nregion = switched\ndelta = 0.6\n"
                                      "N = 64\ntasks = gcc\n"),
                  config_error);

  // Region parameter ranges are enforced by the factories.
  CHECK_THROWS_AS(parse_config_string("system = transport\nregion = diamond\ndelta = 0.7\n"
                                      "N = 64\ntasks = gcc\n"),
                  config_error);

  // Dense wave assembly is capped.
  CHECK_THROWS_WITH(parse_config_string("system = wave\nregion = switched\ndelta = 0.6\n"
                                        "N = 2048\ntasks = spectrum\n"),
                    ContainsSubstring("dense"));

  // Initial data constraints.
  CHECK_THROWS_WITH(parse_config_string(base("tasks = simulate\nhorizon = 1\ninitial = blob\n")),
                    ContainsSubstring("unknown initial data kind"));
  CHECK_THROWS_WITH(parse_config_string("system = wave\nregion = switched\ndelta = 0.6\nN = 64\n"
                                        "tasks = simulate\nhorizon = 1\ninitial = polynomial\n"),
                    ContainsSubstring("transport system only"));
  CHECK_THROWS_WITH(parse_config_string(base("tasks = simulate\nhorizon = 1\n"
                                             "initial = polynomial\ngamma = 0\n")),
                    ContainsSubstring("gamma > 0"));
  CHECK_THROWS_WITH(parse_config_string(base("tasks = simulate\nhorizon = 1\n"
                                             "initial = file\n")),
                    ContainsSubstring("requires initial_file"));
  CHECK_THROWS_WITH(parse_config_string(base("tasks = simulate\nhorizon = 1\ninitial = file\n"
                                             "initial_file = no-such-file.txt\n")),
                    ContainsSubstring("initial data file not found"));
}

TEST_CASE("a full transport run writes every artifact deterministically") {
  fs::path out_a = fresh_dir("run-a");
  fs::path out_b = fresh_dir("run-b");
  auto cfg_text = [](const fs::path& out) {
    return "system = transport\nregion = corner-square\ndelta = 0.5\nN = 64\n"
           "tasks = monodromy, simulate, spectrum, observability, gcc, rates\n"
           "initial = random\nseed = 7\n"
           "output = " + out.string() + "\n"
           "[simulate]\nhorizon = 10\nstride = 2\n"
           "[rates]\nhorizon = 60\n";
  };

  RunResult res = run(parse_config_string(cfg_text(out_a)));
  CHECK(res.dir == out_a);
  REQUIRE(!res.files.empty());
  CHECK(res.files.front() == "report.txt");
  std::vector<std::string> expected = {"report.txt",    "multipliers.csv", "trajectory.csv",
                                       "eigenvalues.csv", "resolvent.csv", "kt.csv",
                                       "gramian.csv",   "sandwich.csv",    "rays.csv",
                                       "rates.csv"};
  for (const auto& name : expected) {
    INFO(name);
    CHECK(std::find(res.files.begin(), res.files.end(), name) != res.files.end());
    CHECK(fs::exists(out_a / name));
  }
  CHECK(slurp(out_a / "report.txt") == res.report);

  // Identical configuration and seed must reproduce every byte.
  run(parse_config_string(cfg_text(out_b)));
  for (const auto& name : res.files) {
    INFO(name);
    CHECK(slurp(out_a / name) == slurp(out_b / name));
  }
}

TEST_CASE("csv output uses comma-separated scientific notation with a header") {
  fs::path out = fresh_dir("csv-format");
  run(parse_config_string("system = transport\nregion = diamond\ndelta = 0.25\nN = 64\n"
                          "tasks = simulate\nhorizon = 5\noutput = " + out.string() + "\n"));
  std::string csv = slurp(out / "trajectory.csv");
  std::istringstream in(csv);
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  CHECK(header == "t,energy,dissipated,balance");

  // 17 significant digits, '.' decimal separator, two-digit exponent.
  std::regex field("-?\\d\\.\\d{16}e[+-]\\d{2}");
  std::sregex_iterator it(first.begin(), first.end(), field), end;
  CHECK(std::distance(it, end) == 4);

  // Sample times: t = 0 first, the horizon last, strictly increasing.
  std::vector<double> times;
  std::string line;
  std::istringstream body(csv);
  std::getline(body, line);
  while (std::getline(body, line))
    times.push_back(std::stod(line.substr(0, line.find(','))));
  REQUIRE(times.size() >= 2);
  CHECK(times.front() == 0.0);
  CHECK(times.back() == 5.0);
  CHECK(std::is_sorted(times.begin(), times.end()));
}

TEST_CASE("simulated energy balance closes for both systems") {
  for (std::string sys : {"transport", "wave"}) {
    fs::path out = fresh_dir("balance-" + sys);
    std::string region = sys == "transport" ? "corner-square" : "switched";
    run(parse_config_string("system = " + sys + "\nregion = " + region +
                            "\ndelta = 0.5\nN = 64\ntasks = simulate\nhorizon = 8\n"
                            "initial = random\nseed = 11\noutput = " + out.string() + "\n"));
    std::istringstream in(slurp(out / "trajectory.csv"));
    std::string line;
    std::getline(in, line);
    double e0 = -1;
    while (std::getline(in, line)) {
      double t, e, d, bal;
      REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &t, &e, &d, &bal) == 4);
      if (e0 < 0) e0 = e;
      INFO(sys << " t=" << t);
      CHECK(std::abs(bal) <= 1e-10);
      CHECK(std::abs(e + d - e0) <= 1e-10 * e0);
      CHECK(e <= e0 * (1 + 1e-12));
    }
  }
}

TEST_CASE("initial data can be loaded from a file") {
  fs::path dir = fresh_dir("initial-file");

  SECTION("transport values, one per cell") {
    std::ostringstream data;
    for (int i = 0; i < 64; ++i) data << 2.0 << "\n";
    spit(dir / "x.txt", data.str());
    fs::path out = dir / "out";
    RunResult res =
        run(parse_config_string("system = transport\nregion = diamond\ndelta = 0.25\nN = 64\n"
                                "tasks = simulate\nhorizon = 3\ninitial = file\n"
                                "initial_file = x.txt\noutput = " + out.string() + "\n",
                                dir));
    // x = 2 on the circle carries squared norm 4.
    std::istringstream in(slurp(out / "trajectory.csv"));
    std::string header, first;
    std::getline(in, header);
    std::getline(in, first);
    double t, e;
    REQUIRE(std::sscanf(first.c_str(), "%lf,%lf", &t, &e) == 2);
    CHECK(std::abs(e - 4.0) <= 1e-12);
  }

  SECTION("wave states carry node positions then cell velocities") {
    const int N = 64;
    std::ostringstream data;
    for (int i = 0; i <= N; ++i) data << std::sin(M_PI * i / N) << "\n";
    for (int i = 0; i < N; ++i) data << 0.0 << "\n";
    spit(dir / "w.txt", data.str());
    fs::path out = dir / "outw";
    CHECK_NOTHROW(
        run(parse_config_string("system = wave\nregion = switched\ndelta = 0.6\nN = 64\n"
                                "tasks = simulate\nhorizon = 4\ninitial = file\n"
                                "initial_file = w.txt\noutput = " + out.string() + "\n",
                                dir)));
  }

  SECTION("wrong value count is rejected") {
    spit(dir / "short.txt", "1.0 2.0 3.0\n");
    CHECK_THROWS_WITH(
        run(parse_config_string("system = transport\nregion = diamond\ndelta = 0.25\nN = 64\n"
                                "tasks = simulate\nhorizon = 1\ninitial = file\n"
                                "initial_file = short.txt\noutput = " +
                                    (dir / "o1").string() + "\n",
                                dir)),
        ContainsSubstring("holds 3 values"));
  }

  SECTION("wave position data must vanish at the boundary") {
    const int N = 64;
    std::ostringstream data;
    for (int i = 0; i <= N; ++i) data << 1.0 << "\n";
    for (int i = 0; i < N; ++i) data << 0.0 << "\n";
    spit(dir / "bad.txt", data.str());
    CHECK_THROWS_WITH(
        run(parse_config_string("system = wave\nregion = switched\ndelta = 0.6\nN = 64\n"
                                "tasks = simulate\nhorizon = 1\ninitial = file\n"
                                "initial_file = bad.txt\noutput = " +
                                    (dir / "o2").string() + "\n",
                                dir)),
        ContainsSubstring("Dirichlet endpoints"));
  }
}

TEST_CASE("weighted and slow transport initial data drive the rates task") {
  fs::path out = fresh_dir("rates-initial");
  RunResult res =
      run(parse_config_string("system = transport\nregion = corner-square\ndelta = 0.5\nN = 64\n"
                              "tasks = rates\ninitial = polynomial\ngamma = 1.0\n"
                              "output = " + out.string() + "\n"
                              "[rates]\nhorizon = 200\n"));
  CHECK_THAT(res.report, ContainsSubstring("verdict=polynomial"));

  fs::path out2 = fresh_dir("rates-slow");
  RunResult res2 =
      run(parse_config_string("system = transport\nregion = corner-square\ndelta = 0.5\nN = 64\n"
                              "tasks = rates\ninitial = slow\nlevels = 6\n"
                              "output = " + out2.string() + "\n"
                              "[rates]\nhorizon = 300\n"));
  CHECK(fs::exists(out2 / "certificate.csv"));
  CHECK_THAT(res2.report, ContainsSubstring("slow-data certificate"));
  CHECK_THAT(res2.report, ContainsSubstring("all met"));
}

TEST_CASE("unknown output key placement is caught") {
  // "output" belongs at the top level, not in a section.
  CHECK_THROWS_WITH(
      parse_config_string("system = transport\nregion = diamond\ndelta = 0.25\nN = 64\n"
                          "tasks = rates\n[rates]\nhorizon = 10\noutput = x\n"),
      ContainsSubstring("unknown key: [rates] output"));
}

TEST_CASE("example reproduction validates its arguments") {
  CHECK_THROWS_WITH(reproduce_example("3.7"), ContainsSubstring("unknown example id"));
  CHECK_THROWS_WITH(reproduce_example("4.1", 0.7), ContainsSubstring("delta in (0, 1/2]"));
  CHECK_THROWS_WITH(reproduce_example("4.2", 0.0), ContainsSubstring("delta in (0, 1]"));
  CHECK_THROWS_WITH(reproduce_example("5.1", 0.5), ContainsSubstring("delta in [0, 1/2)"));
  CHECK_THROWS_WITH(reproduce_example("5.2", 1.5), ContainsSubstring("delta in (0, 1]"));
  CHECK_THROWS_AS(reproduce_example("4.1", 0.25, 100), config_error);
}

TEST_CASE("the flagged accumulated-damping closed form disagrees on the diamond") {
  ExampleReport er = reproduce_example("4.1", 0.25, 256);
  CHECK(er.all_consistent);
  REQUIRE(er.claims.size() >= 4);
  bool saw_flagged = false;
  for (const auto& c : er.claims) {
    CHECK(c.consistent());
    if (c.invariant.find("oracle is authoritative") != std::string::npos) {
      saw_flagged = true;
      CHECK(c.expected == false);
      CHECK(c.observed == false);
    }
  }
  CHECK(saw_flagged);
  CHECK_THAT(er.text, ContainsSubstring("all claims consistent with the published behavior"));
  CHECK_THAT(er.text, ContainsSubstring("[PASS]"));
  CHECK_THAT(er.text, !ContainsSubstring("[FAIL]"));
}

TEST_CASE("corner-square reproduction matches the stability threshold") {
  ExampleReport stable = reproduce_example("4.2", 0.75, 256);
  CHECK(stable.all_consistent);
  CHECK(stable.verdict ==
        "stable and exponential; per-period decay factor exp(-(2 delta - 1))");

  ExampleReport critical = reproduce_example("4.2", 0.5, 256);
  CHECK(critical.all_consistent);
  CHECK(critical.verdict == "stable, not exponential; polynomial for weighted data");

  ExampleReport unstable = reproduce_example("4.2", 0.25, 256);
  CHECK(unstable.all_consistent);
  CHECK_THAT(unstable.verdict, ContainsSubstring("asymptotically periodic"));
}

TEST_CASE("ray-band reproduction agrees with the explicit projections") {
  ExampleReport er = reproduce_example("5.1", 0.25, 128);
  CHECK(er.all_consistent);
  CHECK_THAT(er.verdict, ContainsSubstring("explicit"));

  ExampleReport degenerate = reproduce_example("5.1", 0.0, 128);
  CHECK(degenerate.all_consistent);
}

TEST_CASE("switched-damping reproduction matches the published trichotomy") {
  ExampleReport exp = reproduce_example("5.2", 0.6, 128);
  CHECK(exp.all_consistent);
  CHECK(exp.verdict == "exponential");

  ExampleReport crit = reproduce_example("5.2", 0.5, 128);
  CHECK(crit.all_consistent);
  CHECK_THAT(crit.verdict, ContainsSubstring("no uniform rate"));
}

TEST_CASE("example reports can be written to a directory") {
  fs::path out = fresh_dir("example-out");
  ExampleReport er = reproduce_example("4.1", 0.5, 128, out);
  fs::path expect = out / "example-4.1-delta0.5.txt";
  REQUIRE(fs::exists(expect));
  CHECK(slurp(expect) == er.text);
}
