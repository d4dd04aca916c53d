#include "pevol/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"periodically damped transport and wave systems: simulation, "
               "monodromy spectra, observability and decay-rate measurement"};
  app.footer("environment: PEVOL_OUT sets the default output root "
             "(current directory when unset)\n"
             "exit codes: 0 success, 2 invalid configuration, 3 numerical failure");
  app.require_subcommand(1);

  std::string config_path, out_flag, id;
  double delta_flag = std::numeric_limits<double>::quiet_NaN();
  double horizon_flag = 0;
  int n_flag = 0, stride_flag = 0;
  std::uint64_t seed_flag = 0;

  CLI::App* run_cmd = app.add_subcommand("run", "execute the tasks of a config file");
  run_cmd->add_option("config", config_path, "key = value configuration file")
      ->required();
  run_cmd->add_option("--out", out_flag, "output directory (overrides the output key)");
  run_cmd->add_option("--n", n_flag, "grid size (overrides the N key)");
  run_cmd->add_option("--horizon", horizon_flag, "time span (overrides the horizon key)");
  run_cmd->add_option("--stride", stride_flag,
                      "samples per period (overrides the stride key)");
  run_cmd->add_option("--seed", seed_flag, "random seed (overrides the seed key)");

  CLI::App* rep_cmd = app.add_subcommand(
      "reproduce-example", "check the published claims of a canonical configuration");
  rep_cmd->add_option("id", id, "one of 4.1, 4.2, 5.1, 5.2")->required();
  rep_cmd->add_option("--delta", delta_flag, "damping parameter");
  rep_cmd->add_option("--n", n_flag, "grid size");
  rep_cmd->add_option("--out", out_flag, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run_cmd->parsed()) {
      pevol::RunConfig cfg = pevol::parse_config_file(config_path);
      if (!out_flag.empty()) cfg.output = out_flag;
      if (run_cmd->count("--n")) cfg.n = n_flag;
      if (run_cmd->count("--horizon")) cfg.horizon = horizon_flag;
      if (run_cmd->count("--stride")) cfg.stride = stride_flag;
      if (run_cmd->count("--seed")) cfg.seed = seed_flag;
      pevol::validate(cfg);
      pevol::RunResult res = pevol::run(cfg);
      std::cout << res.report;
      std::cout << "\nwrote " << res.dir.string() << ":";
      for (const auto& f : res.files) std::cout << " " << f;
      std::cout << "\n";
      return 0;
    }
    std::filesystem::path out =
        out_flag.empty() ? std::filesystem::path(pevol::default_output_root()) / "examples"
                         : std::filesystem::path(out_flag);
    pevol::ExampleReport er = pevol::reproduce_example(id, delta_flag, n_flag, out);
    std::cout << er.text;
    if (er.all_consistent) return 0;
    std::cerr << "numerical failure: a measured quantity disagrees with the published "
                 "claim (see the FAIL lines above)\n";
    return 3;
  } catch (const pevol::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const pevol::numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
