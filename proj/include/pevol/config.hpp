#pragma once

#include "rates.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace pevol {

/// Pipeline stages selectable in a run configuration. The enumeration order
/// is the execution order: the monodromy operator is assembled before any
/// stage that consumes it.
enum class Task { Monodromy, Simulate, Spectrum, Observability, Gcc, Rates };

inline const char* to_string(Task t) {
  switch (t) {
    case Task::Monodromy: return "monodromy";
    case Task::Simulate: return "simulate";
    case Task::Spectrum: return "spectrum";
    case Task::Observability: return "observability";
    case Task::Gcc: return "gcc";
    case Task::Rates: return "rates";
  }
  return "?";
}

inline Task task_from_string(const std::string& s) {
  for (Task t : {Task::Monodromy, Task::Simulate, Task::Spectrum, Task::Observability,
                 Task::Gcc, Task::Rates})
    if (s == to_string(t)) return t;
  throw config_error("unknown task: " + s);
}

/// Initial data for the simulate and rates stages. Builtins are evaluated on
/// the grid of the run; `file` loads raw values (transport: N cell values;
/// wave: N+1 node positions followed by N cell velocities).
struct InitialSpec {
  std::string kind = "constant";  // constant | random | sine | polynomial |
                                  // slow | superpoly | file
  std::string path;               // file kind, resolved against the config dir
  double gamma = 1.0;             // polynomial kind
  double margin = 0.1;            // polynomial kind
  int mode = 1;                   // sine kind
  int levels = 20;                // slow kind: number of certificate checkpoints
};

struct RunConfig {
  System system = System::Transport;
  RegionKind region = RegionKind::CornerSquare;
  double delta = 0.5;
  double amplitude = 1.0;
  int n = 256;
  int n_t = 0;         // 0 = derived; the scheme fixes dt = ds
  double horizon = 0;  // default time span for simulate and rates
  int stride = 1;      // samples per period
  std::vector<Task> tasks;
  InitialSpec initial;
  std::string output;  // empty = <output root>/run
  std::uint64_t seed = 0;

  // per-task overrides, 0 = inherit the top-level value
  double sim_horizon = 0;
  int sim_stride = 0;
  double rates_horizon = 0;
  int rates_stride = 0;
  SpectralOptions spectral;
  double gcc_window = 0;  // 0 = two periods
  int gcc_rays = 1024;

  DampingRegion make_region() const {
    switch (region) {
      case RegionKind::Diamond: return DampingRegion::diamond(delta, amplitude);
      case RegionKind::CornerSquare:
        return DampingRegion::corner_square(delta, amplitude);
      case RegionKind::RayBand: return DampingRegion::ray_band(delta, amplitude);
      case RegionKind::Switched: return DampingRegion::switched(delta, amplitude);
      default:
        throw config_error("region kind not constructible from a configuration");
    }
  }

  bool has_task(Task t) const {
    return std::find(tasks.begin(), tasks.end(), t) != tasks.end();
  }

  double effective_horizon(Task t) const {
    if (t == Task::Simulate && sim_horizon > 0) return sim_horizon;
    if (t == Task::Rates && rates_horizon > 0) return rates_horizon;
    return horizon;
  }
  int effective_stride(Task t) const {
    if (t == Task::Simulate && sim_stride > 0) return sim_stride;
    if (t == Task::Rates && rates_stride > 0) return rates_stride;
    return stride;
  }
};

/// Root directory for runs that do not name an output location:
/// $PEVOL_OUT when set, the working directory otherwise.
inline std::string default_output_root() {
  const char* env = std::getenv("PEVOL_OUT");
  return env && *env ? env : ".";
}

namespace detail {

inline std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw config_error(key + ": not a number: '" + v + "'");
  }
}

inline long parse_long(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw config_error(key + ": not an integer: '" + v + "'");
  }
}

inline std::uint64_t parse_seed(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw config_error(key + ": not a seed value: '" + v + "'");
  }
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(v);
  while (std::getline(ss, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

}  // namespace detail

/// Key = value text grouped into an unnamed top-level section plus one
/// optional [section] per task.
struct RawConfig {
  std::map<std::string, std::string> top;
  std::map<std::string, std::map<std::string, std::string>> sections;
};

inline RawConfig read_config_text(std::istream& in) {
  RawConfig raw;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = detail::trim(line);
    if (s.empty() || s[0] == '#') continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw config_error("line " + std::to_string(lineno) + ": unterminated section header");
      section = detail::trim(s.substr(1, s.size() - 2));
      if (section.empty())
        throw config_error("line " + std::to_string(lineno) + ": empty section name");
      continue;
    }
    size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw config_error("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = detail::trim(s.substr(0, eq));
    std::string value = detail::trim(s.substr(eq + 1));
    if (key.empty())
      throw config_error("line " + std::to_string(lineno) + ": empty key");
    auto& dst = section.empty() ? raw.top : raw.sections[section];
    if (dst.count(key))
      throw config_error("line " + std::to_string(lineno) + ": duplicate key " + key);
    dst[key] = value;
  }
  return raw;
}

inline RegionKind region_from_string(const std::string& s) {
  std::string k = s;
  std::replace(k.begin(), k.end(), '-', '_');
  if (k == "diamond") return RegionKind::Diamond;
  if (k == "corner_square") return RegionKind::CornerSquare;
  if (k == "ray_band") return RegionKind::RayBand;
  if (k == "switched") return RegionKind::Switched;
  throw config_error("unknown region: " + s);
}

/// Full semantic validation; every failure is a config_error (exit code 2).
inline void validate(const RunConfig& cfg) {
  if (cfg.tasks.empty()) throw config_error("the task list is empty");
  if (cfg.n < 64 || cfg.n > 16384 || (cfg.n & (cfg.n - 1)) != 0)
    throw config_error("N must be a power of two between 64 and 16384, got " +
                       std::to_string(cfg.n));
  DampingRegion region = cfg.make_region();
  check_system_region(cfg.system, region);
  if (cfg.n_t != 0) {
    int per_period = cfg.system == System::Transport ? cfg.n : 2 * cfg.n;
    if (cfg.n_t != per_period)
      throw config_error("N_t is fixed by the unit-ratio grid: expected " +
                         std::to_string(per_period) + " steps per period, got " +
                         std::to_string(cfg.n_t));
  }
  if (cfg.stride < 1) throw config_error("stride must be >= 1");
  if (cfg.sim_stride < 0 || cfg.rates_stride < 0)
    throw config_error("stride must be >= 1");
  for (Task t : {Task::Simulate, Task::Rates})
    if (cfg.has_task(t) && !(cfg.effective_horizon(t) > 0))
      throw config_error(std::string(to_string(t)) + " needs a positive horizon");
  bool dense_wave = cfg.system == System::Wave &&
                    (cfg.has_task(Task::Monodromy) || cfg.has_task(Task::Spectrum) ||
                     cfg.has_task(Task::Observability) || cfg.has_task(Task::Rates) ||
                     cfg.initial.kind == "superpoly");
  if (dense_wave && cfg.n > 1024)
    throw config_error("wave monodromy, spectrum, observability and rates assemble a "
                       "dense operator and need N <= 1024, got " + std::to_string(cfg.n));

  const InitialSpec& ini = cfg.initial;
  const bool known =
      ini.kind == "constant" || ini.kind == "random" || ini.kind == "sine" ||
      ini.kind == "polynomial" || ini.kind == "slow" || ini.kind == "superpoly" ||
      ini.kind == "file";
  if (!known) throw config_error("unknown initial data kind: " + ini.kind);
  if (cfg.system == System::Wave && (ini.kind == "polynomial" || ini.kind == "slow"))
    throw config_error("initial = " + ini.kind + " is defined for the transport system only");
  if (ini.kind == "polynomial" && !(ini.gamma > 0))
    throw config_error("initial polynomial data requires gamma > 0");
  if (ini.kind == "polynomial" && !(ini.margin >= 0))
    throw config_error("initial polynomial data requires margin >= 0");
  if (ini.kind == "sine" && ini.mode < 1)
    throw config_error("initial sine data requires mode >= 1");
  if (ini.kind == "slow" && (ini.levels < 1 || ini.levels > 60))
    throw config_error("initial slow data requires 1 <= levels <= 60");
  if (ini.kind == "file" && !std::filesystem::exists(ini.path))
    throw config_error("initial data file not found: " + ini.path);
  if (cfg.spectral.theta_lo <= 0 || cfg.spectral.theta_lo >= 1)
    throw config_error("spectrum theta_lo must lie in (0, 1)");
  if (cfg.spectral.theta_per_decade < 1)
    throw config_error("spectrum theta_per_decade must be >= 1");
  if (cfg.spectral.kt_n_max < 1) throw config_error("spectrum kt_n_max must be >= 1");
  if (cfg.gcc_window < 0) throw config_error("gcc window must be positive");
  if (cfg.gcc_rays < 16) throw config_error("gcc needs at least 16 rays");
}

inline RunConfig config_from_raw(const RawConfig& raw,
                                 const std::filesystem::path& base_dir) {
  RunConfig cfg;
  bool saw_system = false, saw_region = false, saw_delta = false, saw_n = false,
       saw_tasks = false;
  for (const auto& [key, value] : raw.top) {
    if (key == "system") {
      if (value == "transport") cfg.system = System::Transport;
      else if (value == "wave") cfg.system = System::Wave;
      else throw config_error("system must be transport or wave, got '" + value + "'");
      saw_system = true;
    } else if (key == "region") {
      cfg.region = region_from_string(value);
      saw_region = true;
    } else if (key == "delta") {
      cfg.delta = detail::parse_double(key, value);
      saw_delta = true;
    } else if (key == "amplitude") {
      cfg.amplitude = detail::parse_double(key, value);
    } else if (key == "N") {
      cfg.n = (int)detail::parse_long(key, value);
      saw_n = true;
    } else if (key == "N_t") {
      cfg.n_t = (int)detail::parse_long(key, value);
    } else if (key == "horizon") {
      cfg.horizon = detail::parse_double(key, value);
    } else if (key == "stride") {
      cfg.stride = (int)detail::parse_long(key, value);
    } else if (key == "tasks") {
      for (const auto& name : detail::split_list(value)) {
        Task t = task_from_string(name);
        if (!cfg.has_task(t)) cfg.tasks.push_back(t);
      }
      saw_tasks = true;
    } else if (key == "initial") {
      cfg.initial.kind = value;
    } else if (key == "initial_file") {
      cfg.initial.path = (base_dir / value).lexically_normal().string();
    } else if (key == "gamma") {
      cfg.initial.gamma = detail::parse_double(key, value);
    } else if (key == "margin") {
      cfg.initial.margin = detail::parse_double(key, value);
    } else if (key == "mode") {
      cfg.initial.mode = (int)detail::parse_long(key, value);
    } else if (key == "levels") {
      cfg.initial.levels = (int)detail::parse_long(key, value);
    } else if (key == "output") {
      cfg.output = value;
    } else if (key == "seed") {
      cfg.seed = detail::parse_seed(key, value);
    } else {
      throw config_error("unknown key: " + key);
    }
  }
  if (!saw_system) throw config_error("missing key: system");
  if (!saw_region) throw config_error("missing key: region");
  if (!saw_delta) throw config_error("missing key: delta");
  if (!saw_n) throw config_error("missing key: N");
  if (!saw_tasks) throw config_error("missing key: tasks");
  if (cfg.initial.kind == "file" && cfg.initial.path.empty())
    throw config_error("initial = file requires initial_file");

  for (const auto& [section, keys] : raw.sections) {
    Task t = task_from_string(section);
    if (!cfg.has_task(t))
      throw config_error("section [" + section + "] without the matching task");
    for (const auto& [key, value] : keys) {
      std::string where = "[" + section + "] " + key;
      if (t == Task::Simulate && key == "horizon")
        cfg.sim_horizon = detail::parse_double(where, value);
      else if (t == Task::Simulate && key == "stride")
        cfg.sim_stride = (int)detail::parse_long(where, value);
      else if (t == Task::Rates && key == "horizon")
        cfg.rates_horizon = detail::parse_double(where, value);
      else if (t == Task::Rates && key == "stride")
        cfg.rates_stride = (int)detail::parse_long(where, value);
      else if (t == Task::Spectrum && key == "theta_lo")
        cfg.spectral.theta_lo = detail::parse_double(where, value);
      else if (t == Task::Spectrum && key == "theta_per_decade")
        cfg.spectral.theta_per_decade = (int)detail::parse_long(where, value);
      else if (t == Task::Spectrum && key == "kt_n_max")
        cfg.spectral.kt_n_max = detail::parse_long(where, value);
      else if (t == Task::Gcc && key == "window")
        cfg.gcc_window = detail::parse_double(where, value);
      else if (t == Task::Gcc && key == "rays")
        cfg.gcc_rays = (int)detail::parse_long(where, value);
      else
        throw config_error("unknown key: " + where);
    }
  }

  std::sort(cfg.tasks.begin(), cfg.tasks.end());
  validate(cfg);
  return cfg;
}

inline RunConfig parse_config_string(const std::string& text,
                                     const std::filesystem::path& base_dir = ".") {
  std::istringstream in(text);
  RawConfig raw = read_config_text(in);
  return config_from_raw(raw, base_dir);
}

inline RunConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path.string());
  RawConfig raw = read_config_text(in);
  return config_from_raw(raw, path.has_parent_path() ? path.parent_path() : ".");
}

}  // namespace pevol
