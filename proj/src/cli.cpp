#include "cavsim/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "cavsim/engine.hpp"
#include "cavsim/errors.hpp"
#include "cavsim/format.hpp"
#include "cavsim/metrics.hpp"
#include "cavsim/scenario.hpp"

namespace fs = std::filesystem;

namespace cavsim {

namespace {

struct Overrides {
  std::optional<std::string> mode;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::optional<double> duration;
};

ScenarioConfig load_with_overrides(const std::string& path, const Overrides& o) {
  ScenarioConfig cfg = load_scenario(path);
  if (o.mode) cfg.mode = parse_mode(*o.mode);
  if (o.seed) cfg.seed = *o.seed;
  if (o.dt) cfg.dt = *o.dt;
  if (o.duration) cfg.duration = *o.duration;
  return cfg;
}

void check_valid(const ScenarioConfig& cfg, std::ostream& err) {
  const auto violations = validate_scenario(cfg);
  if (violations.empty()) return;
  for (const auto& v : violations) err << v.subject << ": " << v.message << '\n';
  throw ConfigError(std::to_string(violations.size()) + " validation error(s)");
}

fs::path default_out(const ScenarioConfig& cfg, const std::string& label) {
  const char* root = std::getenv("CAVSIM_OUT_ROOT");
  fs::path base = (root != nullptr && *root != '\0') ? fs::path(root) : fs::path("runs");
  return base / (cfg.name + "-" + label + "-seed" + std::to_string(cfg.seed));
}

void prepare_dir(const fs::path& dir, bool overwrite) {
  std::error_code ec;
  if (fs::exists(dir, ec)) {
    if (!overwrite) throw IoError("output directory '" + dir.string() + "' exists (use --overwrite)");
    fs::remove_all(dir, ec);
    if (ec) throw IoError("cannot clear '" + dir.string() + "': " + ec.message());
  }
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
}

template <typename Writer>
void write_file(const fs::path& path, Writer&& writer) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  writer(f);
  f.flush();
  if (!f) throw IoError("write to '" + path.string() + "' failed");
}

struct RunFiles {
  std::vector<std::string> names;
};

RunFiles write_run(const fs::path& dir, const RunResult& r, const ScenarioConfig& cfg) {
  write_file(dir / "trace.csv", [&](std::ostream& o) { write_trace_csv(o, r, cfg.network); });
  write_file(dir / "events.jsonl", [&](std::ostream& o) { write_events_jsonl(o, r); });
  write_file(dir / "ledger.jsonl", [&](std::ostream& o) { write_ledger_jsonl(o, r); });
  return {{"trace.csv", "events.jsonl", "ledger.jsonl"}};
}

void write_manifest(const fs::path& dir, const ScenarioConfig& cfg, const std::vector<std::string>& modes,
                    const std::vector<std::string>& files, double wall, const std::optional<AbortInfo>& abort) {
  write_file(dir / "manifest.json", [&](std::ostream& o) {
    o << "{\n  \"tool\": \"cavsim\",\n  \"version\": \"" << kVersion << "\",\n  \"config_hash\": \""
      << config_hash(cfg) << "\",\n  \"scenario\": \"scenario.json\",\n  \"modes\": [";
    for (std::size_t i = 0; i < modes.size(); ++i) o << (i ? ", " : "") << '"' << modes[i] << '"';
    o << "],\n  \"seed\": " << cfg.seed << ",\n  \"dt\": " << format_g9(cfg.dt)
      << ",\n  \"duration\": " << format_g9(cfg.duration) << ",\n  \"files\": [";
    for (std::size_t i = 0; i < files.size(); ++i) o << (i ? ", " : "") << '"' << json_escape(files[i]) << '"';
    o << "],\n  \"wall_seconds\": " << format_g9(wall) << ",\n  \"aborted\": ";
    if (abort) {
      o << "{\"t\": " << format_g9(abort->t) << ", \"vehicle\": " << abort->vehicle << ", \"zone\": \""
        << json_escape(abort->zone) << "\", \"bound\": \"" << json_escape(abort->bound) << "\", \"message\": \""
        << json_escape(abort->message) << "\"}";
    } else {
      o << "null";
    }
    o << "\n}\n";
  });
  write_file(dir / "scenario.json", [&](std::ostream& o) { o << scenario_to_json(cfg); });
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int report_abort(const AbortInfo& a, std::ostream& err) {
  err << "infeasible plan: vehicle " << a.vehicle << ", zone " << a.zone << ", bound " << a.bound << ": " << a.message
      << '\n';
  return kExitInfeasible;
}

int cmd_validate(const std::string& path, std::ostream& out, std::ostream& err) {
  const ScenarioConfig cfg = load_scenario(path);
  const auto violations = validate_scenario(cfg);
  for (const auto& v : violations) err << v.subject << ": " << v.message << '\n';
  if (!violations.empty()) return kExitValidation;
  out << "ok: " << cfg.name << " (" << cfg.network.routes.size() << " routes, " << cfg.network.zones.size()
      << " zones, " << cfg.fleet.size() << " vehicles), config " << config_hash(cfg) << '\n';
  return kExitOk;
}

int cmd_run(const std::string& path, const Overrides& ov, const std::string& out_dir, bool overwrite,
            std::ostream& out, std::ostream& err) {
  const ScenarioConfig cfg = load_with_overrides(path, ov);
  check_valid(cfg, err);
  const fs::path dir = out_dir.empty() ? default_out(cfg, to_string(cfg.mode)) : fs::path(out_dir);
  prepare_dir(dir, overwrite);
  const auto start = std::chrono::steady_clock::now();
  const RunResult r = simulate(cfg);
  auto files = write_run(dir, r, cfg).names;
  files.push_back("scenario.json");
  write_manifest(dir, cfg, {to_string(cfg.mode)}, files, seconds_since(start), r.abort);
  if (r.abort) return report_abort(*r.abort, err);
  out << "wrote " << dir.string() << " (" << r.stats.ticks << " ticks, " << r.events.size() << " events)\n";
  return kExitOk;
}

int cmd_compare(const std::string& path, const Overrides& ov, const std::string& out_dir, bool overwrite,
                bool ego_only, std::ostream& out, std::ostream& err) {
  ScenarioConfig cfg = load_with_overrides(path, ov);
  check_valid(cfg, err);
  const fs::path dir = out_dir.empty() ? default_out(cfg, "compare") : fs::path(out_dir);
  prepare_dir(dir, overwrite);
  const auto start = std::chrono::steady_clock::now();

  ScenarioConfig base_cfg = cfg;
  base_cfg.mode = Mode::baseline;
  ScenarioConfig opt_cfg = cfg;
  opt_cfg.mode = Mode::optimal;
  // Independent runs; no shared mutable state.
  auto fut = std::async(std::launch::async, [&] { return simulate(base_cfg); });
  const RunResult opt = simulate(opt_cfg);
  const RunResult base = fut.get();

  for (const auto& [label, r, c] : {std::tuple{"baseline", &base, &base_cfg}, std::tuple{"optimal", &opt, &opt_cfg}}) {
    const fs::path sub = dir / label;
    prepare_dir(sub, true);
    auto files = write_run(sub, *r, *c).names;
    files.push_back("scenario.json");
    write_manifest(sub, *c, {label}, files, seconds_since(start), r->abort);
  }
  if (base.abort) return report_abort(*base.abort, err);
  if (opt.abort) return report_abort(*opt.abort, err);

  const Reports rep = build_reports(base, opt, cfg, ego_only);
  const fs::path rdir = dir / "report";
  prepare_dir(rdir, true);
  const std::string hash = config_hash(cfg);
  write_file(rdir / "travel_times.csv", [&](std::ostream& o) { write_travel_table_csv(o, rep.travel); });
  write_file(rdir / "histogram.csv", [&](std::ostream& o) { write_histogram_csv(o, rep); });
  write_file(rdir / "speed_stats_baseline.csv", [&](std::ostream& o) { write_speed_stats_csv(o, rep.baseline_speed); });
  write_file(rdir / "speed_stats_optimal.csv", [&](std::ostream& o) { write_speed_stats_csv(o, rep.optimal_speed); });
  write_file(rdir / "summary.json", [&](std::ostream& o) { write_summary_json(o, rep, hash); });
  write_manifest(dir, cfg, {"baseline", "optimal"},
                 {"baseline/", "optimal/", "report/travel_times.csv", "report/histogram.csv",
                  "report/speed_stats_baseline.csv", "report/speed_stats_optimal.csv", "report/summary.json",
                  "scenario.json"},
                 seconds_since(start), std::nullopt);

  write_travel_table_csv(out, rep.travel);
  out << "mean travel time: baseline " << format_g9(rep.travel.mean_baseline) << " s, optimal "
      << format_g9(rep.travel.mean_optimal) << " s, decrease " << format_g9(rep.travel.mean_percent) << " %\n";
  return kExitOk;
}

int cmd_smooth(const std::string& input, double window, double cutoff, const std::string& output, std::ostream& out) {
  std::ifstream in(input);
  if (!in) throw IoError("cannot read '" + input + "'");
  std::vector<double> t;
  std::vector<double> v;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (lineno == 1 && line.find_first_not_of("0123456789.-+eE, \t\r") != std::string::npos) continue;  // header
    std::istringstream row(line);
    std::string a;
    std::string b;
    if (!std::getline(row, a, ',') || !std::getline(row, b)) {
      throw ParseError(input + ": line " + std::to_string(lineno) + ": expected t,v");
    }
    try {
      t.push_back(std::stod(a));
      v.push_back(std::stod(b));
    } catch (const std::exception&) {
      throw ParseError(input + ": line " + std::to_string(lineno) + ": expected numbers");
    }
  }
  if (t.size() < 2) throw ParseError(input + ": need at least two samples");
  const double period = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  const auto smoothed = smooth_speed(v, period, window, cutoff);
  auto emit = [&](std::ostream& o) {
    o << "t,v\n";
    for (std::size_t i = 0; i < t.size(); ++i) o << format_g9(t[i]) << ',' << format_g9(smoothed[i]) << '\n';
  };
  if (output.empty()) {
    emit(out);
  } else {
    write_file(output, emit);
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Deterministic traffic simulator for coordinated automated vehicles", "cavsim"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string scenario;
  std::string out_dir;
  bool overwrite = false;
  bool ego_only = false;
  Overrides ov;
  std::string mode;
  std::uint64_t seed = 0;
  double dt = 0.0;
  double duration = 0.0;

  auto* validate = app.add_subcommand("validate", "Check a scenario file");
  validate->add_option("--scenario,scenario", scenario, "Scenario JSON")->required();

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario,scenario", scenario, "Scenario JSON")->required();
    sub->add_option("--seed", seed, "Override the scenario seed");
    sub->add_option("--dt", dt, "Override the tick length (s)");
    sub->add_option("--duration", duration, "Override the run length (s)");
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_flag("--overwrite", overwrite, "Replace an existing output directory");
  };
  auto* run = app.add_subcommand("run", "Run one mode and write trace, events, ledger and manifest");
  add_common(run);
  run->add_option("--mode", mode, "baseline or optimal")->check(CLI::IsMember({"baseline", "optimal"}));
  auto* compare = app.add_subcommand("compare", "Run both modes with the same seed and write travel-time reports");
  add_common(compare);
  compare->add_flag("--ego-only", ego_only, "Restrict per-route speed statistics to ego vehicles");

  std::string input;
  std::string smooth_out;
  double window = 0.45;
  double cutoff = 20.0;
  auto* smooth = app.add_subcommand("smooth", "Smooth an external t,v speed trace");
  smooth->add_option("--input,input", input, "CSV with t,v columns")->required();
  smooth->add_option("--window", window, "Moving-average window (s)");
  smooth->add_option("--cutoff", cutoff, "Discard samples above this speed (m/s)");
  smooth->add_option("--out", smooth_out, "Output CSV (stdout when omitted)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kExitValidation;
  }

  auto pick = [&](CLI::App* sub) {
    if (sub->count("--seed")) ov.seed = seed;
    if (sub->count("--dt")) ov.dt = dt;
    if (sub->count("--duration")) ov.duration = duration;
  };
  try {
    if (*validate) return cmd_validate(scenario, out, err);
    if (*run) {
      pick(run);
      if (run->count("--mode")) ov.mode = mode;
      return cmd_run(scenario, ov, out_dir, overwrite, out, err);
    }
    if (*compare) {
      pick(compare);
      return cmd_compare(scenario, ov, out_dir, overwrite, ego_only, out, err);
    }
    if (*smooth) return cmd_smooth(input, window, cutoff, smooth_out, out);
  } catch (const InfeasiblePlanError& e) {
    err << "infeasible plan: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ConfigError& e) {
    err << "invalid scenario: " << e.what() << '\n';
    return kExitValidation;
  } catch (const UsageError& e) {
    err << "invalid argument: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInfeasible;
  }
  return kExitValidation;
}

}  // namespace cavsim
