#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "altstand/config.hpp"
#include "altstand/errors.hpp"
#include "altstand/penalty.hpp"
#include "altstand/pid_tuning.hpp"
#include "altstand/simulation.hpp"
#include "altstand/timeseries.hpp"
#include "altstand/validation.hpp"

namespace fs = std::filesystem;
using namespace altstand;
using namespace altstand::harness;

namespace {

constexpr int kUsageError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  std::string config;
  std::string controller;
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string out;
};

SimConfig load(const RunOptions& o) {
  SimConfig cfg;
  try {
    cfg = o.config.empty() ? default_config() : load_config(o.config);
    if (!o.scenario.empty()) {
      const auto noise = cfg.scenario.noise;
      cfg.scenario = scenario::scenario_preset(o.scenario);
      cfg.scenario.noise = noise;
    }
    if (!o.controller.empty()) cfg.controller = controller_from_string(o.controller);
    if (o.seed) cfg.scenario.noise.seed = *o.seed;
    if (!o.out.empty()) cfg.output_dir = o.out;
    cfg.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

fs::path prepare_dir(const std::string& dir) {
  const fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f) throw std::runtime_error("write failed for '" + path.string() + "'");
}

void print_metrics(const std::string& label, const RunMetrics& m) {
  std::printf("%-6s rmse_v1 %.4f  rmse_v2 %.4f  max_v1 %.4f  max_v2 %.4f  p2p %.4f/%.4f/%.4f\n",
              label.c_str(), m.rmse_v1, m.rmse_v2, m.max_abs_err_v1, m.max_abs_err_v2,
              m.valve_p2p[0], m.valve_p2p[1], m.valve_p2p[2]);
}

int cmd_run(const RunOptions& o) {
  const SimConfig cfg = load(o);
  const auto dir = prepare_dir(cfg.output_dir);
  const auto res = run_simulation(cfg);
  write_timeseries(res.series, dir / "timeseries.csv");
  write_text(dir / "metadata.json", run_metadata_json(cfg, res));
  print_metrics(to_string(cfg.controller), res.metrics);
  for (const auto& p : res.phases) print_metrics(p.name, p.metrics);
  if (res.fault) {
    std::fprintf(stderr, "run aborted: plant fault at t=%.3f s: %s\n", res.fault->t,
                 res.fault->message.c_str());
    return 1;
  }
  return 0;
}

int cmd_compare(const RunOptions& o) {
  SimConfig cfg = load(o);
  const auto dir = prepare_dir(cfg.output_dir);
  std::string table = "controller,rmse_v1_kpa,rmse_v2_kpa,max_abs_err_v1_kpa,max_abs_err_v2_kpa,"
                      "p2p_air,p2p_valve1,p2p_valve2,fault\n";
  std::printf("%-10s %10s %10s %12s %12s %10s\n", "controller", "RMSE_V1", "RMSE_V2",
              "|err|max_V1", "|err|max_V2", "valve_p2p");
  bool faulted = false;
  for (auto kind : {ControllerKind::kPid, ControllerKind::kAdrc}) {
    cfg.controller = kind;
    const auto res = run_simulation(cfg);
    const auto name = to_string(kind);
    write_timeseries(res.series, dir / (name + ".csv"));
    write_text(dir / (name + ".json"), run_metadata_json(cfg, res));
    const auto& m = res.metrics;
    std::printf("%-10s %10.4f %10.4f %12.4f %12.4f %10.4f%s\n", name.c_str(), m.rmse_v1, m.rmse_v2,
                m.max_abs_err_v1, m.max_abs_err_v2, m.max_valve_p2p(),
                res.fault ? "  (plant fault)" : "");
    table += name + "," + format_double(m.rmse_v1) + "," + format_double(m.rmse_v2) + "," +
             format_double(m.max_abs_err_v1) + "," + format_double(m.max_abs_err_v2) + "," +
             format_double(m.valve_p2p[0]) + "," + format_double(m.valve_p2p[1]) + "," +
             format_double(m.valve_p2p[2]) + "," + (res.fault ? "1" : "0") + "\n";
    faulted = faulted || res.fault.has_value();
  }
  write_text(dir / "metrics.csv", table);
  if (faulted) {
    std::fprintf(stderr, "compare: at least one run ended in a plant fault\n");
    return 1;
  }
  return 0;
}

int cmd_solve_penalty(const RunOptions& o) {
  const SimConfig cfg = load(o);
  const auto dir = prepare_dir(cfg.output_dir);
  const auto trace = penalty::solve_offline(cfg.offline.problem, cfg.offline.start);
  std::string csv = "iter,p1,p2,f,alpha,L,gamma\n";
  for (const auto& r : trace.iterates) {
    csv += std::to_string(r.iter) + "," + format_double(r.p1) + "," + format_double(r.p2) + "," +
           format_double(r.f) + "," + format_double(r.alpha) + "," + format_double(r.L) + "," +
           format_double(r.gamma) + "\n";
  }
  write_text(dir / "penalty_trace.csv", csv);
  const auto& last = trace.final();
  std::printf("status %s after %zu iterations\n", penalty::to_string(trace.status).c_str(), last.iter);
  std::printf("P1 %.9g kPa  P2 %.9g kPa  f %.6g  alpha %.6g  gamma %.6g  L %.9g\n", last.p1, last.p2,
              last.f, last.alpha, last.gamma, last.L);
  return trace.status == penalty::SolveStatus::kMaxIters ? 1 : 0;
}

int cmd_validate(const RunOptions& o) {
  const SimConfig cfg = load(o);
  auto results = acceptance_checks(cfg);
  const auto props = property_checks(cfg);
  results.insert(results.end(), props.begin(), props.end());
  for (const auto& r : results) std::puts(format_check(r).c_str());
  const bool ok = all_passed(results);
  std::printf("%s\n", ok ? "validate: all checks passed" : "validate: some checks failed");
  return ok ? 0 : 1;
}

int cmd_tune_pid(const RunOptions& o, const RelayTuneOptions& relay) {
  const SimConfig cfg = load(o);
  const auto tuned = relay_autotune_all(cfg, relay);
  const char* names[3] = {"air", "valve1", "valve2"};
  std::printf("; relay autotune on preset %s, amplitude %g, hysteresis %g kPa, detune %g\n",
              cfg.scenario.name.c_str(), relay.relay_amplitude, relay.hysteresis, relay.detune);
  std::printf("[pid]\n");
  bool ok = true;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& t = tuned[i];
    if (!t.ok) {
      std::fprintf(stderr, "tune-pid: loop %s produced no sustained oscillation\n", names[i]);
      ok = false;
      continue;
    }
    std::printf("; %s: Ku %.6g per kPa, Tu %.6g s, amplitude %.4g kPa\n", names[i], t.ku, t.tu,
                t.amplitude);
    std::printf("%s_kp = %.6g\n%s_ki_per_s = %.6g\n%s_kd_s = %.6g\n%s_direction = %g\n", names[i],
                t.gains.kp, names[i], t.gains.ki, names[i], t.gains.kd, names[i],
                t.gains.direction);
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-chamber intake pressure simulator with coordinated ADRC and PID baseline"};
  app.require_subcommand(1);

  RunOptions opts;
  RelayTuneOptions relay;

  auto add_common = [&](CLI::App* sub, bool need_config) {
    auto* c = sub->add_option("--config", opts.config, "Configuration file")->check(CLI::ExistingFile);
    if (need_config) c->required();
  };
  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--controller", opts.controller, "adrc or pid")
        ->check(CLI::IsMember({"adrc", "pid"}));
    sub->add_option("--scenario", opts.scenario, "Scenario preset")
        ->check(CLI::IsMember(scenario::preset_names()));
    sub->add_option("--seed", opts.seed, "Noise seed");
    sub->add_option("--out", opts.out, "Output directory");
  };

  auto* run = app.add_subcommand("run", "Run one simulation and write timeseries.csv and metadata.json");
  add_common(run, true);
  add_run_flags(run);

  auto* compare = app.add_subcommand("compare", "Run both controllers and write a metrics table");
  add_common(compare, true);
  compare->add_option("--scenario", opts.scenario, "Scenario preset")
      ->check(CLI::IsMember(scenario::preset_names()));
  compare->add_option("--seed", opts.seed, "Noise seed");
  compare->add_option("--out", opts.out, "Output directory");

  auto* solve = app.add_subcommand("solve-penalty", "Offline penalty solve with trace CSV");
  add_common(solve, true);
  solve->add_option("--out", opts.out, "Output directory");

  auto* validate = app.add_subcommand("validate", "Run acceptance and property checks");
  add_common(validate, false);

  auto* tune = app.add_subcommand("tune-pid", "Relay autotune of the PID baseline");
  add_common(tune, false);
  tune->add_option("--scenario", opts.scenario, "Scenario preset giving the nominal point")
      ->check(CLI::IsMember(scenario::preset_names()));
  tune->add_option("--amplitude", relay.relay_amplitude, "Relay amplitude (opening fraction)");
  tune->add_option("--hysteresis", relay.hysteresis, "Relay hysteresis (kPa); 0 = noise free");
  tune->add_option("--mdot-out", relay.mdot_out, "Nominal extraction flow (kg/s)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*run) return cmd_run(opts);
    if (*compare) return cmd_compare(opts);
    if (*solve) return cmd_solve_penalty(opts);
    if (*validate) return cmd_validate(opts);
    if (*tune) {
      if (opts.scenario.empty()) opts.scenario = "physical";
      return cmd_tune_pid(opts, relay);
    }
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsageError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kUsageError;
}
