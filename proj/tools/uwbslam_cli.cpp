#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uwbslam/runner.hpp"

namespace fs = std::filesystem;
using namespace uwbslam;

namespace {

void apply_overrides(DriverConfig& cfg, const std::vector<std::string>& sets) {
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("--set expects key=value, got " + kv);
    set_driver_param(cfg, kv.substr(0, eq), std::stod(kv.substr(eq + 1)));
  }
}

void report(const MetricsReport& m) {
  std::cout << m.mode << " seed=" << m.seed << " rms_ate=" << m.rms_ate
            << " final_pose_error=" << m.final_pose_error << " landmarks=" << m.num_landmarks
            << " tags=" << m.num_tags_deployed << " ghosts=" << m.ghost_accepted << "/"
            << m.ghost_emitted << " runtime=" << m.runtime_s << "s\n";
}

void report_audit(const DriverAudit& a) {
  std::cout << "  audit: acc=" << a.accumulations << " updates=" << a.slam_updates
            << " aoa=" << a.aoa_received << " buffered=" << a.aoa_buffered
            << " motion_rej=" << a.aoa_motion_rejected << " gate_rej=" << a.aoa_gate_rejected
            << " tag_acc=" << a.tag_obs_accepted << " tag_rej=" << a.tag_obs_rejected
            << " (nc=" << a.tag_rej_nocluster << " mc=" << a.tag_rej_multicluster
            << " gate=" << a.tag_rej_gate << ") deploys=" << a.deployments << "\n";
}

void write_outputs(const RunResult& result, const std::string& out_dir, const std::string& stem) {
  if (out_dir.empty()) return;
  fs::create_directories(out_dir);
  write_metrics(result.metrics, out_dir + "/" + stem + "_metrics.json");
  write_residuals_csv(result, out_dir + "/" + stem + "_residuals.csv");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"All-UWB landmark SLAM: simulation, replay and evaluation"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir, mode = "full", log_path, modes_csv, param, values_csv;
  uint64_t seed = 1;
  bool no_log_radar = false;
  std::vector<std::string> sets;

  auto add_common = [&](CLI::App* cmd, bool needs_scenario = true) {
    if (needs_scenario) {
      cmd->add_option("--scenario", scenario_path, "scenario JSON file")->required();
    }
    cmd->add_option("--seed", seed, "RNG seed");
    cmd->add_option("--out", out_dir, "output directory for metrics/residuals");
    cmd->add_option("--set", sets, "override a pipeline parameter, key=value (repeatable)");
  };

  auto* sim = app.add_subcommand("simulate", "run one seeded simulation through the pipeline");
  add_common(sim);
  sim->add_option("--mode", mode, "full | radar_only | aoa_only | odom_only");
  sim->add_option("--log", log_path, "write a JSON-lines run log to this path");
  sim->add_flag("--no-log-radar", no_log_radar, "omit radar frames from the run log");

  auto* rep = app.add_subcommand("replay", "re-drive the pipeline from a recorded run log");
  add_common(rep);
  rep->add_option("--log", log_path, "run log to replay")->required();

  auto* abl = app.add_subcommand("ablate", "run several sensing modes on the same scenario");
  add_common(abl);
  abl->add_option("--modes", modes_csv, "comma-separated modes")
      ->default_val("full,radar_only,aoa_only,odom_only");

  auto* swp = app.add_subcommand("sweep", "sweep one pipeline parameter");
  add_common(swp);
  swp->add_option("--param", param, "parameter name (config key)")->required();
  swp->add_option("--values", values_csv, "comma-separated values")->required();
  swp->add_option("--mode", mode, "sensing mode");

  auto* eva = app.add_subcommand("evaluate", "recompute metrics from a recorded run log");
  add_common(eva);
  eva->add_option("--log", log_path, "run log to evaluate")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    auto split_csv = [](const std::string& csv) {
      std::vector<std::string> out;
      std::string cur;
      for (char c : csv) {
        if (c == ',') {
          if (!cur.empty()) out.push_back(cur);
          cur.clear();
        } else {
          cur += c;
        }
      }
      if (!cur.empty()) out.push_back(cur);
      return out;
    };

    if (sim->parsed()) {
      Scenario sc = Scenario::load(scenario_path);
      apply_overrides(sc.driver, sets);
      RunOptions opts;
      opts.log_path = log_path;
      opts.log_radar = !no_log_radar;
      const RunResult result = run_live(sc, seed, mode, opts);
      report(result.metrics);
      report_audit(result.audit);
      write_outputs(result, out_dir, mode + "_seed" + std::to_string(seed));
    } else if (rep->parsed() || eva->parsed()) {
      Scenario sc = Scenario::load(scenario_path);
      apply_overrides(sc.driver, sets);
      const RunResult result = run_replay_file(log_path, sc.driver);
      report(result.metrics);
      write_outputs(result, out_dir, rep->parsed() ? "replay" : "evaluate");
    } else if (abl->parsed()) {
      Scenario sc = Scenario::load(scenario_path);
      apply_overrides(sc.driver, sets);
      for (const auto& m : split_csv(modes_csv)) {
        const RunResult result = run_live(sc, seed, m, {});
        report(result.metrics);
        write_outputs(result, out_dir, m + "_seed" + std::to_string(seed));
      }
    } else if (swp->parsed()) {
      for (const auto& v : split_csv(values_csv)) {
        Scenario sc = Scenario::load(scenario_path);
        apply_overrides(sc.driver, sets);
        set_driver_param(sc.driver, param, std::stod(v));
        const RunResult result = run_live(sc, seed, mode, {});
        std::cout << param << "=" << v << " ";
        report(result.metrics);
        write_outputs(result, out_dir, param + "_" + v);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
