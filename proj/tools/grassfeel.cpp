#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "grassfeel/array_field.hpp"
#include "grassfeel/benchmark.hpp"
#include "grassfeel/hash.hpp"
#include "grassfeel/server.hpp"
#include "grassfeel/session.hpp"
#include "grassfeel/stm_trajectory.hpp"

using namespace grassfeel;

namespace {

std::vector<double> parse_list(const std::string& text, std::size_t expected, const char* what) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(std::stod(item));
  if (out.size() != expected) {
    throw CLI::ValidationError(what, "expected " + std::to_string(expected) + " comma-separated values");
  }
  return out;
}

ParamVector parse_vector(const std::string& text, const char* what) {
  const auto values = parse_list(text, kParamCount, what);
  ParamVector v;
  std::copy(values.begin(), values.end(), v.values.begin());
  if (!v.in_unit_cube()) throw CLI::ValidationError(what, "values must lie in [0, 1]");
  return v;
}

void write_file(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ArrayConfig load_array(const SessionConfig& cfg) {
  if (cfg.array_config_path.empty()) return default_array_config();
  return array_config_from_json(nlohmann::json::parse(read_file(cfg.array_config_path)));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grassfeel: haptic grass parameter exploration service"};
  app.require_subcommand(0, 1);

  std::string config_path;
  std::optional<unsigned short> port;
  std::optional<std::uint64_t> seed;
  bool headless = false;
  int iterations = 15;
  double noise = 0.0;
  std::string target_text;
  std::string csv_path;
  std::string log_path;

  app.add_option("--config", config_path, "JSON session config")->check(CLI::ExistingFile);
  app.add_option("--port", port, "listen port (overrides config)");
  app.add_option("--seed", seed, "session seed (overrides config)");
  app.add_flag("--headless", headless, "run the synthetic-user loop instead of serving");
  app.add_option("--iterations", iterations, "headless iterations")->check(CLI::PositiveNumber);
  app.add_option("--noise", noise, "headless choice noise scale")->check(CLI::NonNegativeNumber);
  app.add_option("--target", target_text, "headless target, 7 comma-separated values in [0, 1]");
  app.add_option("--csv", csv_path, "headless per-iteration CSV (default stdout)");
  app.add_option("--log-out", log_path, "write the event log as JSONL on exit");

  auto* schedule_cmd = app.add_subcommand("schedule", "export the focus schedule as CSV");
  double t0 = 0.0, duration = 1.0;
  std::string params_text = "0.5,0.5,0.5,0.5,0.5,0.5,0.5";
  std::string schedule_out;
  schedule_cmd->add_option("--t0", t0, "start time in seconds");
  schedule_cmd->add_option("--duration", duration, "duration in seconds")->check(CLI::PositiveNumber);
  schedule_cmd->add_option("--params", params_text, "normalized parameters, 7 comma-separated values");
  schedule_cmd->add_option("--out", schedule_out, "CSV path (default stdout)");

  auto* field_cmd = app.add_subcommand("field", "scan the focused pressure field");
  std::string focus_text = "0,0,200";
  double extent = 40.0, resolution = 1.0;
  std::string field_out = "field";
  field_cmd->add_option("--target", focus_text, "focus point x,y,z in mm");
  field_cmd->add_option("--extent", extent, "scan width in mm")->check(CLI::NonNegativeNumber);
  field_cmd->add_option("--resolution", resolution, "scan pitch in mm")->check(CLI::PositiveNumber);
  field_cmd->add_option("--out", field_out, "output prefix; writes <prefix>.csv and <prefix>.json");

  auto* replay_cmd = app.add_subcommand("replay", "verify a JSONL event log");
  std::string replay_path;
  replay_cmd->add_option("log", replay_path, "JSONL log")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    SessionConfig cfg = config_path.empty() ? SessionConfig{} : load_session_config(config_path);
    if (port) cfg.port = *port;
    if (seed) cfg.seed = *seed;

    if (*schedule_cmd) {
      const auto params = to_physical(cfg.domain, parse_vector(params_text, "--params"));
      const auto frames = schedule(cfg.stm, params, spec_from_params(params), t0, duration);
      write_file(schedule_out, schedule_to_csv(frames));
      return 0;
    }

    if (*field_cmd) {
      const auto xyz = parse_list(focus_text, 3, "--target");
      const Vec3 target(xyz[0], xyz[1], xyz[2]);
      const auto array_cfg = load_array(cfg);
      const auto array = build_array(array_cfg);
      const AcousticConfig acoustic;
      ScanGrid grid;
      grid.center = target;
      grid.extent_mm = extent;
      grid.resolution_mm = resolution;
      const auto map = field_scan(array, acoustic, focus_phases(array, acoustic, target), grid, 1.0);
      write_file(field_out + ".csv", field_to_csv(map));
      write_file(field_out + ".json", field_metadata(map, target, acoustic, array_cfg).dump(2) + "\n");
      return 0;
    }

    if (*replay_cmd) {
      const auto log = log_from_jsonl(read_file(replay_path));
      try {
        std::cout << hash_hex(replay(log, cfg)) << "\n";
      } catch (const ReplayDivergence& e) {
        std::cerr << e.what() << "\n";
        return 1;
      }
      return 0;
    }

    if (headless) {
      HeadlessOptions opts;
      opts.seed = cfg.seed;
      opts.iterations = iterations;
      opts.noise = noise;
      if (!target_text.empty()) opts.target = parse_vector(target_text, "--target");
      const auto run = run_headless(cfg, opts);
      write_file(csv_path, records_to_csv(run.records));
      if (!log_path.empty()) write_file(log_path, log_to_jsonl(run.log));
      return 0;
    }

    Server server(cfg);
    std::fprintf(stderr, "listening on %s:%u\n", cfg.listen_address.c_str(), server.port());
    server.run(true);
    if (!log_path.empty()) write_file(log_path, log_to_jsonl(server.log()));
    return 0;
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
