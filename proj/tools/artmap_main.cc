// artmap command line: simulate | map | evaluate | serve | replay

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "artmap/config.h"
#include "artmap/dataset.h"
#include "artmap/error.h"
#include "artmap/evaluation.h"
#include "artmap/map_io.h"
#include "artmap/pipeline.h"
#include "artmap/service.h"

namespace fs = std::filesystem;
using namespace artmap;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIngestion = 3;

std::atomic<bool> g_stop{false};
void on_signal(int) { g_stop = true; }

struct Common {
  std::string config;
  std::optional<uint64_t> seed;
  std::string mode;
  std::string out;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "pipeline config (YAML)");
  app->add_option("--seed", c.seed, "seed override");
  app->add_option("--mode", c.mode, "sensor configuration: camera | lidar | fusion");
  app->add_option("--out", c.out, "output path");
}

PipelineConfig resolve(const Common& c) {
  PipelineConfig cfg = c.config.empty() ? office_mini_config() : load_config(c.config);
  if (c.seed) cfg.run.seed = *c.seed;
  if (!c.mode.empty()) cfg.perception.mode = sensor_mode_from_string(c.mode);
  cfg.validate();
  return cfg;
}

fs::path events_path_for(const fs::path& map_path) {
  fs::path p = map_path;
  p.replace_extension();
  return p.string() + ".events.jsonl";
}

int cmd_simulate(const Common& c) {
  const PipelineConfig cfg = resolve(c);
  const fs::path out = c.out.empty() ? fs::path(cfg.paths.dataset) : fs::path(c.out);
  if (out.empty()) throw ConfigError("simulate needs --out or paths.dataset");
  const Scene scene = generate_scene(cfg.scene, cfg.run.seed);
  TrajectorySource src(scene, cfg.trajectory, cfg.sensors, cfg.run.seed);
  const size_t n = write_dataset(out, cfg.sensors.calibration(), scene, src);
  std::cout << "wrote " << n << " frames, " << scene.objects.size() << " objects to "
            << out.string() << "\n";
  return 0;
}

int cmd_map(const Common& c, const std::string& dataset_arg) {
  const PipelineConfig cfg = resolve(c);
  const fs::path dataset = dataset_arg.empty() ? fs::path(cfg.paths.dataset) : fs::path(dataset_arg);
  if (dataset.empty()) throw ConfigError("map needs --dataset or paths.dataset");
  const fs::path out = c.out.empty() ? fs::path(cfg.paths.map) : fs::path(c.out);
  if (out.empty()) throw ConfigError("map needs --out or paths.map");
  DatasetReader reader(dataset);
  EventBus bus;
  EventLog log(events_path_for(out));
  bus.subscribe([&](const nlohmann::json& e) { log.write(e); });
  const MappingResult res = run_mapping(reader, reader.calibration(), cfg, &bus);
  save_map(out, res.map);
  std::cout << "mode " << to_string(cfg.perception.mode) << ": " << res.frames << " frames, "
            << res.map.artifacts.size() << " artifacts -> " << out.string() << "\n";
  return 0;
}

int cmd_evaluate(const std::string& map_path, const std::string& dataset, const std::string& out,
                 bool xy_only) {
  const ArtifactMap map = load_map(map_path);
  fs::path truth_file = fs::path(dataset);
  if (fs::is_directory(truth_file)) truth_file /= "scene_truth.json";
  std::ifstream in(truth_file);
  if (!in) throw IngestionError("cannot open " + truth_file.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IngestionError(truth_file.string() + ": " + e.what());
  }
  const auto truth = truth_from_objects(scene_objects_from_json(j));
  EvaluationConfig ecfg;
  ecfg.xy_only = xy_only;
  const auto outcomes = categorize(map, truth, ecfg);
  const Report r = report(outcomes, truth);
  std::cout << report_table({{fs::path(map_path).stem().string(), r}});
  if (!out.empty()) {
    nlohmann::json doc = report_to_json(r);
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& o : outcomes) {
      rows.push_back({{"artifact", o.artifact_id},
                      {"category", std::string(to_string(o.category))},
                      {"truth", o.truth_id ? nlohmann::json(*o.truth_id) : nlohmann::json()},
                      {"distance_error", o.distance_error}});
    }
    doc["outcomes"] = rows;
    std::ofstream(out) << doc.dump(2) << "\n";
  }
  return 0;
}

int run_session(LiveSession& session, const PipelineConfig& cfg, int port, double duration) {
  ApiServer server(session, cfg.service.host, port >= 0 ? port : cfg.service.port);
  session.start();
  server.start();
  std::cout << "listening on http://" << cfg.service.host << ":" << server.port() << std::endl;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const auto t0 = std::chrono::steady_clock::now();
  while (!g_stop) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    if (duration > 0.0 &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() > duration) {
      break;
    }
  }
  server.stop();
  session.stop(true);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"artmap: camera-lidar semantic artifact mapping"};
  app.require_subcommand(1);

  Common sim, map, serve, replay;
  std::string map_dataset, replay_dataset, eval_map, eval_dataset, eval_out;
  bool eval_xy = false;
  int serve_port = -1, replay_port = -1;
  double serve_duration = 0.0, replay_duration = 0.0;

  auto* s = app.add_subcommand("simulate", "render a synthetic dataset");
  add_common(s, sim);
  auto* m = app.add_subcommand("map", "map a dataset to a YAML artifact map");
  add_common(m, map);
  m->add_option("--dataset", map_dataset, "dataset directory");
  auto* e = app.add_subcommand("evaluate", "score a map against scene truth");
  e->add_option("--map", eval_map, "artifact map (YAML)")->required();
  e->add_option("--dataset,--truth", eval_dataset, "dataset directory or scene_truth.json")
      ->required();
  e->add_option("--out", eval_out, "JSON report path");
  e->add_flag("--xy-only", eval_xy, "measure position error in the XY plane only");
  auto* sv = app.add_subcommand("serve", "live simulator with the HTTP/WebSocket API");
  add_common(sv, serve);
  sv->add_option("--port", serve_port, "listen port (0 picks a free one)");
  sv->add_option("--duration", serve_duration, "stop after this many seconds");
  auto* rp = app.add_subcommand("replay", "replay a dataset through the API");
  add_common(rp, replay);
  rp->add_option("--dataset", replay_dataset, "dataset directory");
  rp->add_option("--port", replay_port, "listen port (0 picks a free one)");
  rp->add_option("--duration", replay_duration, "stop after this many seconds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*s) return cmd_simulate(sim);
    if (*m) return cmd_map(map, map_dataset);
    if (*e) return cmd_evaluate(eval_map, eval_dataset, eval_out, eval_xy);
    if (*sv) {
      PipelineConfig cfg = resolve(serve);
      if (!serve.out.empty()) cfg.paths.map = serve.out;
      LiveSession session(cfg, generate_scene(cfg.scene, cfg.run.seed));
      return run_session(session, cfg, serve_port, serve_duration);
    }
    if (*rp) {
      PipelineConfig cfg = resolve(replay);
      if (!replay.out.empty()) cfg.paths.map = replay.out;
      const std::string ds = replay_dataset.empty() ? cfg.paths.dataset : replay_dataset;
      if (ds.empty()) throw ConfigError("replay needs --dataset or paths.dataset");
      LiveSession session(cfg, fs::path(ds));
      return run_session(session, cfg, replay_port, replay_duration);
    }
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfig;
  } catch (const PlacementError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfig;
  } catch (const IngestionError& err) {
    std::cerr << "ingestion error: " << err.what() << "\n";
    return kExitIngestion;
  } catch (const ParseError& err) {
    std::cerr << "ingestion error: " << err.what() << "\n";
    return kExitIngestion;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
