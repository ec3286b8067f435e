// Copyright 2026 The uwtwin Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// uwtwin: command-line entry point for the digital-twin experiments.

#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "uwtwin/bridge/bag.hpp"
#include "uwtwin/config.hpp"
#include "uwtwin/latency_bench.hpp"
#include "uwtwin/mission.hpp"
#include "uwtwin/twin_server.hpp"

extern char** environ;

namespace fs = std::filesystem;
using namespace uwtwin;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

struct Common {
  std::string config_path;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<double> rate_pose, rate_wrench, rate_image, rate_cloud;
  std::string host = "127.0.0.1";
  std::uint16_t port_tcp = 9870;
  std::uint16_t port_ws = 9871;
  std::string spawn = "threads";

  ScenarioConfig scenario() const {
    ScenarioConfig c = config_path.empty() ? ScenarioConfig{} : load_scenario(config_path);
    if (seed) {
      c.map_seed = *seed;
      c.noise.rng_seed = *seed;
      c.campaign.seed = *seed;
    }
    if (rate_pose) c.rates.pose = *rate_pose;
    if (rate_wrench) c.rates.wrench = *rate_wrench;
    if (rate_image) c.rates.image = *rate_image;
    if (rate_cloud) c.rates.cloud = *rate_cloud;
    c.validate();
    return c;
  }

  fs::path out_dir() const {
    fs::create_directories(out);
    return fs::path(out);
  }
};

void add_rate_flags(CLI::App* app, Common& c) {
  app->add_option("--rate-pose", c.rate_pose, "pose publish rate (Hz)")->check(CLI::PositiveNumber);
  app->add_option("--rate-wrench", c.rate_wrench, "wrench command rate (Hz)")->check(CLI::PositiveNumber);
  app->add_option("--rate-image", c.rate_image, "image publish rate (Hz)")->check(CLI::PositiveNumber);
  app->add_option("--rate-cloud", c.rate_cloud, "feature cloud publish rate (Hz)")->check(CLI::PositiveNumber);
}

void add_net_flags(CLI::App* app, Common& c) {
  app->add_option("--host", c.host, "broker host");
  app->add_option("--port-tcp", c.port_tcp, "broker TCP port");
  app->add_option("--port-ws", c.port_ws, "broker WebSocket port");
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  if (!out) throw Error("cannot write " + p.string());
  out << content;
}

/// A child copy of this binary, terminated on destruction.
class ChildProcess {
 public:
  explicit ChildProcess(std::vector<std::string> args) {
    args.insert(args.begin(), "/proc/self/exe");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);
    if (posix_spawn(&pid_, "/proc/self/exe", nullptr, nullptr, argv.data(), environ) != 0) {
      throw Error("cannot spawn child process");
    }
  }
  ~ChildProcess() { stop(); }
  void stop() {
    if (pid_ <= 0) return;
    kill(pid_, SIGTERM);
    int status = 0;
    waitpid(pid_, &status, 0);
    pid_ = -1;
  }

 private:
  pid_t pid_ = -1;
};

std::vector<std::string> rate_args(const TopicRates& r) {
  return {"--rate-pose", fmt::format("{}", r.pose), "--rate-wrench", fmt::format("{}", r.wrench),
          "--rate-image", fmt::format("{}", r.image), "--rate-cloud", fmt::format("{}", r.cloud)};
}

// ---------------------------------------------------------------- commands

int cmd_gen_map(const Common& c) {
  const auto cfg = c.scenario();
  const auto path = c.out_dir() / "heightmap.json";
  save_heightmap(cfg.heightmap(), path);
  fmt::print("{}\n", path.string());
  return 0;
}

struct SimOpts {
  double duration = 0.0;
  bool no_images = false;
  std::vector<double> start{30.0, 30.0, -5.0};
};

SimConfig sim_config(const ScenarioConfig& cfg, const SimOpts& o) {
  SimConfig s;
  s.vehicle = cfg.vehicle;
  s.noise = cfg.noise;
  s.rates = cfg.rates;
  s.publish_images = !o.no_images;
  s.start_position = Vec3(o.start.at(0), o.start.at(1), o.start.at(2));
  return s;
}

int cmd_sim(const Common& c, const SimOpts& o) {
  const auto cfg = c.scenario();
  bridge::ClientOptions opts;
  opts.host = c.host;
  opts.port = c.port_tcp;
  RealtimeSim sim(cfg.heightmap(), sim_config(cfg, o), opts);
  sim.run(o.duration > 0.0 ? o.duration : 1e12, &g_stop);
  fmt::print("sim: {:.1f} s simulated, {} wrenches received, {} ground contacts\n", sim.node().elapsed(),
             sim.node().wrenches_received(), sim.node().contact_events());
  return 0;
}

struct TwinOpts {
  double duration = 0.0;
  std::uint16_t port_http = 9872;
  std::string static_dir;
  bool with_sim = false;
  std::string record;
  SimOpts sim;
};

int cmd_twin(const Common& c, const TwinOpts& o) {
  const auto cfg = c.scenario();
  const Heightmap map = cfg.heightmap();
  TwinServerConfig sc;
  sc.broker.host = c.host;
  sc.broker.tcp_port = c.port_tcp;
  sc.broker.ws_port = c.port_ws;
  sc.http_port = o.port_http;
  sc.planner = cfg.planner;
  sc.twin.robot_radius = cfg.robot_radius;
  sc.twin.goal_tolerance = cfg.goal_tolerance;
  const Vec2 lo = map.origin;
  const Vec2 hi = map.max_corner();
  sc.twin.map_bounds = Aabb{Vec3(lo.x() - 5, lo.y() - 5, map.min_depth() - 5), Vec3(hi.x() + 5, hi.y() + 5, 0.0)};
  sc.twin.plan_bounds = Aabb{Vec3(lo.x(), lo.y(), map.min_depth() - 0.5), Vec3(hi.x(), hi.y(), -0.5)};
  sc.control_rate = cfg.rates.wrench;
  if (!o.static_dir.empty()) sc.static_dir = o.static_dir;

  TwinServer server(sc);
  server.start();
  fmt::print("twin: broker tcp {} ws {}, http {}\n", server.tcp_port(), server.ws_port(), server.http_port());
  std::fflush(stdout);

  std::unique_ptr<bridge::Client> recorder_client;
  bridge::BagRecorder recorder;
  if (!o.record.empty()) {
    bridge::ClientOptions ro;
    ro.host = c.host;
    ro.port = server.tcp_port();
    recorder_client = std::make_unique<bridge::Client>(ro);
    for (const auto* t : {&topics::kPose, &topics::kTruth, &topics::kCloud, &topics::kWrench}) {
      recorder_client->subscribe(*t, recorder.handler());
    }
  }

  std::thread sim_thread;
  std::unique_ptr<ChildProcess> sim_proc;
  if (o.with_sim) {
    if (c.spawn == "procs") {
      std::vector<std::string> args{"sim", "--host", c.host, "--port-tcp", std::to_string(server.tcp_port())};
      if (!c.config_path.empty()) args.insert(args.end(), {"--config", c.config_path});
      if (c.seed) args.insert(args.end(), {"--seed", std::to_string(*c.seed)});
      for (auto& a : rate_args(cfg.rates)) args.push_back(a);
      if (o.sim.no_images) args.push_back("--no-images");
      sim_proc = std::make_unique<ChildProcess>(args);
    } else {
      bridge::ClientOptions so;
      so.host = c.host;
      so.port = server.tcp_port();
      sim_thread = std::thread([so, map, simcfg = sim_config(cfg, o.sim)] {
        RealtimeSim sim(map, simcfg, so);
        sim.run(1e12, &g_stop);
      });
    }
  }

  const auto t0 = std::chrono::steady_clock::now();
  while (!g_stop) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    if (o.duration > 0.0 &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() >= o.duration) {
      break;
    }
  }
  g_stop = true;
  if (sim_thread.joinable()) sim_thread.join();
  if (sim_proc) sim_proc->stop();
  if (recorder_client) {
    recorder_client->close();
    const auto path = c.out_dir() / o.record;
    bridge::write_bag(recorder.finish(), path);
    fmt::print("twin: bag written to {}\n", path.string());
  }
  const auto m = server.metrics();
  server.stop();
  write_file(c.out_dir() / "session_metrics.json", m.to_json().dump(2) + "\n");
  fmt::print("twin: {} teleop, {} autonomous, {} idle commands; {} map rebuilds\n", m.teleop_commands,
             m.autonomous_commands, m.idle_commands, m.map_rebuilds);
  return 0;
}

struct ReplayOpts {
  std::string bag;
  double rate = 1.0;
  bool unpaced = false;
};

int cmd_replay(const Common& c, const ReplayOpts& o) {
  const auto bag = bridge::read_bag(o.bag);
  bridge::ReplaySummary summary;
  if (!bag.records.empty()) {
    bridge::ClientOptions opts;
    opts.host = c.host;
    opts.port = c.port_tcp;
    bridge::Client client(opts);
    summary = bridge::bag_replay(bag, {o.rate, !o.unpaced}, client.publisher());
    client.sync();
  }
  fmt::print("{}\n", nlohmann::json{{"count", summary.count}, {"duration_s", summary.duration_s}}.dump());
  return 0;
}

struct BenchOpts {
  std::size_t window = 50;
  bool control = false;
  std::string transport = "tcp";
  double timeout = 60.0;
};

int cmd_bench_latency(const Common& c, const BenchOpts& o) {
  const auto cfg = c.scenario();
  LatencyBenchConfig bc;
  bc.rates = cfg.rates;
  bc.window = o.window;
  bc.control = o.control;
  bc.host = c.host;
  bc.tcp_port = c.port_tcp;
  bc.ws_port = c.port_ws;
  bc.transport = o.transport == "ws" ? bridge::Transport::WebSocket : bridge::Transport::Tcp;
  bc.timeout = std::chrono::milliseconds(static_cast<long>(o.timeout * 1000));
  bc.seed = cfg.map_seed;

  LoadSpawner spawner;
  if (c.spawn == "procs") {
    spawner = [&](LoadRole role, std::uint16_t port) -> std::function<void()> {
      std::vector<std::string> args{"bench-load", "--role", role == LoadRole::Physical ? "physical" : "digital",
                                    "--host", c.host, "--port-tcp", std::to_string(port), "--transport", o.transport,
                                    "--seed", std::to_string(cfg.map_seed)};
      if (o.control) args.push_back("--control");
      for (auto& a : rate_args(cfg.rates)) args.push_back(a);
      auto child = std::make_shared<ChildProcess>(args);
      return [child] { child->stop(); };
    };
  }
  const auto result = run_latency_bench(bc, spawner);
  const auto csv = result.report.to_csv();
  const auto path = c.out_dir() / (o.control ? "latency_control.csv" : "latency.csv");
  write_file(path, csv);
  fmt::print("{}", csv);
  fmt::print("bench-latency: wrote {} in {:.1f} s\n", path.string(), result.wall_seconds);
  return 0;
}

struct LoadOpts {
  std::string role = "physical";
  bool control = false;
  std::string transport = "tcp";
};

int cmd_bench_load(const Common& c, const LoadOpts& o) {
  const auto cfg = c.scenario();
  bridge::ClientOptions opts;
  opts.host = c.host;
  opts.port = c.port_tcp;
  opts.transport = o.transport == "ws" ? bridge::Transport::WebSocket : bridge::Transport::Tcp;
  const auto payloads = make_bench_payloads(o.control, cfg.map_seed);
  run_bench_load(o.role == "digital" ? LoadRole::Digital : LoadRole::Physical, opts, cfg.rates, payloads, g_stop);
  return 0;
}

struct CampaignOpts {
  std::vector<std::string> classes;
  std::optional<std::size_t> trials;
  std::vector<double> budgets;
  std::string budget_mode;
  std::optional<double> iters_per_second;
  std::string planner = "rrtstar";
};

int cmd_campaign(const Common& c, const CampaignOpts& o) {
  auto cfg = c.scenario();
  auto spec = cfg.campaign;
  if (!o.classes.empty()) {
    spec.classes.clear();
    for (const auto& s : o.classes) {
      const auto cls = scenario_class_from_string(s);
      if (!cls) throw ParamError("unknown class '" + s + "'");
      spec.classes.push_back(*cls);
    }
  }
  if (o.trials) spec.trials = *o.trials;
  if (!o.budgets.empty()) spec.budgets = o.budgets;
  if (o.budget_mode == "time") spec.mode = BudgetMode::Time;
  if (o.budget_mode == "iterations") spec.mode = BudgetMode::Iterations;
  if (o.iters_per_second) spec.iterations_per_second = *o.iters_per_second;
  spec.variant = o.planner == "rrt" ? PlannerId::Rrt : PlannerId::RrtStar;

  const auto world = build_planning_world(cfg.heightmap());
  const auto result = run_campaign(world, spec);
  const auto dir = c.out_dir();
  write_file(dir / "campaign.csv", result.to_csv());

  std::ostringstream trials;
  trials << "class,budget_s,index,success,error,cost_m,iterations,elapsed_s,waypoints\n";
  std::map<std::pair<ScenarioClass, double>, int> index;
  for (const auto& t : result.trials) {
    const int i = index[{t.trial.cls, t.budget}]++;
    trials << fmt::format("{},{:g},{},{},{},{:.4f},{},{:.4f},{}\n", to_string(t.trial.cls), t.budget, i,
                          t.success ? 1 : 0, t.error, t.success ? t.path.cost : 0.0, t.iterations, t.elapsed,
                          t.path.waypoints.size());
  }
  write_file(dir / "trials.csv", trials.str());
  fmt::print("{}", result.to_csv());
  fmt::print("campaign-plan: {} trials in {:.1f} s\n", result.trials.size(), result.wall_seconds);
  return 0;
}

struct MissionOpts {
  std::string bag;
};

int cmd_mission(const Common& c, const MissionOpts& o) {
  const auto cfg = c.scenario();
  MissionConfig mc;
  mc.seed = cfg.map_seed;
  mc.sim.noise = cfg.noise;
  mc.sim.vehicle = cfg.vehicle;
  mc.sim.rates = cfg.rates;
  bridge::BagRecorder recorder;
  if (!o.bag.empty()) mc.recorder = &recorder;
  const auto r = run_mission(mc);
  if (!o.bag.empty()) bridge::write_bag(recorder.finish(), c.out_dir() / o.bag);
  nlohmann::json j = {{"arrived", r.arrived},
                      {"failure", r.failure},
                      {"goal", {r.goal.x(), r.goal.y(), r.goal.z()}},
                      {"final_position", {r.final_position.x(), r.final_position.y(), r.final_position.z()}},
                      {"final_error_m", r.final_error},
                      {"contact_events", r.contact_events},
                      {"sim_time_s", r.sim_time},
                      {"wall_time_s", r.wall_time},
                      {"map_rebuilds", r.map_rebuilds},
                      {"octree_voxels", r.octree_voxels},
                      {"path_cost_m", r.path.cost},
                      {"path_waypoints", r.path.waypoints.size()},
                      {"metrics", r.metrics.to_json()}};
  write_file(c.out_dir() / "mission.json", j.dump(2) + "\n");
  fmt::print("mission: arrived={} error={:.3f} m contacts={} sim={:.1f} s wall={:.1f} s\n", r.arrived, r.final_error,
             r.contact_events, r.sim_time, r.wall_time);
  return r.arrived && r.contact_events == 0 ? 0 : 1;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::string markdown_table(const std::vector<std::vector<std::string>>& rows) {
  if (rows.empty()) return "";
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& r) {
    os << "|";
    for (const auto& c : r) os << ' ' << c << " |";
    os << '\n';
  };
  line(rows.front());
  os << "|";
  for (std::size_t i = 0; i < rows.front().size(); ++i) os << "---|";
  os << '\n';
  for (std::size_t i = 1; i < rows.size(); ++i) line(rows[i]);
  return os.str();
}

int cmd_report(const Common& c) {
  const fs::path dir(c.out);
  if (!fs::is_directory(dir)) throw ParamError("no such directory " + dir.string());
  std::ostringstream md;
  md << "# uwtwin report\n\n";
  bool any = false;
  const std::pair<const char*, const char*> sections[] = {
      {"latency.csv", "Message delay by type"},
      {"latency_control.csv", "Message delay, equal payload sizes"},
      {"campaign.csv", "Planning campaign"},
  };
  for (const auto& [file, title] : sections) {
    if (!fs::exists(dir / file)) continue;
    any = true;
    md << "## " << title << "\n\n" << markdown_table(read_csv(dir / file)) << '\n';
  }
  if (fs::exists(dir / "mission.json")) {
    any = true;
    std::ifstream in(dir / "mission.json");
    const auto j = nlohmann::json::parse(in);
    md << "## Autonomous mission\n\n"
       << fmt::format("- arrived: {}\n- final error: {:.3f} m\n- ground contacts: {}\n- simulated time: {:.1f} s\n\n",
                      j.value("arrived", false), j.value("final_error_m", 0.0), j.value("contact_events", 0),
                      j.value("sim_time_s", 0.0));
  }
  if (!any) throw ParamError("no CSV or mission artifacts in " + dir.string());
  write_file(dir / "report.md", md.str());
  fmt::print("{}", md.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  CLI::App app{"uwtwin: underwater ROV digital twin"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--config", common.config_path, "scenario config (JSON)")->check(CLI::ExistingFile);
  app.add_option("--out", common.out, "artifact directory");
  app.add_option("--seed", common.seed, "seed for the map, noise and campaign");
  app.add_option("--spawn", common.spawn, "run components as threads or processes")
      ->check(CLI::IsMember({"threads", "procs"}));
  add_net_flags(&app, common);
  add_rate_flags(&app, common);
  app.fallthrough();

  auto* gen = app.add_subcommand("gen-map", "write a generated harbor heightmap");

  SimOpts sim_opts;
  auto* sim = app.add_subcommand("sim", "run the vehicle simulator against a broker");
  sim->add_option("--duration", sim_opts.duration, "seconds to run (0 = until interrupted)");
  sim->add_flag("--no-images", sim_opts.no_images, "do not publish camera frames");
  sim->add_option("--start", sim_opts.start, "start position x y z")->expected(3);

  TwinOpts twin_opts;
  auto* twin = app.add_subcommand("twin", "run the broker, twin server and UI gateway");
  twin->add_option("--duration", twin_opts.duration, "seconds to run (0 = until interrupted)");
  twin->add_option("--port-http", twin_opts.port_http, "HTTP port for the UI");
  twin->add_option("--static", twin_opts.static_dir, "directory served over HTTP");
  twin->add_flag("--with-sim", twin_opts.with_sim, "also run the simulator");
  twin->add_flag("--no-images", twin_opts.sim.no_images, "simulator does not publish camera frames");
  twin->add_option("--record", twin_opts.record, "bag file name (under --out) to record sensor traffic into");

  ReplayOpts replay_opts;
  auto* replay = app.add_subcommand("replay", "republish a bag to a broker");
  replay->add_option("--bag", replay_opts.bag, "bag file")->required()->check(CLI::ExistingFile);
  replay->add_option("--rate", replay_opts.rate, "speed multiplier")->check(CLI::PositiveNumber);
  replay->add_flag("--unpaced", replay_opts.unpaced, "publish back-to-back");

  BenchOpts bench_opts;
  auto* bench = app.add_subcommand("bench-latency", "measure per-type delivery delay");
  bench->add_option("--window", bench_opts.window, "samples per type")->check(CLI::PositiveNumber);
  bench->add_flag("--control", bench_opts.control, "equal ~100-byte payloads for every type");
  bench->add_option("--transport", bench_opts.transport)->check(CLI::IsMember({"tcp", "ws"}));
  bench->add_option("--timeout", bench_opts.timeout, "seconds to wait for traffic")->check(CLI::PositiveNumber);

  LoadOpts load_opts;
  auto* load = app.add_subcommand("bench-load", "publisher process for bench-latency --spawn=procs");
  load->group("");
  load->add_option("--role", load_opts.role)->check(CLI::IsMember({"physical", "digital"}));
  load->add_flag("--control", load_opts.control);
  load->add_option("--transport", load_opts.transport)->check(CLI::IsMember({"tcp", "ws"}));

  CampaignOpts camp_opts;
  auto* camp = app.add_subcommand("campaign-plan", "run the three-class planning campaign");
  camp->add_option("--class", camp_opts.classes, "SIMPLE, COLLISION_PRONE or NEAR_FLOOR (repeatable)")
      ->check(CLI::IsMember({"SIMPLE", "COLLISION_PRONE", "NEAR_FLOOR"}));
  camp->add_option("--trials", camp_opts.trials, "trials per class")->check(CLI::PositiveNumber);
  camp->add_option("--budget", camp_opts.budgets, "time budgets in seconds (repeatable)")
      ->check(CLI::PositiveNumber);
  camp->add_option("--budget-mode", camp_opts.budget_mode, "time or iterations")
      ->check(CLI::IsMember({"time", "iterations"}));
  camp->add_option("--iters-per-second", camp_opts.iters_per_second, "iteration rate for --budget-mode=iterations")
      ->check(CLI::PositiveNumber);
  camp->add_option("--planner", camp_opts.planner)->check(CLI::IsMember({"rrt", "rrtstar"}));

  MissionOpts mission_opts;
  auto* mission = app.add_subcommand("mission", "headless survey, map, plan and follow run");
  mission->add_option("--bag", mission_opts.bag, "bag file name (under --out) to record the run into");

  auto* report = app.add_subcommand("report", "render the CSV artifacts under --out to markdown");

  for (auto* sub : {gen, sim, twin, replay, bench, load, camp, mission, report}) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*gen) return cmd_gen_map(common);
    if (*sim) return cmd_sim(common, sim_opts);
    if (*twin) return cmd_twin(common, twin_opts);
    if (*replay) return cmd_replay(common, replay_opts);
    if (*bench) return cmd_bench_latency(common, bench_opts);
    if (*load) return cmd_bench_load(common, load_opts);
    if (*camp) return cmd_campaign(common, camp_opts);
    if (*mission) return cmd_mission(common, mission_opts);
    if (*report) return cmd_report(common);
  } catch (const bridge::BindError& e) {
    fmt::print(stderr, "error: BindError: {}\n", e.what());
    return 3;
  } catch (const ParamError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 4;
  }
  return 0;
}
