// SPDX-License-Identifier: Apache-2.0
//
// panocoach: session server, log replay, formation planning, deviation
// reports and the network simulator.
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "panocoach/error.hpp"
#include "panocoach/files.hpp"
#include "panocoach/netsim.hpp"
#include "panocoach/replay.hpp"
#include "panocoach/server.hpp"
#include "panocoach/session_log.hpp"
#include "panocoach/transition.hpp"
#include "panocoach/ws_server.hpp"

using namespace panocoach;

namespace {

// Long-running commands log at info by default, batch commands at warn.
void configure_logging(spdlog::level::level_enum fallback) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("panocoach"));
  spdlog::set_level(fallback);
  const char* level = std::getenv("PANOCOACH_LOG_LEVEL");
  if (level == nullptr) return;
  const std::string name(level);
  if (name == "error") spdlog::set_level(spdlog::level::err);
  else if (name == "warn") spdlog::set_level(spdlog::level::warn);
  else if (name == "info") spdlog::set_level(spdlog::level::info);
  else if (name == "debug") spdlog::set_level(spdlog::level::debug);
  else spdlog::warn("PANOCOACH_LOG_LEVEL={} not one of error|warn|info|debug", name);
}

PitchSpec parse_pitch(const std::string& text) {
  const auto x = text.find('x');
  PitchSpec pitch;
  try {
    if (x == std::string::npos) throw std::invalid_argument(text);
    pitch.length_m = std::stod(text.substr(0, x));
    pitch.width_m = std::stod(text.substr(x + 1));
  } catch (const std::exception&) {
    throw Error(Errc::InvalidArgument, "pitch must look like 105x68, got '" + text + "'");
  }
  if (!is_valid(pitch)) throw Error(Errc::InvalidArgument, "pitch dimensions must be positive");
  return pitch;
}

SessionLog load_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::InvalidArgument, "cannot open " + path);
  return read_session_log(in);
}

struct ServerArgs {
  std::uint16_t port = 8080;
  std::string pitch = "105x68";
  std::string record;
  int tick = 30;
  double vmax = 8.0;
  std::size_t nmax = 5;
  double dref = 15.0;
};

int run_server(const ServerArgs& a) {
  ServerConfig config;
  config.port = a.port;
  config.pitch = parse_pitch(a.pitch);
  if (!a.record.empty()) config.record_path = a.record;
  config.tick_hz = a.tick;
  config.v_max_mps = a.vmax;
  config.n_max = a.nmax;
  config.d_ref_m = a.dref;
  validate(config);
  WsServer ws(config.port, config.tick_hz);
  SessionServer server(config, ws.transport());
  spdlog::info("session server on port {} ({}x{} m, {} Hz)", ws.port(), config.pitch.length_m, config.pitch.width_m,
               config.tick_hz);
  ws.run(server, debug_endpoints(server), true);
  return 0;
}

struct ReplayArgs {
  std::string log;
  bool verify = false;
  bool serve = false;
  std::uint16_t port = 8081;
  double rate = 1.0;
};

int run_replay(const ReplayArgs& a) {
  if (a.verify == a.serve) throw Error(Errc::InvalidArgument, "choose exactly one of --verify and --serve");
  if (a.verify) {
    std::ifstream in(a.log);
    if (!in) throw Error(Errc::InvalidArgument, "cannot open " + a.log);
    std::cout << replay_verify(in) << '\n';
    return 0;
  }
  WsServer ws(a.port, 30);
  ReplayHost host(load_log(a.log), a.rate, ws.transport());
  spdlog::info("replaying {} ({} records) on port {} at {}x", a.log, host.log().records.size(), ws.port(), a.rate);
  ws.run(
      host,
      [&host](std::string_view target, std::int64_t) -> std::optional<HttpReply> {
        if (target != "/debug/scene") return std::nullopt;
        return HttpReply{200, scene_to_json(host.scene()).dump(), "application/json"};
      },
      true);
  return 0;
}

struct PlanArgs {
  std::string from;
  std::string to;
  double vmax = 8.0;
  double rmin = 1.0;
  std::string out;
};

int run_plan(const PlanArgs& a) {
  const Formation from = formation_from_json(read_json_file(a.from));
  const Formation to = formation_from_json(read_json_file(a.to));
  const TacticSequence seq = generate_transition(from, to, a.vmax, a.rmin, from.pitch);
  for (const auto& w : seq.warnings) spdlog::warn("{}", w);
  const std::string text = sequence_file_to_json(seq, from.pitch).dump(2) + "\n";
  if (a.out.empty() || a.out == "-") {
    std::cout << text;
  } else {
    write_text_file(a.out, text);
    spdlog::info("wrote {} tracks, {} ms, to {}", seq.tracks.size(), seq.duration_ms(), a.out);
  }
  return 0;
}

struct DeviateArgs {
  std::string planned;
  std::string actual;
  std::string entity;
  double tau = 2.0;
  std::optional<std::int64_t> offset_ms;
};

int run_deviate(const DeviateArgs& a) {
  const SessionLog log = load_log(a.actual);
  const TacticSequence seq = sequence_file_from_json(read_json_file(a.planned), log.header.pitch);
  const auto track = seq.tracks.find(a.entity);
  if (track == seq.tracks.end()) throw Error(Errc::UnknownEntity, "no planned track for " + a.entity);
  const SessionMs offset = a.offset_ms.value_or(first_playback_start(log).value_or(0));
  std::vector<TimedSample> actual;
  for (auto s : entity_samples(log, a.entity)) {
    if (s.t_ms < static_cast<double>(offset)) continue;
    s.t_ms -= static_cast<double>(offset);
    actual.push_back(s);
  }
  const DeviationReport r = path_deviation(a.entity, track->second, actual, a.tau);
  const Json out = {{"entity_id", r.entity_id},     {"mean_m", r.mean_m},
                    {"max_m", r.max_m},             {"rms_m", r.rms_m},
                    {"on_plan_fraction", r.on_plan_fraction}, {"sample_count", r.sample_count},
                    {"tau_m", a.tau},               {"offset_ms", offset}};
  std::cout << out.dump(2) << '\n';
  return 0;
}

struct SimArgs {
  std::size_t clients = 8;
  double latency = 0.0;
  double jitter = 0.0;
  double loss = 0.0;
  std::uint64_t seed = 42;
  std::string script;
  std::size_t commands = 100;
  std::int64_t timeout = 30000;
  int tick = 30;
  std::string record;
  std::string write_script_to;
};

int run_sim(const SimArgs& a) {
  Script script;
  if (!a.script.empty()) {
    std::ifstream in(a.script);
    if (!in) throw Error(Errc::InvalidArgument, "cannot open " + a.script);
    script = read_script(in);
  } else {
    script = make_drill_script(a.seed, a.commands);
  }
  if (!a.write_script_to.empty()) {
    std::ofstream out(a.write_script_to);
    write_script(out, script);
  }
  SimOptions options;
  options.tick_hz = a.tick;
  std::ofstream record;
  if (!a.record.empty()) {
    record.open(a.record);
    if (!record) throw Error(Errc::LogWriteFailure, "cannot open " + a.record);
    options.log = &record;
  }
  const auto report = run_scenario(LinkModel{a.latency, a.jitter, a.loss, a.seed}, a.clients, script, a.timeout, options);
  std::cout << report_to_json(report).dump(2) << '\n';
  return report.converged ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tactical coaching session engine"};
  app.require_subcommand(1);

  ServerArgs server;
  auto* s = app.add_subcommand("server", "Run a live session server");
  s->add_option("--port", server.port, "TCP port")->capture_default_str();
  s->add_option("--pitch", server.pitch, "Pitch size LENGTHxWIDTH in meters")->capture_default_str();
  s->add_option("--record", server.record, "Append the session log to this file");
  s->add_option("--tick", server.tick, "Broadcast rate in Hz (1-120)")->capture_default_str();
  s->add_option("--vmax", server.vmax, "Avatar speed limit, m/s")->capture_default_str();
  s->add_option("--nmax", server.nmax, "Annotations per first-person view")->capture_default_str();
  s->add_option("--dref", server.dref, "Billboard reference distance, m")->capture_default_str();

  ReplayArgs replay;
  auto* r = app.add_subcommand("replay", "Verify or serve a recorded session log");
  r->add_option("--log", replay.log, "Session log")->required();
  r->add_flag("--verify", replay.verify, "Apply every record and print the final scene hash");
  r->add_flag("--serve", replay.serve, "Host a read-only session replaying the log");
  r->add_option("--port", replay.port, "TCP port for --serve")->capture_default_str();
  r->add_option("--rate", replay.rate, "Playback rate for --serve")->capture_default_str();

  PlanArgs plan;
  auto* p = app.add_subcommand("plan", "Generate a formation transition sequence");
  p->add_option("--from", plan.from, "Starting formation file")->required();
  p->add_option("--to", plan.to, "Target formation file")->required();
  p->add_option("--vmax", plan.vmax, "Speed limit, m/s")->capture_default_str();
  p->add_option("--rmin", plan.rmin, "Minimum clearance between moving players, m")->capture_default_str();
  p->add_option("-o,--output", plan.out, "Sequence file to write (stdout when omitted)");

  DeviateArgs dev;
  auto* d = app.add_subcommand("deviate", "Compare a recorded path with the planned track");
  d->add_option("--planned", dev.planned, "Sequence file")->required();
  d->add_option("--actual", dev.actual, "Session log")->required();
  d->add_option("--entity", dev.entity, "Entity id")->required();
  d->add_option("--tau", dev.tau, "On-plan tolerance, m")->capture_default_str();
  d->add_option("--offset-ms", dev.offset_ms, "Session time of sequence t=0 (default: first playback start)");

  SimArgs sim;
  auto* m = app.add_subcommand("sim", "Run a scripted session over simulated links");
  m->add_option("--clients", sim.clients, "Observer clients besides the coach")->capture_default_str();
  m->add_option("--latency-ms", sim.latency, "Mean one-way latency")->capture_default_str();
  m->add_option("--jitter-ms", sim.jitter, "Latency standard deviation")->capture_default_str();
  m->add_option("--loss", sim.loss, "Per-frame loss probability")->capture_default_str();
  m->add_option("--seed", sim.seed, "Link (and generated script) seed")->capture_default_str();
  m->add_option("--script", sim.script, "Script file; a drill is generated when omitted");
  m->add_option("--commands", sim.commands, "Length of the generated drill")->capture_default_str();
  m->add_option("--timeout-ms", sim.timeout, "Simulated time allowed after the last command")->capture_default_str();
  m->add_option("--tick", sim.tick, "Server tick rate in Hz")->capture_default_str();
  m->add_option("--record", sim.record, "Write the server's session log here");
  m->add_option("--write-script", sim.write_script_to, "Save the script that was run");

  CLI11_PARSE(app, argc, argv);
  configure_logging(*s || (*r && replay.serve) ? spdlog::level::info : spdlog::level::warn);
  try {
    if (*s) return run_server(server);
    if (*r) return run_replay(replay);
    if (*p) return run_plan(plan);
    if (*d) return run_deviate(dev);
    if (*m) return run_sim(sim);
  } catch (const CorruptLogError& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 1;
}
