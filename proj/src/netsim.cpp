// SPDX-License-Identifier: Apache-2.0
#include "panocoach/netsim.hpp"

#include <cmath>
#include <numbers>
#include <queue>
#include <set>

#include "panocoach/canonical.hpp"
#include "panocoach/client.hpp"
#include "panocoach/error.hpp"

namespace panocoach {

double SimRng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double SimRng::normal() {
  if (spare_) {
    const double z = *spare_;
    spare_.reset();
    return z;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

void validate(const LinkModel& link) {
  if (!(link.latency_mean_ms >= 0.0) || !std::isfinite(link.latency_mean_ms))
    throw Error(Errc::InvalidArgument, "latency must be >= 0");
  if (!(link.latency_jitter_ms >= 0.0) || !std::isfinite(link.latency_jitter_ms))
    throw Error(Errc::InvalidArgument, "jitter must be >= 0");
  if (!(link.loss_prob >= 0.0 && link.loss_prob <= 1.0)) throw Error(Errc::InvalidArgument, "loss must be in [0, 1]");
}

Json report_to_json(const ConvergenceReport& r) {
  Json j = {{"converged", r.converged},
            {"last_command_ms", r.last_command_ms},
            {"server_hash", r.server_hash},
            {"server_seq", r.server_seq},
            {"client_hashes", r.client_hashes},
            {"messages_sent", r.messages_sent},
            {"messages_dropped", r.messages_dropped},
            {"sent_to_clients", r.sent_to_clients},
            {"dropped_to_clients", r.dropped_to_clients},
            {"snapshots_requested", r.snapshots_requested},
            {"rejects", r.rejects}};
  j["time_to_converge_ms"] = r.time_to_converge_ms ? Json(*r.time_to_converge_ms) : Json(nullptr);
  return j;
}

namespace {

bool is_command_frame(const std::string& frame) {
  // Sorted keys put "kind" first in every body.
  static const std::string prefix = R"({"kind":"Command")";
  return frame.compare(kFrameHeaderBytes, prefix.size(), prefix) == 0;
}

struct Event {
  enum class Type { ToServer, ToClient, ClientTick, ServerTick, Script };
  std::int64_t t = 0;
  std::uint64_t order = 0;
  Type type = Type::ClientTick;
  std::size_t index = 0;  // client index or script index
  std::string frame;

  bool operator>(const Event& other) const { return std::tie(t, order) > std::tie(other.t, other.order); }
};

class Simulation final : public Transport {
 public:
  Simulation(const LinkModel& link, std::size_t n_clients, const Script& script, const SimOptions& options)
      : link_(link), script_(script), options_(options), rng_(link.seed) {
    ServerConfig config;
    config.pitch = options.pitch;
    config.tick_hz = options.tick_hz;
    server_ = std::make_unique<SessionServer>(config, *this, options.log);
    for (std::size_t i = 0; i <= n_clients; ++i) {
      const Role::Kind kind = i == 0 ? Role::Kind::Coach : Role::Kind::Observer;
      clients_.push_back(std::make_unique<SessionClient>(kind, std::nullopt, [this, i](std::string frame) {
        to_server(i, std::move(frame));
      }));
    }
  }

  ConvergenceReport run(std::int64_t timeout_ms) {
    report_.last_command_ms = script_.back().t_ms;
    const std::int64_t deadline = report_.last_command_ms + timeout_ms;
    for (std::size_t i = 0; i < clients_.size(); ++i) {
      server_->connected(i + 1, 0);
      clients_[i]->start(0);
    }
    for (std::size_t i = 0; i < script_.size(); ++i) push(Event{script_[i].t_ms, 0, Event::Type::Script, i, {}});
    push(Event{server_tick_time(1), 0, Event::Type::ServerTick, 1, {}});
    push(Event{options_.client_tick_ms, 0, Event::Type::ClientTick, 0, {}});

    while (!queue_.empty()) {
      const std::int64_t t = queue_.top().t;
      if (t > deadline) break;
      while (!queue_.empty() && queue_.top().t == t) {
        Event ev = queue_.top();
        queue_.pop();
        dispatch(ev);
      }
      if (scripted_ == script_.size() && t >= report_.last_command_ms && converged()) {
        report_.converged = true;
        report_.time_to_converge_ms = t - report_.last_command_ms;
        break;
      }
    }
    report_.server_hash = server_hash();
    report_.server_seq = server_->scene().version;
    for (const auto& c : clients_) {
      report_.client_hashes.push_back(c->hash());
      report_.snapshots_requested += c->stats().snapshots_requested;
    }
    report_.rejects = clients_[0]->rejects().size();
    return report_;
  }

  void send(ConnId conn, std::string frame) override {
    ++report_.sent_to_clients;
    const auto delay = sample_link();
    if (!delay) {
      ++report_.dropped_to_clients;
      return;
    }
    push(Event{now_ + *delay, 0, Event::Type::ToClient, static_cast<std::size_t>(conn - 1), std::move(frame)});
  }

  void close(ConnId conn) override { closed_.insert(conn); }

 private:
  std::optional<std::int64_t> sample_link() {
    ++report_.messages_sent;
    if (rng_.uniform() < link_.loss_prob) {
      ++report_.messages_dropped;
      return std::nullopt;
    }
    const double z = rng_.normal();
    return static_cast<std::int64_t>(std::llround(std::max(0.0, link_.latency_mean_ms + link_.latency_jitter_ms * z)));
  }

  void to_server(std::size_t client, std::string frame) {
    const auto delay = sample_link();
    if (!delay) return;
    if (is_command_frame(frame)) ++commands_in_flight_;
    push(Event{now_ + *delay, 0, Event::Type::ToServer, client, std::move(frame)});
  }

  void push(Event ev) {
    ev.order = next_order_++;
    queue_.push(std::move(ev));
  }

  std::int64_t server_tick_time(std::int64_t k) const { return k * 1000 / options_.tick_hz; }

  void dispatch(const Event& ev) {
    now_ = ev.t;
    switch (ev.type) {
      case Event::Type::ToServer:
        if (is_command_frame(ev.frame)) --commands_in_flight_;
        if (!closed_.contains(ev.index + 1)) server_->received(ev.index + 1, ev.frame, now_);
        break;
      case Event::Type::ToClient:
        if (!closed_.contains(ev.index + 1)) clients_[ev.index]->received(ev.frame, now_);
        break;
      case Event::Type::ClientTick:
        for (auto& c : clients_) c->tick(now_);
        push(Event{now_ + options_.client_tick_ms, 0, Event::Type::ClientTick, 0, {}});
        break;
      case Event::Type::ServerTick:
        server_->tick(now_);
        push(Event{server_tick_time(static_cast<std::int64_t>(ev.index) + 1), 0, Event::Type::ServerTick, ev.index + 1, {}});
        break;
      case Event::Type::Script:
        clients_[0]->submit(script_[ev.index].body, now_);
        ++scripted_;
        break;
    }
  }

  const std::string& server_hash() {
    if (!server_hash_ || server_hash_->first != server_->scene().version) {
      server_hash_.emplace(server_->scene().version, scene_hash(server_->scene()));
    }
    return server_hash_->second;
  }

  bool converged() {
    if (clients_[0]->queued_commands() != 0 || commands_in_flight_ != 0 || !server_->quiescent()) return false;
    const Seq version = server_->scene().version;
    for (const auto& c : clients_) {
      if (!c->welcomed() || c->version() != version) return false;
    }
    const std::string& want = server_hash();
    for (const auto& c : clients_) {
      if (c->hash() != want) return false;
    }
    return true;
  }

  LinkModel link_;
  const Script& script_;
  SimOptions options_;
  SimRng rng_;
  std::unique_ptr<SessionServer> server_;
  std::vector<std::unique_ptr<SessionClient>> clients_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  std::uint64_t next_order_ = 0;
  std::int64_t now_ = 0;
  std::size_t scripted_ = 0;
  std::size_t commands_in_flight_ = 0;
  std::set<ConnId> closed_;
  std::optional<std::pair<Seq, std::string>> server_hash_;
  ConvergenceReport report_;
};

}  // namespace

ConvergenceReport run_scenario(const LinkModel& link, std::size_t n_clients, const Script& script,
                               std::int64_t timeout_ms, const SimOptions& options) {
  validate(link);
  if (script.empty()) throw Error(Errc::InvalidArgument, "script must not be empty");
  if (n_clients < 1) throw Error(Errc::InvalidArgument, "need at least one client");
  if (timeout_ms < 0) throw Error(Errc::InvalidArgument, "timeout must be >= 0");
  if (options.client_tick_ms < 1) throw Error(Errc::InvalidArgument, "client tick must be >= 1 ms");
  for (std::size_t i = 1; i < script.size(); ++i) {
    if (script[i].t_ms < script[i - 1].t_ms) throw Error(Errc::InvalidArgument, "script times must not decrease");
  }
  Simulation sim(link, n_clients, script, options);
  return sim.run(timeout_ms);
}

}  // namespace panocoach
