#pragma once

#include <array>
#include <memory>
#include <ostream>
#include <vector>

#include "antmesh/config.hpp"
#include "antmesh/engine.hpp"
#include "antmesh/metrics.hpp"
#include "antmesh/mobility.hpp"
#include "antmesh/net.hpp"
#include "antmesh/routing.hpp"
#include "antmesh/workload.hpp"

namespace antmesh {

struct RunOptions {
  std::ostream* packet_trace = nullptr;
  std::ostream* mobility_trace = nullptr;
  Seconds audit_interval = 5.0;  // 0 disables periodic audits
  Seconds connectivity_interval = 1.0;
};

struct RunResult {
  SummaryStats stats;  // finalized: leftovers counted as InFlightAtEnd
  double mean_connectivity = 0.0;
  std::array<LinkCounters, kPacketKinds> link{};
  std::uint64_t events = 0;
  std::uint64_t digest = 0;
  std::uint64_t audits = 0;
  std::uint64_t audit_failures = 0;

  const LinkCounters& counters(PacketKind k) const { return link[static_cast<std::size_t>(k)]; }
};

/// Builds the routing protocol selected by `cfg`.
inline std::unique_ptr<RoutingProtocol> make_protocol(const ScenarioConfig& cfg, ProtocolContext ctx) {
  switch (cfg.protocol) {
    case ProtocolKind::Aodv: return std::make_unique<Aodv>(std::move(ctx), cfg.routing, cfg.aodv);
    case ProtocolKind::AntAodv:
      return std::make_unique<AntAodv>(std::move(ctx), cfg.routing, cfg.aodv, cfg.antaodv);
    case ProtocolKind::AntNet: return std::make_unique<AntNet>(std::move(ctx), cfg.routing, cfg.antnet);
    case ProtocolKind::AntHocNet:
      return std::make_unique<AntHocNet>(std::move(ctx), cfg.routing, cfg.anthocnet,
                                         cfg.traffic.packet_bytes * 8u);
    case ProtocolKind::Ara: return std::make_unique<Ara>(std::move(ctx), cfg.routing, cfg.ara);
    case ProtocolKind::Paconet: return std::make_unique<Paconet>(std::move(ctx), cfg.routing, cfg.paconet);
  }
  throw InvalidConfig("unknown protocol");
}

/// One complete, deterministic run of a scenario. The object stays alive
/// after run() so that tests can inspect protocol and network state.
class Simulation {
 public:
  explicit Simulation(const ScenarioConfig& cfg, RunOptions opts = {})
      : cfg_(cfg), opts_(opts), engine_(cfg.seed) {
    cfg_.validate();
    if (cfg_.model == MobilityModel::Static) {
      mobility_ = std::make_unique<Mobility>(engine_, cfg_.positions);
    } else {
      mobility_ = std::make_unique<Mobility>(engine_, cfg_.nodes, cfg_.mobility);
    }
    net_ = std::make_unique<Network>(engine_, *mobility_, cfg_.radio);
    protocol_ = make_protocol(cfg_, ProtocolContext{engine_, LinkLayer(*net_), ledger_});
    net_->attach(protocol_.get());
    sessions_ = build_sessions(cfg_.traffic, cfg_.nodes, cfg_.sim_time, engine_.stream("traffic"));
    std::vector<NodeId> dests;
    for (const auto& s : sessions_) dests.push_back(s.dst);
    protocol_->set_session_destinations(std::move(dests));
  }

  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  RunResult run() {
    if (ran_) throw std::logic_error("Simulation::run called twice");
    ran_ = true;
    mobility_->set_trace(opts_.mobility_trace);
    net_->set_trace(opts_.packet_trace);
    mobility_->start();
    protocol_->start();
    for (std::size_t i = 0; i < sessions_.size(); ++i) schedule_emission(i, 0);
    if (opts_.connectivity_interval > 0.0)
      engine_.schedule_in(opts_.connectivity_interval, EventKind::Timer, [this] { sample_connectivity(); });
    if (opts_.audit_interval > 0.0)
      engine_.schedule_in(opts_.audit_interval, EventKind::Timer, [this] { periodic_audit(); });
    engine_.run_until(cfg_.sim_time);
    audit();

    RunResult r;
    r.stats = ledger_.finalize();
    r.mean_connectivity = conn_samples_ ? conn_sum_ / static_cast<double>(conn_samples_) : 0.0;
    for (auto k : kAllPacketKinds) r.link[static_cast<std::size_t>(k)] = net_->counters(k);
    r.events = engine_.processed();
    r.digest = engine_.digest();
    r.audits = audits_;
    r.audit_failures = audit_failures_;
    return r;
  }

  /// sent == delivered + dropped + in the network + held by the protocol,
  /// and every per-kind link counter balances.
  bool audit() {
    ++audits_;
    const bool ok = conserved() &&
                    std::all_of(kAllPacketKinds.begin(), kAllPacketKinds.end(),
                                [this](PacketKind k) { return net_->counters(k).balanced(); });
    if (!ok) ++audit_failures_;
    return ok;
  }

  bool conserved() const {
    return ledger_.sent() == ledger_.delivered() + ledger_.dropped_total() +
                                 net_->data_in_system() + protocol_->held_data_packets();
  }

  const ScenarioConfig& config() const noexcept { return cfg_; }
  Engine& engine() noexcept { return engine_; }
  Mobility& mobility() noexcept { return *mobility_; }
  Network& network() noexcept { return *net_; }
  RoutingProtocol& protocol() noexcept { return *protocol_; }
  const PacketLedger& ledger() const noexcept { return ledger_; }
  const std::vector<CbrSession>& sessions() const noexcept { return sessions_; }

 private:
  void schedule_emission(std::size_t i, std::uint64_t k) {
    const auto& s = sessions_[i];
    if (k >= s.emission_count()) return;
    const Seconds t = s.emission_time(k);
    if (t > cfg_.sim_time) return;
    engine_.schedule(t, EventKind::TrafficTick, [this, i, k] {
      emit(i);
      schedule_emission(i, k + 1);
    });
  }

  void emit(std::size_t i) {
    const auto& s = sessions_[i];
    Packet p;
    p.kind = PacketKind::Data;
    p.src = s.src;
    p.dst = s.dst;
    p.size_bits = s.packet_bits;
    p.created_at = engine_.now();
    p.uid = net_->new_uid();
    ledger_.record_sent(p.uid, p.created_at);
    protocol_->on_data_to_send(s.src, std::move(p));
  }

  void sample_connectivity() {
    engine_.schedule_in(opts_.connectivity_interval, EventKind::Timer, [this] { sample_connectivity(); });
    double sum = 0.0;
    for (NodeId i = 0; i < cfg_.nodes; ++i) sum += static_cast<double>(protocol_->connectivity(i));
    conn_sum_ += sum / static_cast<double>(cfg_.nodes);
    ++conn_samples_;
  }

  void periodic_audit() {
    engine_.schedule_in(opts_.audit_interval, EventKind::Timer, [this] { periodic_audit(); });
    audit();
  }

  ScenarioConfig cfg_;
  RunOptions opts_;
  Engine engine_;
  std::unique_ptr<Mobility> mobility_;
  std::unique_ptr<Network> net_;
  PacketLedger ledger_;
  std::unique_ptr<RoutingProtocol> protocol_;
  std::vector<CbrSession> sessions_;
  bool ran_ = false;
  double conn_sum_ = 0.0;
  std::uint64_t conn_samples_ = 0;
  std::uint64_t audits_ = 0;
  std::uint64_t audit_failures_ = 0;
};

/// Convenience: build and run.
inline RunResult run_scenario(const ScenarioConfig& cfg, RunOptions opts = {}) {
  Simulation sim(cfg, opts);
  return sim.run();
}

}  // namespace antmesh
