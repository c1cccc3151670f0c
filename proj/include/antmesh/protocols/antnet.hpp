#pragma once

#include <deque>
#include <map>
#include <optional>
#include <vector>

#include "antmesh/routing.hpp"

namespace antmesh {

struct AntNetParams {
  Seconds delta_t = 0.5;    // FANT launch interval per node
  double alpha = 0.3;       // weight of the queue heuristic
  double r = 0.1;           // reinforcement factor
  std::uint32_t max_life = 0;  // hop budget; 0 means 2 x node count
  Seconds flow_window = 10.0;
  Seconds no_route_hold = 5.0;  // how long data waits for a pheromone row

  void validate() const {
    if (!(delta_t > 0.0)) throw InvalidConfig("antnet.delta_t must be > 0");
    if (!(alpha >= 0.0)) throw InvalidConfig("antnet.alpha must be >= 0");
    if (!(r > 0.0 && r < 1.0)) throw InvalidConfig("antnet.r must be in (0,1)");
    if (!(flow_window > 0.0)) throw InvalidConfig("antnet.flow_window must be > 0");
  }
};

namespace antnet {

/// Probability of launching a FANT towards each destination, proportional to
/// the locally observed data flow. When no flow has been seen the choice is
/// uniform over `fallback`.
inline Weights dest_distribution(const std::map<NodeId, double>& flows,
                                 const std::vector<NodeId>& fallback) {
  Weights out;
  double total = 0.0;
  for (const auto& [d, f] : flows) total += f;
  if (total > 0.0) {
    for (const auto& [d, f] : flows)
      if (f > 0.0) out.emplace_back(d, f / total);
    return out;
  }
  for (NodeId d : fallback) out.emplace_back(d, 1.0 / static_cast<double>(fallback.size()));
  return out;
}

/// Queue heuristic over a candidate set: eta_j = 1 - q_j / sum(q). With all
/// queues empty every candidate gets the symmetric limit 1 - 1/|N|.
inline Weights heuristic_eta(const Weights& queue_bits) {
  Weights out;
  out.reserve(queue_bits.size());
  double total = 0.0;
  for (const auto& [j, q] : queue_bits) total += q;
  const double k = static_cast<double>(queue_bits.size());
  for (const auto& [j, q] : queue_bits)
    out.emplace_back(j, total > 0.0 ? 1.0 - q / total : 1.0 - 1.0 / k);
  return out;
}

/// Next-hop distribution for a FANT over the candidate set:
///   P_j = (tau_j + alpha * eta_j) / (1 + alpha * (|N'| - 1))
/// where tau is the destination row renormalized over the candidates
/// (uniform if it has no mass there).
inline Weights fant_hop_distribution(const PheromoneRow& row, const Weights& candidate_queues,
                                     double alpha) {
  const auto eta = heuristic_eta(candidate_queues);
  double tau_sum = 0.0;
  for (const auto& [j, q] : candidate_queues) tau_sum += row.get(j);
  const double k = static_cast<double>(candidate_queues.size());
  const double denom = 1.0 + alpha * (k - 1.0);
  Weights out;
  out.reserve(candidate_queues.size());
  for (std::size_t i = 0; i < candidate_queues.size(); ++i) {
    const NodeId j = candidate_queues[i].first;
    const double tau = tau_sum > 0.0 ? row.get(j) / tau_sum : 1.0 / k;
    out.emplace_back(j, (tau + alpha * eta[i].second) / denom);
  }
  return out;
}

/// Backward-ant update: the chosen hop gains r(1 - tau), every other entry
/// loses a fraction r. Sum-preserving for a stochastic row.
inline void bant_reinforce(PheromoneRow& row, NodeId chosen, double r) {
  if (!(r > 0.0 && r < 1.0)) throw InvalidRange("reinforcement factor must be in (0,1)");
  if (!row.contains(chosen)) row.set(chosen, 0.0);
  for (auto& [j, tau] : row.entries()) tau = (j == chosen) ? tau + r * (1.0 - tau) : tau * (1.0 - r);
}

}  // namespace antnet

/// Proactive AntNet: every node periodically launches forward ants towards
/// destinations drawn from its traffic mix; backward ants retrace the path
/// on the control queues and reinforce the row-stochastic pheromone tables.
/// Data is forwarded by sampling the pheromone row alone.
class AntNet final : public RoutingProtocol {
 public:
  AntNet(ProtocolContext ctx, CommonRouting common, AntNetParams params)
      : RoutingProtocol(std::move(ctx), common), params_(params), tables_(node_count()),
        flows_(node_count()), fant_rng_(&stream("antnet.fant")),
        data_rng_(&stream("antnet.data")) {
    params_.validate();
    if (params_.max_life == 0) params_.max_life = static_cast<std::uint32_t>(2 * node_count());
  }

  std::string_view name() const override { return "antnet"; }
  const AntNetParams& params() const noexcept { return params_; }

  void start() override {
    auto& offs = stream("antnet.launch");
    for (NodeId s = 0; s < node_count(); ++s) {
      const Seconds first = offs.uniform(0.0, params_.delta_t);
      engine().schedule(first, EventKind::AntLaunch, [this, s] { launch_tick(s); });
    }
    engine().schedule_in(params_.delta_t, EventKind::Timer, [this] { maintenance_tick(); });
  }

  void on_data_to_send(NodeId src, Packet pkt) override {
    note_flow(src, pkt.dst, pkt.size_bits);
    forward_data(src, std::move(pkt));
  }

  void on_packet(NodeId at, Packet pkt) override {
    switch (pkt.kind) {
      case PacketKind::Data: forward_data(at, std::move(pkt)); break;
      case PacketKind::Fant: {
        auto ant = std::any_cast<AntState>(std::move(pkt.payload));
        ant.arrive(at, now());
        forward_fant(at, std::move(ant));
        break;
      }
      case PacketKind::Bant: {
        auto ant = std::any_cast<AntState>(std::move(pkt.payload));
        handle_bant(at, std::move(ant));
        break;
      }
      default: break;
    }
  }

  void on_link_break(NodeId from, NodeId, Packet pkt) override {
    // Pheromone for the lost neighbor is kept; it simply stops being a
    // candidate while out of range. Data retries from the sender.
    if (pkt.kind == PacketKind::Data) forward_data(from, std::move(pkt));
  }

  std::size_t connectivity(NodeId node) const override {
    std::size_t n = 0;
    for (const auto& [d, row] : tables_[node].rows())
      if (row.sum() > 0.0) ++n;
    return n;
  }

  const PheromoneTable& table(NodeId node) const { return tables_.at(node); }
  PheromoneTable& table(NodeId node) { return tables_.at(node); }

  std::uint64_t fants_launched() const noexcept { return fants_launched_; }
  std::uint64_t bants_completed() const noexcept { return bants_completed_; }
  std::uint64_t fants_killed() const noexcept { return fants_killed_; }

  /// Flow measure f_sd at node s over the sliding window.
  std::map<NodeId, double> flows(NodeId s) {
    trim_flows(s);
    return flows_[s].totals;
  }

  /// Destination step: turns a FANT that reached its destination into the
  /// matching BANT, or nothing if the ant is degenerate.
  static std::optional<AntState> make_bant(const AntState& fant) {
    if (fant.source == fant.destination || fant.visited.size() < 2) return std::nullopt;
    AntState bant = fant;
    bant.kind = AntKind::Bant;
    loop_erase(bant.visited, bant.hop_times);
    std::reverse(bant.visited.begin(), bant.visited.end());
    std::reverse(bant.hop_times.begin(), bant.hop_times.end());
    bant.cursor = 0;
    return bant;
  }

 private:
  struct FlowWindow {
    std::deque<std::tuple<Seconds, NodeId, double>> events;
    std::map<NodeId, double> totals;
  };

  void note_flow(NodeId s, NodeId d, std::uint32_t bits) {
    flows_[s].events.emplace_back(now(), d, static_cast<double>(bits));
    flows_[s].totals[d] += bits;
  }

  void trim_flows(NodeId s) {
    auto& w = flows_[s];
    const Seconds cutoff = now() - params_.flow_window;
    while (!w.events.empty() && std::get<0>(w.events.front()) < cutoff) {
      auto [t, d, bits] = w.events.front();
      w.events.pop_front();
      auto it = w.totals.find(d);
      it->second -= bits;
      if (it->second <= 0.5) w.totals.erase(it);
    }
  }

  void launch_tick(NodeId s) {
    engine().schedule_in(params_.delta_t, EventKind::AntLaunch, [this, s] { launch_tick(s); });
    trim_flows(s);
    std::vector<NodeId> fallback;
    for (NodeId d : session_destinations())
      if (d != s) fallback.push_back(d);
    auto flows = flows_[s].totals;
    flows.erase(s);
    const auto dist = antnet::dest_distribution(flows, fallback);
    if (dist.empty()) return;
    const NodeId d = sample_weighted(dist, *fant_rng_);
    AntState ant;
    ant.kind = AntKind::Fant;
    ant.source = s;
    ant.destination = d;
    ant.max_life = params_.max_life;
    ant.id = link().new_uid();
    ant.arrive(s, now());
    ++fants_launched_;
    forward_fant(s, std::move(ant));
  }

  PheromoneRow& row_for(NodeId i, NodeId d, const std::vector<NodeId>& nbrs) {
    auto& table = tables_[i];
    if (auto* row = table.find(d)) return *row;
    auto& row = table.row(d);
    for (NodeId j : nbrs) row.set(j, 1.0 / static_cast<double>(nbrs.size()));
    return row;
  }

  void forward_fant(NodeId i, AntState ant) {
    if (i == ant.destination) {
      if (auto bant = make_bant(ant)) {
        send_bant(i, std::move(*bant));
      } else {
        ++fants_killed_;
      }
      return;
    }
    if (ant.hops() >= ant.max_life) {
      ++fants_killed_;
      return;
    }
    const auto nbrs = link().neighbors(i);
    if (nbrs.empty()) {
      ++fants_killed_;
      return;
    }
    Weights candidates;
    for (NodeId j : nbrs)
      if (!ant.has_visited(j)) candidates.emplace_back(j, 0.0);
    if (candidates.empty()) {
      if (!ant.allow_forced_revisit(i)) {
        ++fants_killed_;
        return;
      }
      for (NodeId j : nbrs) candidates.emplace_back(j, 0.0);
    }
    for (auto& [j, q] : candidates) q = static_cast<double>(link().queue_bits(i, j));
    const auto& row = row_for(i, ant.destination, nbrs);
    const auto probs = antnet::fant_hop_distribution(row, candidates, params_.alpha);
    const NodeId next = sample_weighted(probs, *fant_rng_);
    Packet p = make_control(PacketKind::Fant, ant.source, ant.destination);
    p.uid = ant.id;
    p.payload = std::move(ant);
    link().unicast(std::move(p), i, next, Priority::Data);
  }

  void send_bant(NodeId at, AntState bant) {
    const NodeId next = bant.visited[bant.cursor + 1];
    Packet p = make_control(PacketKind::Bant, bant.destination, bant.source);
    p.uid = bant.id;
    p.payload = std::move(bant);
    link().unicast(std::move(p), at, next, Priority::Control);
  }

  void handle_bant(NodeId at, AntState bant) {
    bant.cursor++;
    const NodeId toward_dest = bant.visited[bant.cursor - 1];
    const NodeId dest = bant.destination;
    auto& row = row_for(at, dest, link().neighbors(at));
    antnet::bant_reinforce(row, toward_dest, params_.r);
    flush(at, dest);
    if (bant.cursor + 1 >= bant.visited.size()) {
      ++bants_completed_;
      return;
    }
    send_bant(at, std::move(bant));
  }

  Weights data_candidates(NodeId i, NodeId d) const {
    Weights out;
    if (const auto* row = tables_[i].find(d)) {
      for (const auto& [j, tau] : row->entries())
        if (tau > 0.0 && link().is_neighbor(i, j)) out.emplace_back(j, tau);
    }
    return out;
  }

  void forward_data(NodeId i, Packet pkt) {
    if (pkt.dst == i) {
      deliver(pkt);
      return;
    }
    if (ttl_exceeded(pkt)) return;
    const Weights candidates = data_candidates(i, pkt.dst);
    if (candidates.empty()) {
      hold(i, std::move(pkt));
      return;
    }
    const NodeId next = sample_weighted(candidates, *data_rng_);
    link().unicast(std::move(pkt), i, next, Priority::Data);
  }

  void flush(NodeId node, NodeId dest) {
    if (!buffer().has(node, dest) || data_candidates(node, dest).empty()) return;
    for (auto& p : buffer().take(node, dest)) forward_data(node, std::move(p));
  }

  void maintenance_tick() {
    engine().schedule_in(params_.delta_t, EventKind::Timer, [this] { maintenance_tick(); });
    if (buffer().size() == 0) return;
    for (NodeId n = 0; n < node_count(); ++n) {
      if (buffer().size(n) == 0) continue;
      for (auto& p : buffer().expire(n, now() - params_.no_route_hold)) drop(p, DropReason::NoRoute);
      for (NodeId d : buffer().destinations(n)) flush(n, d);
    }
  }

  AntNetParams params_;
  std::vector<PheromoneTable> tables_;
  std::vector<FlowWindow> flows_;
  RngStream* fant_rng_;
  RngStream* data_rng_;
  std::uint64_t fants_launched_ = 0;
  std::uint64_t bants_completed_ = 0;
  std::uint64_t fants_killed_ = 0;
};

}  // namespace antmesh
