#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "antmesh/engine.hpp"
#include "antmesh/errors.hpp"

namespace antmesh {

enum class DropReason : std::uint8_t { NoRoute, LinkBreak, BufferOverflow, TtlExpired, InFlightAtEnd };
inline constexpr std::size_t kDropReasons = 5;

inline constexpr std::string_view to_string(DropReason r) noexcept {
  switch (r) {
    case DropReason::NoRoute: return "no_route";
    case DropReason::LinkBreak: return "link_break";
    case DropReason::BufferOverflow: return "buffer_overflow";
    case DropReason::TtlExpired: return "ttl_expired";
    case DropReason::InFlightAtEnd: return "in_flight_at_end";
  }
  return "?";
}

struct SummaryStats {
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  std::array<std::uint64_t, kDropReasons> dropped_by_reason{};
  std::uint64_t in_flight = 0;
  std::vector<Seconds> delays;

  std::uint64_t dropped() const noexcept {
    return std::accumulate(dropped_by_reason.begin(), dropped_by_reason.end(), std::uint64_t{0});
  }
  std::uint64_t dropped(DropReason r) const noexcept {
    return dropped_by_reason[static_cast<std::size_t>(r)];
  }
  bool conserved() const noexcept { return delivered + dropped() + in_flight == sent; }

  friend bool operator==(const SummaryStats&, const SummaryStats&) = default;
};

inline double pdr(const SummaryStats& s) {
  if (s.sent == 0) throw NoTraffic();
  return static_cast<double>(s.delivered) / static_cast<double>(s.sent);
}

inline Seconds avg_delay(const SummaryStats& s) {
  if (s.delays.empty()) throw NoDeliveries();
  return std::accumulate(s.delays.begin(), s.delays.end(), 0.0) /
         static_cast<double>(s.delays.size());
}

/// Per-data-packet lifecycle. Each uid reaches at most one terminal state;
/// recording a second one is a simulator bug and throws std::logic_error.
class PacketLedger {
 public:
  struct Entry {
    Seconds sent_at = 0.0;
    std::optional<Seconds> delivered_at;
    std::optional<DropReason> dropped;
  };

  void record_sent(std::uint64_t uid, Seconds t) {
    if (!entries_.emplace(uid, Entry{t, {}, {}}).second)
      throw std::logic_error("ledger: uid sent twice");
    order_.push_back(uid);
    ++sent_;
  }

  void record_delivered(std::uint64_t uid, Seconds t) {
    auto& e = live(uid);
    e.delivered_at = t;
    ++delivered_;
    delays_.push_back(t - e.sent_at);
  }

  void record_dropped(std::uint64_t uid, DropReason reason) {
    auto& e = live(uid);
    e.dropped = reason;
    ++dropped_[static_cast<std::size_t>(reason)];
  }

  std::uint64_t sent() const noexcept { return sent_; }
  std::uint64_t delivered() const noexcept { return delivered_; }
  std::uint64_t dropped_total() const noexcept {
    return std::accumulate(dropped_.begin(), dropped_.end(), std::uint64_t{0});
  }
  /// Packets with no terminal state yet.
  std::uint64_t unresolved() const noexcept { return sent_ - delivered_ - dropped_total(); }

  const Entry* find(std::uint64_t uid) const {
    auto it = entries_.find(uid);
    return it == entries_.end() ? nullptr : &it->second;
  }

  /// Snapshot; unresolved packets are reported as in-flight.
  SummaryStats summary() const {
    SummaryStats s;
    s.sent = sent_;
    s.delivered = delivered_;
    s.dropped_by_reason = dropped_;
    s.in_flight = unresolved();
    s.delays = delays_;
    return s;
  }

  /// End-of-run accounting: packets still unresolved are tallied as
  /// InFlightAtEnd and stay in the PDR denominator.
  SummaryStats finalize() const {
    SummaryStats s = summary();
    s.dropped_by_reason[static_cast<std::size_t>(DropReason::InFlightAtEnd)] += s.in_flight;
    s.in_flight = 0;
    return s;
  }

  /// `uid,sent_at,delivered_at,drop_reason`, in send order.
  void dump(std::ostream& out) const {
    out << "uid,sent_at,delivered_at,drop_reason\n";
    char buf[128];
    for (auto uid : order_) {
      const auto& e = entries_.at(uid);
      std::string delivered = e.delivered_at ? fmt(*e.delivered_at) : "";
      std::string_view reason =
          e.dropped ? to_string(*e.dropped) : (e.delivered_at ? "" : "in_flight_at_end");
      std::snprintf(buf, sizeof buf, "%llu,%s,%s,%.*s\n", static_cast<unsigned long long>(uid),
                    fmt(e.sent_at).c_str(), delivered.c_str(), static_cast<int>(reason.size()),
                    reason.data());
      out << buf;
    }
  }

 private:
  static std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
  }

  Entry& live(std::uint64_t uid) {
    auto it = entries_.find(uid);
    if (it == entries_.end()) throw std::logic_error("ledger: unknown uid");
    if (it->second.delivered_at || it->second.dropped)
      throw std::logic_error("ledger: uid already terminal");
    return it->second;
  }

  std::unordered_map<std::uint64_t, Entry> entries_;
  std::vector<std::uint64_t> order_;
  std::uint64_t sent_ = 0;
  std::uint64_t delivered_ = 0;
  std::array<std::uint64_t, kDropReasons> dropped_{};
  std::vector<Seconds> delays_;
};

/// One row of the per-run results table.
struct RunRow {
  std::string protocol;
  std::uint64_t seed = 0;
  std::string sweep_param = "none";
  double sweep_value = 0.0;
  SummaryStats stats;
};

inline constexpr std::string_view kRunCsvHeader =
    "protocol,seed,sweep_param,sweep_value,sent,delivered,dropped,pdr,avg_delay_s";

inline std::string format_g9(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::string csv_row(const RunRow& r) {
  const double p = r.stats.sent ? pdr(r.stats) : std::numeric_limits<double>::quiet_NaN();
  const double d =
      r.stats.delays.empty() ? std::numeric_limits<double>::quiet_NaN() : avg_delay(r.stats);
  return r.protocol + "," + std::to_string(r.seed) + "," + r.sweep_param + "," +
         format_g9(r.sweep_value) + "," + std::to_string(r.stats.sent) + "," +
         std::to_string(r.stats.delivered) + "," + std::to_string(r.stats.dropped()) + "," +
         format_g9(p) + "," + format_g9(d);
}

inline void write_csv(std::ostream& out, const std::vector<RunRow>& rows) {
  out << kRunCsvHeader << '\n';
  for (const auto& r : rows) out << csv_row(r) << '\n';
}

inline void export_csv(const std::vector<RunRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot open " + path);
  write_csv(out, rows);
  if (!out) throw IoFailure("write failed: " + path);
}

}  // namespace antmesh
