#pragma once

#include <any>
#include <array>
#include <cstdint>
#include <string_view>

#include "antmesh/engine.hpp"
#include "antmesh/mobility.hpp"

namespace antmesh {

inline constexpr NodeId kNoNode = static_cast<NodeId>(-1);

enum class PacketKind : std::uint8_t { Data, Fant, Bant, Rreq, Rrep, Rerr, Hello, RoamingAnt };
inline constexpr std::size_t kPacketKinds = 8;

inline constexpr std::array<PacketKind, kPacketKinds> kAllPacketKinds{
    PacketKind::Data, PacketKind::Fant, PacketKind::Bant,  PacketKind::Rreq,
    PacketKind::Rrep, PacketKind::Rerr, PacketKind::Hello, PacketKind::RoamingAnt};

inline constexpr std::string_view to_string(PacketKind k) noexcept {
  switch (k) {
    case PacketKind::Data: return "data";
    case PacketKind::Fant: return "fant";
    case PacketKind::Bant: return "bant";
    case PacketKind::Rreq: return "rreq";
    case PacketKind::Rrep: return "rrep";
    case PacketKind::Rerr: return "rerr";
    case PacketKind::Hello: return "hello";
    case PacketKind::RoamingAnt: return "roaming_ant";
  }
  return "?";
}

enum class Priority : std::uint8_t { Data, Control };

/// A simulated packet. Protocol state travels in `payload`; there is no wire
/// encoding. Copies made by a broadcast share the same uid.
struct Packet {
  PacketKind kind = PacketKind::Data;
  NodeId src = kNoNode;
  NodeId dst = kNoNode;
  NodeId prev_hop = kNoNode;
  NodeId next_hop = kNoNode;
  NodeId upstream = kNoNode;  // the hop before prev_hop, kNoNode at the origin
  std::uint32_t size_bits = 0;
  Seconds created_at = 0.0;
  std::uint64_t uid = 0;
  std::uint32_t hops = 0;  // successful link traversals so far
  std::any payload;
};

}  // namespace antmesh
