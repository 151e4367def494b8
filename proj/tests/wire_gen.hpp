#pragma once
// Random well-formed wire messages for roundtrip and fuzz tests.

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "xcast/wire/messages.hpp"

namespace wiregen {

using namespace xcast;
using namespace xcast::wire;

inline Bytes bytes(std::mt19937_64& rng, std::size_t max) {
  Bytes out(rng() % (max + 1));
  for (auto& b : out) b = static_cast<std::uint8_t>(rng());
  return out;
}

inline SegInfo seg_info(std::mt19937_64& rng) {
  SegInfo m;
  m.segment_group_id = static_cast<std::uint16_t>(rng());
  m.payload_size = static_cast<std::uint16_t>(1 + rng() % 65535);
  const std::size_t count = 1 + rng() % 8;
  std::set<ClientId> clients;
  std::set<std::pair<std::uint32_t, std::uint32_t>> segments;
  std::uint32_t longest = 0;
  // keep ceil(longest / payload_size) within 16 bits
  const std::uint64_t cap = std::uint64_t{m.payload_size} * 65535;
  while (m.members.size() < count) {
    SegInfoMember member{static_cast<ClientId>(rng()), static_cast<std::uint32_t>(rng() % 50),
                         static_cast<std::uint32_t>(1 + rng() % 500),
                         static_cast<std::uint32_t>(1 + rng() % std::min<std::uint64_t>(cap, 100'000'000))};
    if (!clients.insert(member.client_id).second) continue;
    if (!segments.insert({member.file_id, member.segment_index}).second) continue;
    longest = std::max(longest, member.segment_length);
    m.members.push_back(member);
  }
  m.total_udp_packets = static_cast<std::uint16_t>(packets_for(longest, m.payload_size));
  return m;
}

inline UdpPkt udp_pkt(std::mt19937_64& rng) {
  return UdpPkt{static_cast<std::uint16_t>(rng()), static_cast<std::uint16_t>(rng()), bytes(rng, 1500)};
}

inline Eod eod(std::mt19937_64& rng) { return Eod{static_cast<std::uint16_t>(rng())}; }

inline RetReq ret_req(std::mt19937_64& rng) {
  RetReq m{static_cast<std::uint16_t>(rng()), static_cast<ClientId>(rng()), {}};
  m.seq_nos.resize(rng() % 200);
  for (auto& s : m.seq_nos) s = static_cast<std::uint16_t>(rng());
  return m;
}

inline RetInfo ret_info(std::mt19937_64& rng) {
  RetInfo m{static_cast<std::uint16_t>(rng()), {}};
  m.emissions.resize(rng() % 40);
  for (auto& e : m.emissions) {
    const std::size_t degree = 1 + rng() % 3;
    std::set<ServedPacket> seen;
    while (e.served.size() < degree) {
      ServedPacket s{static_cast<ClientId>(rng() % 8), static_cast<std::uint16_t>(rng() % 16)};
      if (seen.insert(s).second) e.served.push_back(s);
    }
  }
  return m;
}

inline JoinAdvert join_advert(std::mt19937_64& rng) {
  JoinAdvert m{static_cast<ClientId>(rng()), {}};
  std::set<SegmentKey> seen;
  const std::size_t count = rng() % 64;
  while (m.entries.size() < count) {
    SegmentKey k{static_cast<std::uint32_t>(rng() % 16), static_cast<std::uint32_t>(rng() % 64)};
    if (seen.insert(k).second) m.entries.push_back(k);
  }
  return m;
}

inline SegmentKey key(std::mt19937_64& rng) {
  return SegmentKey{static_cast<std::uint32_t>(rng()), static_cast<std::uint32_t>(rng())};
}

inline SegReq seg_req(std::mt19937_64& rng) { return SegReq{static_cast<ClientId>(rng()), key(rng)}; }

inline SegError seg_error(std::mt19937_64& rng) {
  return SegError{static_cast<ClientId>(rng()), key(rng), static_cast<ErrorCode>(1 + rng() % 4)};
}

inline SegData seg_data(std::mt19937_64& rng) {
  return SegData{static_cast<ClientId>(rng()), key(rng), bytes(rng, 4096)};
}

inline Message any(std::mt19937_64& rng, MessageType type) {
  switch (type) {
    case MessageType::seg_info: return seg_info(rng);
    case MessageType::udp_pkt: return udp_pkt(rng);
    case MessageType::eod: return eod(rng);
    case MessageType::ret_req: return ret_req(rng);
    case MessageType::ret_info: return ret_info(rng);
    case MessageType::join_advert: return join_advert(rng);
    case MessageType::seg_req: return seg_req(rng);
    case MessageType::seg_error: return seg_error(rng);
    case MessageType::seg_data: return seg_data(rng);
  }
  return eod(rng);
}

inline const MessageType kAllTypes[] = {MessageType::seg_info,    MessageType::udp_pkt, MessageType::eod,
                                        MessageType::ret_req,     MessageType::ret_info, MessageType::join_advert,
                                        MessageType::seg_req,     MessageType::seg_error, MessageType::seg_data};

struct Fixture {
  int version = -1;
  Bytes bytes;
};

/// Reads a hex fixture: '#' comments (one may be "wire-version: N"), hex digits, whitespace.
inline Fixture load_fixture(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open fixture " + path);
  Fixture f;
  std::string line, hex;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') {
      const auto at = line.find("wire-version:");
      if (at != std::string::npos) f.version = std::stoi(line.substr(at + 13));
      continue;
    }
    for (char c : line) {
      if (std::isxdigit(static_cast<unsigned char>(c))) hex.push_back(c);
    }
  }
  for (std::size_t i = 0; i + 1 < hex.size(); i += 2) {
    f.bytes.push_back(static_cast<std::uint8_t>(std::stoi(hex.substr(i, 2), nullptr, 16)));
  }
  return f;
}

/// The message each golden fixture encodes.
inline std::vector<std::pair<std::string, Message>> golden_messages() {
  return {
      {"seg_info", SegInfo{0x0102, {{7, 1, 2, 3000}, {9, 2, 1, 2800}}, 3, 1400}},
      {"udp_pkt", UdpPkt{5, 0x0203, {0xde, 0xad, 0xbe, 0xef}}},
      {"eod", Eod{5}},
      {"ret_req_done", RetReq{5, 9, {}}},
      {"ret_req_losses", RetReq{5, 9, {1, 0x0102}}},
      {"ret_info", RetInfo{5, {RetEmission{{{7, 1}, {9, 2}}}, RetEmission{{{9, 4}}}}}},
      {"join_advert", JoinAdvert{7, {{1, 1}, {2, 3}}}},
      {"seg_req", SegReq{7, {1, 2}}},
      {"seg_error", SegError{7, {1, 0}, ErrorCode::unknown_segment}},
      {"seg_data", SegData{7, {1, 2}, {1, 2, 3}}},
  };
}

}  // namespace wiregen
