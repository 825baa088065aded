#pragma once

#include <vector>

#include "httpmbt/model.hpp"

namespace httpmbt {

inline constexpr int kDefaultBufferCap = 64;

// In-flight packets, in absorption order. Emission candidates are the oldest
// packet of each connection, so per-connection order is preserved while
// different connections may overtake each other.
struct NetState {
  std::vector<Packet> buffer;
  int cap = kDefaultBufferCap;
};

// Returns the oldest buffered packet per connection, in connection-id order.
std::vector<std::size_t> oldest_in_each_conn(const std::vector<Packet>& buffer);

// The nondeterministic TCP reordering model: each cycle either absorbs one
// packet or emits one of the candidates. With an empty buffer only absorb is
// available.
Model tcp(NetState st = {});

// Client-side composition of a network model around a server model. Server
// sends are queued on `bo` and consumed by the network; network emissions
// toward the server land in `bi` for the server to read. Only client-facing
// sends/receives remain visible. The network is stepped lazily, i.e. only
// while the server is blocked on an empty `bi`, and a network receive
// prefers draining `bo` over asking the outside world.
Model compose(Model net, std::vector<Packet> bi, std::vector<Packet> bo, Model srv,
              int buffer_cap = kDefaultBufferCap);

// compose(tcp, [], [], srv) with default caps.
Model composed(Model srv);

}  // namespace httpmbt
