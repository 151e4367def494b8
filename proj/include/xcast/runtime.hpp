#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "xcast/types.hpp"

namespace xcast {

/// Clock plus timer service that drives the server and client state machines.
/// The simulator provides virtual time; the socket runtime provides wall time.
/// Callbacks always run on the executor's single logical thread.
class Executor {
 public:
  using TimerId = std::uint64_t;

  virtual ~Executor() = default;

  virtual Timestamp now() const = 0;
  virtual TimerId schedule_at(Timestamp when, std::function<void()> fn) = 0;
  /// Cancelling an unknown or already-fired timer is a no-op.
  virtual void cancel(TimerId id) = 0;

  TimerId schedule_after(Duration delay, std::function<void()> fn) {
    return schedule_at(now() + delay, std::move(fn));
  }
};

/// Control-channel connection handle as seen by the server.
using ChannelId = std::uint64_t;

/// Server side of the transport: reliable per-client control channels plus the
/// shared multicast data channel.
class ServerLink {
 public:
  virtual ~ServerLink() = default;

  virtual void send_control(ChannelId channel, Bytes frame) = 0;
  /// Sends the datagrams back to back at the multicast rate; on_drained runs
  /// once the last one has left the radio.
  virtual void multicast(std::vector<Bytes> datagrams, std::function<void()> on_drained) = 0;
};

/// Client side of the transport: its control channel to the server.
class ClientLink {
 public:
  virtual ~ClientLink() = default;

  virtual void send_control(Bytes frame) = 0;
};

/// Receives what a transport delivers to the server. Each call carries one
/// complete frame (length prefix included).
class ServerHandler {
 public:
  virtual ~ServerHandler() = default;

  virtual void on_control(ChannelId channel, std::span<const std::uint8_t> frame) = 0;
  virtual void on_disconnect(ChannelId channel) = 0;
};

/// Receives what a transport delivers to one client.
class ClientHandler {
 public:
  virtual ~ClientHandler() = default;

  virtual void on_control(std::span<const std::uint8_t> frame) = 0;
  virtual void on_datagram(std::span<const std::uint8_t> datagram) = 0;
  /// The control channel to the server is gone.
  virtual void on_disconnect() {}
};

}  // namespace xcast
