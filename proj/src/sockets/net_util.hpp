#pragma once
// Socket plumbing shared by the server and client runtimes.

#include <cstdint>
#include <functional>
#include <string>

#include "xcast/sockets/event_loop.hpp"
#include "xcast/wire/frame.hpp"

namespace xcast::sockets::detail {

[[noreturn]] void fail(const std::string& what);

void set_nonblocking(int fd);
/// Listening TCP socket; port 0 picks an ephemeral port.
int tcp_listen(const std::string& address, std::uint16_t port);
std::uint16_t local_port(int fd);
/// Blocking connect, then switched to non-blocking. Returns -1 on failure.
int tcp_connect(const std::string& host, std::uint16_t port);
int udp_multicast_sender(const std::string& interface_address, int ttl);
int udp_multicast_receiver(const std::string& group, std::uint16_t port, const std::string& interface_address);

/// A framed, non-blocking TCP stream registered with an event loop.
class Connection {
 public:
  using FrameHandler = std::function<void(const Bytes& frame)>;
  using CloseHandler = std::function<void()>;

  Connection(EventLoop& loop, int fd, FrameHandler on_frame, CloseHandler on_close);
  ~Connection();
  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;

  void send(const Bytes& frame);
  void close();
  bool open() const { return fd_ >= 0; }

 private:
  void on_events(short revents);
  void flush();

  EventLoop& loop_;
  int fd_;
  FrameHandler on_frame_;
  CloseHandler on_close_;
  wire::FrameAssembler assembler_;
  Bytes out_;
  std::size_t out_sent_ = 0;
};

}  // namespace xcast::sockets::detail
