#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <thread>
#include <vector>

#include "xcast/runtime.hpp"

namespace xcast::sockets {

/// Wall-clock Executor over poll(2). Timers and callbacks run on the thread
/// inside run(); post() and stop() may be called from any thread.
class EventLoop : public Executor {
 public:
  using FdHandler = std::function<void(short revents)>;

  EventLoop();
  ~EventLoop() override;
  EventLoop(const EventLoop&) = delete;
  EventLoop& operator=(const EventLoop&) = delete;

  Timestamp now() const override;
  TimerId schedule_at(Timestamp when, std::function<void()> fn) override;
  void cancel(TimerId id) override;

  void post(std::function<void()> fn);
  /// Runs fn on the loop thread and waits for its result.
  template <typename F>
  auto call(F fn) -> decltype(fn()) {
    if (in_loop_thread()) return fn();
    using R = decltype(fn());
    auto task = std::make_shared<std::packaged_task<R()>>(std::move(fn));
    auto result = task->get_future();
    post([task] { (*task)(); });
    return result.get();
  }

  /// Loop thread only.
  void watch(int fd, short events, FdHandler handler);
  void set_events(int fd, short events);
  void unwatch(int fd);

  void run();
  void stop();
  bool in_loop_thread() const { return std::this_thread::get_id() == loop_thread_.load(); }

 private:
  struct Watch {
    short events = 0;
    FdHandler handler;
  };

  void wake();
  void drain_wake();

  const std::chrono::steady_clock::time_point epoch_ = std::chrono::steady_clock::now();
  int wake_fd_ = -1;
  std::atomic<bool> stopping_{false};
  std::atomic<std::thread::id> loop_thread_{};

  std::mutex mutex_;
  std::vector<std::function<void()>> posted_;
  std::multimap<Timestamp, TimerId> timer_order_;
  std::map<TimerId, std::pair<Timestamp, std::function<void()>>> timers_;
  TimerId next_timer_ = 1;

  std::map<int, Watch> watches_;
};

}  // namespace xcast::sockets
