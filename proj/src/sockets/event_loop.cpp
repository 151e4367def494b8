#include "xcast/sockets/event_loop.hpp"

#include <poll.h>
#include <sys/eventfd.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace xcast::sockets {

EventLoop::EventLoop() {
  wake_fd_ = ::eventfd(0, EFD_NONBLOCK | EFD_CLOEXEC);
  if (wake_fd_ < 0) throw Error(std::string("eventfd: ") + std::strerror(errno));
}

EventLoop::~EventLoop() {
  if (wake_fd_ >= 0) ::close(wake_fd_);
}

Timestamp EventLoop::now() const {
  return std::chrono::duration_cast<Timestamp>(std::chrono::steady_clock::now() - epoch_);
}

Executor::TimerId EventLoop::schedule_at(Timestamp when, std::function<void()> fn) {
  TimerId id;
  {
    std::lock_guard lock(mutex_);
    id = next_timer_++;
    timers_.emplace(id, std::pair{when, std::move(fn)});
    timer_order_.emplace(when, id);
  }
  if (!in_loop_thread()) wake();
  return id;
}

void EventLoop::cancel(TimerId id) {
  std::lock_guard lock(mutex_);
  auto it = timers_.find(id);
  if (it == timers_.end()) return;
  auto range = timer_order_.equal_range(it->second.first);
  for (auto o = range.first; o != range.second; ++o) {
    if (o->second == id) {
      timer_order_.erase(o);
      break;
    }
  }
  timers_.erase(it);
}

void EventLoop::post(std::function<void()> fn) {
  {
    std::lock_guard lock(mutex_);
    posted_.push_back(std::move(fn));
  }
  wake();
}

void EventLoop::wake() {
  const std::uint64_t one = 1;
  [[maybe_unused]] auto n = ::write(wake_fd_, &one, sizeof one);
}

void EventLoop::drain_wake() {
  std::uint64_t value;
  while (::read(wake_fd_, &value, sizeof value) > 0) {
  }
}

void EventLoop::watch(int fd, short events, FdHandler handler) { watches_[fd] = Watch{events, std::move(handler)}; }

void EventLoop::set_events(int fd, short events) {
  if (auto it = watches_.find(fd); it != watches_.end()) it->second.events = events;
}

void EventLoop::unwatch(int fd) { watches_.erase(fd); }

void EventLoop::stop() {
  stopping_ = true;
  wake();
}

void EventLoop::run() {
  loop_thread_ = std::this_thread::get_id();
  stopping_ = false;
  while (!stopping_) {
    // due timers
    while (true) {
      std::function<void()> fn;
      {
        std::lock_guard lock(mutex_);
        if (timer_order_.empty() || timer_order_.begin()->first > now()) break;
        const TimerId id = timer_order_.begin()->second;
        timer_order_.erase(timer_order_.begin());
        auto it = timers_.find(id);
        fn = std::move(it->second.second);
        timers_.erase(it);
      }
      fn();
      if (stopping_) break;
    }
    std::vector<std::function<void()>> posted;
    {
      std::lock_guard lock(mutex_);
      posted.swap(posted_);
    }
    for (auto& fn : posted) fn();
    if (stopping_) break;

    int timeout_ms = -1;
    {
      std::lock_guard lock(mutex_);
      if (!posted_.empty()) {
        timeout_ms = 0;
      } else if (!timer_order_.empty()) {
        const auto wait = timer_order_.begin()->first - now();
        timeout_ms = wait <= Duration::zero()
                         ? 0
                         : static_cast<int>(std::chrono::ceil<std::chrono::milliseconds>(wait).count());
      }
    }
    std::vector<pollfd> fds;
    fds.push_back({wake_fd_, POLLIN, 0});
    for (const auto& [fd, w] : watches_) fds.push_back({fd, w.events, 0});
    const int n = ::poll(fds.data(), fds.size(), timeout_ms);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(std::string("poll: ") + std::strerror(errno));
    }
    if (fds[0].revents) drain_wake();
    for (std::size_t i = 1; i < fds.size(); ++i) {
      if (!fds[i].revents) continue;
      auto it = watches_.find(fds[i].fd);
      if (it == watches_.end()) continue;  // unwatched by an earlier handler
      auto handler = it->second.handler;
      handler(fds[i].revents);
    }
  }
  loop_thread_ = std::thread::id{};
}

}  // namespace xcast::sockets
