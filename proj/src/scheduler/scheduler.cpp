#include "xcast/scheduler/scheduler.hpp"

#include <algorithm>

namespace xcast::scheduler {

void SchedulerConfig::validate() const {
  if (t_r <= Duration::zero()) throw ConfigError("t_r must be positive");
  if (!(size_affinity > 0.0 && size_affinity <= 1.0)) throw ConfigError("size_affinity must be in (0, 1]");
  if (max_queue == 0) throw ConfigError("max_queue must be positive");
  if (proactive_ttl <= Duration::zero()) throw ConfigError("proactive_ttl must be positive");
}

Scheduler::Scheduler(SchedulerConfig config, NextSegmentFn next_segment)
    : config_(config), next_segment_(std::move(next_segment)) {
  config_.validate();
}

PendingRequest* Scheduler::find(EntryId id) {
  auto it = std::find_if(queue_.begin(), queue_.end(), [&](const PendingRequest& e) { return e.id == id; });
  return it == queue_.end() ? nullptr : &*it;
}

std::optional<std::size_t> Scheduler::partner_for(const coding::ClientState& candidate,
                                                  const ClientTable& clients) const {
  std::vector<const CodingSet*> view;
  view.reserve(queue_.size());
  for (const auto& entry : queue_) view.push_back(&entry.coding_set);
  return coding::select_coding_partner(candidate, std::span<const CodingSet* const>(view), clients,
                                       config_.size_affinity);
}

SchedulerEffect Scheduler::on_request_arrival(const SegmentRequest& request, const ClientTable& clients,
                                              Timestamp now) {
  SchedulerEffect effect;
  sweep_expired(now, effect);

  auto client = clients.find(request.client);
  if (client == clients.end()) {
    effect.arrival = ArrivalOutcome::rejected_unknown_client;
    return effect;
  }

  for (auto& entry : queue_) {
    if (!entry.proactive_members.contains(request.client)) continue;
    auto member = std::find_if(entry.coding_set.members.begin(), entry.coding_set.members.end(),
                               [&](const CodingMember& m) { return m.client == request.client; });
    if (member == entry.coding_set.members.end() || member->segment != request.segment) continue;
    entry.proactive_members.erase(request.client);
    effect.arrival = ArrivalOutcome::confirmed;
    effect.entry = entry.id;
    resolve_awaiting(clients, now, effect);
    try_dispatch(clients, now, effect);
    return effect;
  }

  // A member still in B_t may already be decoded client-side while the group
  // finishes retransmissions; only a repeat of the same segment is a duplicate.
  const bool in_flight = buffer_.current && std::any_of(buffer_.current->coding_set.members.begin(),
                                                        buffer_.current->coding_set.members.end(),
                                                        [&](const CodingMember& m) {
                                                          return m.client == request.client &&
                                                                 m.segment == request.segment;
                                                        });
  const bool queued = std::any_of(queue_.begin(), queue_.end(), [&](const PendingRequest& e) {
    return e.coding_set.contains_client(request.client) && !e.proactive_members.contains(request.client);
  });
  if (in_flight || queued) {
    effect.arrival = ArrivalOutcome::duplicate;
    return effect;
  }

  // The client asked for something else: its proactive guess is stale.
  strip_members([&](const PendingRequest& e, const CodingMember& m) {
    return m.client == request.client && e.proactive_members.contains(m.client);
  }, effect);

  const CodingMember member{request.client, request.segment, now};
  std::optional<std::size_t> partner;
  if (config_.coding_enabled) {
    coding::ClientState candidate{request.client, {request.segment}, client->second.cached};
    partner = partner_for(candidate, clients);
  }
  if (partner) {
    auto& entry = queue_[*partner];
    entry.coding_set.members.push_back(member);
    effect.arrival = ArrivalOutcome::merged;
    effect.entry = entry.id;
  } else if (queue_.size() >= config_.max_queue) {
    effect.arrival = ArrivalOutcome::rejected_queue_full;
  } else {
    PendingRequest entry;
    entry.id = next_id_++;
    entry.coding_set.members.push_back(member);
    entry.enqueue_time = now;
    queue_.push_back(std::move(entry));
    effect.arrival = ArrivalOutcome::enqueued;
    effect.entry = queue_.back().id;
  }
  resolve_awaiting(clients, now, effect);
  try_dispatch(clients, now, effect);
  return effect;
}

SchedulerEffect Scheduler::on_transmission_complete(const ClientTable& clients, Timestamp now) {
  SchedulerEffect effect;
  buffer_.current.reset();
  sweep_expired(now, effect);
  resolve_awaiting(clients, now, effect);
  try_dispatch(clients, now, effect);
  return effect;
}

SchedulerEffect Scheduler::on_timer_fire(EntryId entry_id, const ClientTable& clients, Timestamp now) {
  SchedulerEffect effect;
  if (awaiting_ != entry_id) return effect;
  awaiting_.reset();
  strip_members([&](const PendingRequest& e, const CodingMember& m) {
    return e.id == entry_id && e.proactive_members.contains(m.client);
  }, effect);
  auto it = std::find_if(queue_.begin(), queue_.end(), [&](const PendingRequest& e) { return e.id == entry_id; });
  if (it != queue_.end()) {
    dispatch(it, clients, now, effect);
  } else {
    try_dispatch(clients, now, effect);
  }
  return effect;
}

SchedulerEffect Scheduler::on_client_departed(ClientId client, const ClientTable& clients, Timestamp now) {
  SchedulerEffect effect;
  strip_members([&](const PendingRequest&, const CodingMember& m) { return m.client == client; }, effect);
  resolve_awaiting(clients, now, effect);
  try_dispatch(clients, now, effect);
  return effect;
}

void Scheduler::strip_members(const std::function<bool(const PendingRequest&, const CodingMember&)>& doomed,
                              SchedulerEffect& effect) {
  for (auto it = queue_.begin(); it != queue_.end();) {
    auto& members = it->coding_set.members;
    for (auto m = members.begin(); m != members.end();) {
      if (doomed(*it, *m)) {
        if (it->proactive_members.erase(m->client) > 0) effect.proactive_stripped.push_back(*m);
        m = members.erase(m);
      } else {
        ++m;
      }
    }
    if (members.empty()) {
      effect.dropped.push_back(it->id);
      it = queue_.erase(it);
    } else {
      ++it;
    }
  }
}

void Scheduler::sweep_expired(Timestamp now, SchedulerEffect& effect) {
  strip_members([&](const PendingRequest& e, const CodingMember& m) {
    return e.proactive_members.contains(m.client) && m.arrival + config_.proactive_ttl < now;
  }, effect);
}

void Scheduler::resolve_awaiting(const ClientTable& clients, Timestamp now, SchedulerEffect& effect) {
  if (!awaiting_) return;
  auto it = std::find_if(queue_.begin(), queue_.end(), [&](const PendingRequest& e) { return e.id == *awaiting_; });
  if (it == queue_.end()) {
    awaiting_.reset();
    return;
  }
  if (!it->proactive_members.empty()) return;
  awaiting_.reset();
  dispatch(it, clients, now, effect);
}

void Scheduler::try_dispatch(const ClientTable& clients, Timestamp now, SchedulerEffect& effect) {
  if (buffer_.current || awaiting_) return;
  auto head = std::find_if(queue_.begin(), queue_.end(),
                           [](const PendingRequest& e) { return e.has_confirmed_member(); });
  if (head == queue_.end()) return;
  if (!head->proactive_members.empty()) {
    head->state = EntryState::awaiting_confirm;
    awaiting_ = head->id;
    effect.arm_timer = TimerRequest{head->id, now + config_.t_r};
    return;
  }
  dispatch(head, clients, now, effect);
}

void Scheduler::dispatch(std::deque<PendingRequest>::iterator entry, const ClientTable& clients, Timestamp now,
                         SchedulerEffect& effect) {
  entry->state = EntryState::ready;
  buffer_.current = std::move(*entry);
  buffer_.started_at = now;
  queue_.erase(entry);
  effect.dispatch = Dispatch{buffer_.current->id, buffer_.current->coding_set};
  if (config_.proactive_enabled && config_.coding_enabled) {
    for (const auto& member : buffer_.current->coding_set.members) insert_proactive(member, clients, now, effect);
  }
}

void Scheduler::insert_proactive(const CodingMember& delivered, const ClientTable& clients, Timestamp now,
                                 SchedulerEffect& effect) {
  if (!next_segment_) return;
  const auto next = next_segment_(delivered.segment);
  if (!next) return;
  auto client = clients.find(delivered.client);
  if (client == clients.end() || client->second.cached.contains(*next)) return;
  const bool already_queued = std::any_of(queue_.begin(), queue_.end(), [&](const PendingRequest& e) {
    return e.coding_set.contains_client(delivered.client);
  });
  if (already_queued) return;

  const CodingMember guess{delivered.client, *next, now};
  coding::ClientState candidate{delivered.client, {*next}, client->second.cached};
  if (auto partner = partner_for(candidate, clients)) {
    auto& entry = queue_[*partner];
    entry.coding_set.members.push_back(guess);
    entry.proactive_members.insert(delivered.client);
  } else if (queue_.size() < config_.max_queue) {
    PendingRequest entry;
    entry.id = next_id_++;
    entry.coding_set.members.push_back(guess);
    entry.proactive_members.insert(delivered.client);
    entry.enqueue_time = now;
    queue_.push_back(std::move(entry));
  } else {
    return;
  }
  effect.proactive_inserted.push_back(guess);
}

std::optional<EntryId> find_invalid_entry(const Scheduler& scheduler, const ClientTable& clients) {
  for (const auto& entry : scheduler.queue()) {
    const auto& members = entry.coding_set.members;
    if (members.empty()) return entry.id;
    for (const auto& a : members) {
      for (const auto& b : members) {
        if (&a == &b) continue;
        if (a.client == b.client || a.segment == b.segment) return entry.id;
        auto holder = clients.find(a.client);
        if (holder == clients.end() || !holder->second.cached.contains(b.segment)) return entry.id;
      }
    }
    for (ClientId p : entry.proactive_members) {
      if (!entry.coding_set.contains_client(p)) return entry.id;
    }
  }
  return std::nullopt;
}

}  // namespace xcast::scheduler
