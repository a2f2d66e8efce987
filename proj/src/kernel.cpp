#include "qkdn/kernel.hpp"

#include <algorithm>
#include <ostream>
#include <unordered_map>

#include "qkdn/errors.hpp"
#include "qkdn/rng.hpp"

namespace qkdn {

namespace {

// Min-heap on (fire_at, seq).
struct Later {
  bool operator()(const Event& a, const Event& b) const {
    if (a.fire_at != b.fire_at) return a.fire_at > b.fire_at;
    return a.seq > b.seq;
  }
};

}  // namespace

class Simulator::Callbacks : public EventHandler {
 public:
  void add(std::uint64_t key, std::function<void()> fn) { fns_.emplace(key, std::move(fn)); }
  void drop(std::uint64_t key) { fns_.erase(key); }
  void handle(const Event& ev) override {
    auto it = fns_.find(ev.arg);
    if (it == fns_.end()) return;
    auto fn = std::move(it->second);
    fns_.erase(it);
    fn();
  }

 private:
  std::unordered_map<std::uint64_t, std::function<void()>> fns_;
};

Simulator::Simulator() : callbacks_(std::make_unique<Callbacks>()) {
  callbacks_id_ = add_handler(*callbacks_, "callback");
}

Simulator::~Simulator() = default;

HandlerId Simulator::add_handler(EventHandler& handler, std::string name) {
  handlers_.push_back(&handler);
  names_.push_back(std::move(name));
  return static_cast<HandlerId>(handlers_.size() - 1);
}

EventHandle Simulator::schedule(SimTime delay, HandlerId target, std::uint32_t tag,
                                std::uint64_t arg) {
  if (delay < SimTime::zero()) throw ParameterError("schedule: negative delay");
  return schedule_at(now_ + delay, target, tag, arg);
}

EventHandle Simulator::schedule_at(SimTime when, HandlerId target, std::uint32_t tag,
                                   std::uint64_t arg) {
  if (stopped_) throw EngineStopped("schedule: engine has been shut down");
  if (when < now_) throw ParameterError("schedule: event time lies in the past");
  if (target >= handlers_.size()) throw ParameterError("schedule: unknown target");
  Event ev{when, next_seq_++, target, tag, arg};
  heap_.push_back(ev);
  std::push_heap(heap_.begin(), heap_.end(), Later{});
  return EventHandle{ev.seq};
}

EventHandle Simulator::schedule_fn(SimTime delay, std::function<void()> fn) {
  if (stopped_) throw EngineStopped("schedule: engine has been shut down");
  const std::uint64_t key = next_seq_;
  callbacks_->add(key, std::move(fn));
  try {
    return schedule(delay, callbacks_id_, 0, key);
  } catch (...) {
    callbacks_->drop(key);
    throw;
  }
}

bool Simulator::cancel(EventHandle h) {
  if (h.seq >= next_seq_) return false;
  return cancelled_.insert(h.seq).second;
}

void Simulator::stop_at(SimTime t) {
  if (t < stop_) stop_ = t;
}

RunReport Simulator::run(SimTime until) {
  if (stopped_) throw EngineStopped("run: engine has been shut down");
  stop_at(until);
  RunReport report;
  std::uint64_t digest = 0xcbf29ce484222325ULL;
  while (!heap_.empty()) {
    if (heap_.front().fire_at > stop_) break;
    std::pop_heap(heap_.begin(), heap_.end(), Later{});
    const Event ev = heap_.back();
    heap_.pop_back();
    if (!cancelled_.empty()) {
      auto it = cancelled_.find(ev.seq);
      if (it != cancelled_.end()) {
        cancelled_.erase(it);
        ++report.cancelled;
        continue;
      }
    }
    now_ = ev.fire_at;
    digest = fnv1a_u64(static_cast<std::uint64_t>(ev.fire_at.ns()), digest);
    digest = fnv1a_u64(ev.seq, digest);
    digest = fnv1a_u64((static_cast<std::uint64_t>(ev.target) << 32) | ev.tag, digest);
    digest = fnv1a_u64(ev.arg, digest);
    if (trace_ != nullptr) {
      *trace_ << ev.fire_at.ns() << ' ' << ev.seq << ' ' << names_[ev.target] << ' ' << ev.tag
              << ' ' << ev.arg << '\n';
    }
    try {
      handlers_[ev.target]->handle(ev);
    } catch (const std::exception& e) {
      stopped_ = true;
      throw SimulationFault("event t=" + std::to_string(ev.fire_at.ns()) + "ns seq=" +
                            std::to_string(ev.seq) + " target=" + names_[ev.target] +
                            " tag=" + std::to_string(ev.tag) + ": " + e.what());
    }
    ++report.processed;
  }
  stopped_ = true;
  report.final_clock = now_;
  report.trace_digest = digest;
  return report;
}

}  // namespace qkdn
