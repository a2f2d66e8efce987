#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "qkdn/sim_time.hpp"

namespace qkdn {

using HandlerId = std::uint32_t;

struct Event {
  SimTime fire_at;
  std::uint64_t seq = 0;
  HandlerId target = 0;
  std::uint32_t tag = 0;
  std::uint64_t arg = 0;
};

class EventHandler {
 public:
  virtual ~EventHandler() = default;
  virtual void handle(const Event& ev) = 0;
};

/// Opaque handle returned by schedule(); the event's issue sequence number.
struct EventHandle {
  std::uint64_t seq = 0;
};

struct RunReport {
  std::uint64_t processed = 0;
  std::uint64_t cancelled = 0;
  SimTime final_clock;
  /// FNV-1a digest over (fire_at, seq, target, tag, arg) of every processed
  /// event. Two runs with equal digests processed identical event sequences.
  std::uint64_t trace_digest = 0;
};

/// Single-threaded discrete-event engine. Events are processed in strict
/// (fire_at, seq) order; seq is the global issue order, so equal timestamps
/// resolve first-scheduled-first.
class Simulator {
 public:
  Simulator();
  ~Simulator();
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  HandlerId add_handler(EventHandler& handler, std::string name);
  const std::string& handler_name(HandlerId id) const { return names_.at(id); }

  EventHandle schedule(SimTime delay, HandlerId target, std::uint32_t tag, std::uint64_t arg = 0);
  EventHandle schedule_at(SimTime when, HandlerId target, std::uint32_t tag, std::uint64_t arg = 0);
  /// Convenience for rare one-off callbacks; not meant for hot paths.
  EventHandle schedule_fn(SimTime delay, std::function<void()> fn);
  bool cancel(EventHandle h);

  SimTime now() const { return now_; }

  /// Runs until the queue drains or the next event lies beyond `until`
  /// (or beyond an earlier limit set with stop_at()). Shuts the engine down.
  RunReport run(SimTime until);
  /// Lowers the stop limit of the current run; may be called from handlers.
  void stop_at(SimTime t);
  SimTime stop_time() const { return stop_; }

  void shutdown() { stopped_ = true; }
  bool stopped() const { return stopped_; }

  /// When set, each processed event is written as one text line.
  void set_trace_stream(std::ostream* os) { trace_ = os; }
  std::size_t pending() const { return heap_.size(); }

 private:
  class Callbacks;

  std::vector<Event> heap_;
  std::vector<EventHandler*> handlers_;
  std::vector<std::string> names_;
  std::unordered_set<std::uint64_t> cancelled_;
  SimTime now_;
  SimTime stop_ = SimTime::max();
  std::uint64_t next_seq_ = 0;
  bool stopped_ = false;
  std::ostream* trace_ = nullptr;
  std::unique_ptr<Callbacks> callbacks_;
  HandlerId callbacks_id_ = 0;
};

}  // namespace qkdn
