#pragma once

#include <cstdint>

#include "qkdn/sim_time.hpp"

namespace qkdn {

/// One direction of a constant-bit-rate flow, evaluated in closed form.
///
/// Packet k is created at start + k*interval. Each packet goes through one
/// serial encryption stage of `service` length, and encryption may only
/// start while a session key is active. It then takes `path_delay` to reach
/// the receiver. Instead of one event per packet, the owner calls serve() once per key-activity
/// interval, and the backlog drain and steady-state departures inside that
/// interval are summed as arithmetic series.
///
/// Latency is creation to delivery. Packets that are still queued or in
/// flight at the end of the run are censored at the end time and
/// contribute end - created.
class CbrStream {
 public:
  CbrStream(SimTime start, SimTime interval, SimTime service, SimTime path_delay);

  /// Serves every packet whose encryption can start in [from, until)
  /// (clipped to `end`), in creation order.
  void serve(SimTime from, SimTime until, SimTime end);
  /// Accounts for packets created before `end` that were never served.
  /// Call once, after the last serve().
  void finish(SimTime end);

  SimTime start() const { return start_; }
  /// Packets created strictly before `end`.
  std::uint64_t created_before(SimTime end) const;
  std::uint64_t served() const { return next_; }
  std::uint64_t tx() const { return tx_; }
  std::uint64_t rx() const { return rx_; }
  /// Sum of latency samples in nanoseconds and their count.
  long double latency_sum_ns() const { return latency_sum_; }
  std::uint64_t samples() const { return samples_; }

 private:
  /// Records n packets with departures d0 + j*step and creation times
  /// created(first + j).
  void record(std::uint64_t first, std::uint64_t n, std::int64_t d0, std::int64_t step,
              SimTime end);
  std::int64_t created(std::uint64_t k) const {
    return start_.ns() + static_cast<std::int64_t>(k) * interval_;
  }

  SimTime start_;
  std::int64_t interval_;
  std::int64_t service_;
  std::int64_t path_delay_;
  std::uint64_t next_ = 0;     // first packet not yet served
  std::int64_t free_at_ = 0;   // encryption stage idle from here on
  std::uint64_t tx_ = 0;
  std::uint64_t rx_ = 0;
  long double latency_sum_ = 0;
  std::uint64_t samples_ = 0;
  bool finished_ = false;
};

}  // namespace qkdn
