#include "qkdn/cbr.hpp"

#include <algorithm>

#include "qkdn/errors.hpp"

namespace qkdn {

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return a <= 0 ? 0 : (a + b - 1) / b; }

}  // namespace

CbrStream::CbrStream(SimTime start, SimTime interval, SimTime service, SimTime path_delay)
    : start_(start),
      interval_(interval.ns()),
      service_(service.ns()),
      path_delay_(path_delay.ns()),
      free_at_(start.ns()) {
  if (interval_ <= 0) throw ParameterError("CBR interval must be positive");
  if (service_ < 0 || service_ >= interval_) {
    throw ParameterError("encryption latency must be shorter than the packet interval");
  }
  if (path_delay_ < 0) throw ParameterError("path delay must be non-negative");
}

std::uint64_t CbrStream::created_before(SimTime end) const {
  return static_cast<std::uint64_t>(ceil_div(end.ns() - start_.ns(), interval_));
}

void CbrStream::serve(SimTime from, SimTime until, SimTime end) {
  if (finished_) throw ParameterError("serve() after finish()");
  const std::int64_t e = std::min(until, end).ns();
  const std::int64_t f = std::max(free_at_, from.ns());
  if (f >= e) return;
  const std::uint64_t limit = created_before(end);
  if (next_ >= limit) return;

  // Backlog: packets already waiting when the stage becomes free leave
  // back to back. Packet k is still in the backlog while
  // created(k) <= f + (k - next) * service.
  if (created(next_) <= f) {
    const std::int64_t num = f - start_.ns() - static_cast<std::int64_t>(next_) * service_;
    const auto last = static_cast<std::uint64_t>(num / (interval_ - service_));
    std::uint64_t n = last - next_ + 1;
    if (service_ > 0) n = std::min<std::uint64_t>(n, ceil_div(e - f, service_));
    n = std::min(n, limit - next_);
    record(next_, n, f + service_, service_, end);
    next_ += n;
    free_at_ = f + static_cast<std::int64_t>(n) * service_;
    if (next_ >= limit || free_at_ >= e) return;
  }

  // Steady state: each packet finds the stage idle on arrival.
  const std::uint64_t stop = std::min<std::uint64_t>(limit, ceil_div(e - start_.ns(), interval_));
  if (stop <= next_) return;
  const std::uint64_t n = stop - next_;
  record(next_, n, created(next_) + service_, interval_, end);
  next_ = stop;
  free_at_ = created(stop - 1) + service_;
}

void CbrStream::record(std::uint64_t first, std::uint64_t n, std::int64_t d0, std::int64_t step,
                       SimTime end) {
  if (n == 0) return;
  const std::int64_t c0 = created(first);
  const std::int64_t horizon = end.ns() - path_delay_;  // latest departure still delivered
  std::uint64_t m = 0;                                  // delivered prefix
  if (d0 <= horizon) {
    m = step == 0 ? n : std::min<std::uint64_t>(n, static_cast<std::uint64_t>((horizon - d0) / step) + 1);
  }
  const auto mi = static_cast<long double>(m);
  latency_sum_ += mi * static_cast<long double>(d0 + path_delay_ - c0) +
                  static_cast<long double>(step - interval_) * mi * (mi - 1) / 2;
  rx_ += m;
  // Censored tail, latency end - created(first + j) for j in [m, n).
  const auto ni = static_cast<long double>(n);
  latency_sum_ += (ni - mi) * static_cast<long double>(end.ns() - c0) -
                  static_cast<long double>(interval_) * (ni * (ni - 1) - mi * (mi - 1)) / 2;
  samples_ += n;
}

void CbrStream::finish(SimTime end) {
  if (finished_) return;
  finished_ = true;
  const std::uint64_t limit = created_before(end);
  tx_ = limit;
  if (next_ >= limit) return;
  const auto n = static_cast<long double>(limit - next_);
  // sum over k in [next, limit) of end - created(k)
  const long double first = static_cast<long double>(end.ns() - created(next_));
  latency_sum_ += n * first - static_cast<long double>(interval_) * n * (n - 1) / 2;
  samples_ += limit - next_;
}

}  // namespace qkdn
