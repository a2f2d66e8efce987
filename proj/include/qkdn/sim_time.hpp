#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>

namespace qkdn {

/// Simulated time with nanosecond resolution. Used both for instants on the
/// simulation timeline and for durations between them.
class SimTime {
 public:
  constexpr SimTime() = default;
  constexpr explicit SimTime(std::int64_t ns) : ns_(ns) {}

  static constexpr SimTime zero() { return SimTime{0}; }
  static constexpr SimTime max() { return SimTime{std::numeric_limits<std::int64_t>::max()}; }

  static SimTime from_ns(double v) { return SimTime{std::llround(v)}; }
  static SimTime from_us(double v) { return SimTime{std::llround(v * 1e3)}; }
  static SimTime from_ms(double v) { return SimTime{std::llround(v * 1e6)}; }
  static SimTime from_s(double v) { return SimTime{std::llround(v * 1e9)}; }

  constexpr std::int64_t ns() const { return ns_; }
  constexpr double seconds() const { return static_cast<double>(ns_) / 1e9; }
  constexpr double ms() const { return static_cast<double>(ns_) / 1e6; }
  constexpr bool is_max() const { return ns_ == std::numeric_limits<std::int64_t>::max(); }

  constexpr auto operator<=>(const SimTime&) const = default;

  constexpr SimTime operator+(SimTime o) const { return SimTime{ns_ + o.ns_}; }
  constexpr SimTime operator-(SimTime o) const { return SimTime{ns_ - o.ns_}; }
  constexpr SimTime& operator+=(SimTime o) {
    ns_ += o.ns_;
    return *this;
  }
  constexpr SimTime& operator-=(SimTime o) {
    ns_ -= o.ns_;
    return *this;
  }
  constexpr SimTime operator*(std::int64_t k) const { return SimTime{ns_ * k}; }

 private:
  std::int64_t ns_ = 0;
};

constexpr SimTime nanoseconds(std::int64_t v) { return SimTime{v}; }
constexpr SimTime microseconds(std::int64_t v) { return SimTime{v * 1'000}; }
constexpr SimTime milliseconds(std::int64_t v) { return SimTime{v * 1'000'000}; }
constexpr SimTime seconds(std::int64_t v) { return SimTime{v * 1'000'000'000}; }

}  // namespace qkdn
