#include "qkdn/quantum.hpp"

#include <cmath>
#include <string>

#include <fmt/format.h>

#include "qkdn/errors.hpp"

namespace qkdn {

void QkdModuleConfig::validate() const {
  if (!(key_rate > 0.0)) throw ParameterError(fmt::format("link {}: key_rate must be positive", link));
  if (!(jitter >= 0.0 && jitter < 1.0)) {
    throw ParameterError(fmt::format("link {}: jitter must lie in [0,1)", link));
  }
  if (key_size == 0) throw ParameterError(fmt::format("link {}: key_size must be positive", link));
  if (tick <= SimTime::zero()) throw ParameterError("generation tick must be positive");
  if (post_processing < SimTime::zero()) throw ParameterError("post_processing must be >= 0");
  if (start_offset < SimTime::zero()) throw ParameterError("start_offset must be >= 0");
}

Parity ParityRoles::encrypt_parity(NodeId endpoint) const {
  if (endpoint == low) return Parity::even;
  if (endpoint == high) return Parity::odd;
  throw ParameterError(fmt::format("node {} is not an endpoint of link {}-{}", endpoint, low, high));
}

ParityRoles assign_parity_roles(NodeId a, NodeId b) {
  if (a == b) throw ParameterError("a link needs two distinct endpoints");
  return {std::min(a, b), std::max(a, b)};
}

QkdLink::QkdLink(Simulator& sim, const QkdModuleConfig& cfg, std::uint64_t seed, KeySink& sink)
    : sim_(sim), cfg_(cfg), rng_(seed, "qkd/" + std::to_string(cfg.link)), sink_(sink) {
  cfg_.validate();
  self_ = sim_.add_handler(*this, "qkd/" + std::to_string(cfg.link));
}

void QkdLink::start() { sim_.schedule(cfg_.start_offset + cfg_.tick, self_, kTick); }

void QkdLink::handle(const Event& ev) {
  if (ev.tag == kEmit) {
    const std::uint64_t first = next_id_;
    next_id_ += ev.arg;
    sink_.on_keys(cfg_.link, first, ev.arg);
    return;
  }
  const double mean_bits = cfg_.key_rate * cfg_.key_size * cfg_.tick.seconds();
  const double factor = cfg_.jitter > 0.0 ? 1.0 + rng_.uniform(-cfg_.jitter, cfg_.jitter) : 1.0;
  const auto bits = static_cast<std::uint64_t>(std::llround(mean_bits * factor));
  raw_bits_ += bits;
  carry_bits_ += bits;
  const std::uint64_t keys = carry_bits_ / cfg_.key_size;
  carry_bits_ -= keys * cfg_.key_size;
  if (trace_on_) trace_.push_back({sim_.now(), bits, keys});
  if (keys > 0) sim_.schedule(cfg_.post_processing, self_, kEmit, keys);
  sim_.schedule(cfg_.tick, self_, kTick);
}

}  // namespace qkdn
