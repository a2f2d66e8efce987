#include "qkdn/params.hpp"

#include <cmath>

#include "qkdn/errors.hpp"

namespace qkdn {

SimTime NeConfig::packet_interval() const {
  return SimTime::from_s(packet_size * 8.0 / (arrival_rate_kbps * 1000.0));
}

std::string_view to_string(TrafficPattern p) {
  switch (p) {
    case TrafficPattern::all_pairs: return "all_pairs";
    case TrafficPattern::single_peer: return "single_peer";
    case TrafficPattern::explicit_sessions: return "explicit";
  }
  return "?";
}

std::optional<TrafficPattern> parse_traffic_pattern(std::string_view s) {
  if (s == "all_pairs") return TrafficPattern::all_pairs;
  if (s == "single_peer") return TrafficPattern::single_peer;
  if (s == "explicit") return TrafficPattern::explicit_sessions;
  return std::nullopt;
}

void NetworkParams::validate() const {
  if (total_time <= SimTime::zero()) throw ParameterError("total_time must be positive");
  if (effective_time && *effective_time <= SimTime::zero()) {
    throw ParameterError("effective_time must be positive");
  }
  if (routing_update_period <= SimTime::zero()) {
    throw ParameterError("routing update period must be positive");
  }
  if (queue_sample_interval <= SimTime::zero()) {
    throw ParameterError("queue sample interval must be positive");
  }
  if (!(qkd.jitter >= 0.0 && qkd.jitter < 1.0)) throw ParameterError("jitter must lie in [0,1)");
  if (qkd.key_size == 0) throw ParameterError("key_size must be positive");
  if (qkd.tick <= SimTime::zero()) throw ParameterError("generation tick must be positive");
  if (qkd.post_processing < SimTime::zero()) throw ParameterError("post_processing must be >= 0");
  if (kms.storage_size == 0) throw ParameterError("storage_size must be positive");
  if (kms.encryption_latency < SimTime::zero()) {
    throw ParameterError("KMS encryption latency must be >= 0");
  }
  if (kms.link_status_period <= SimTime::zero()) {
    throw ParameterError("link status period must be positive");
  }
  if (kms.cm_packet_to_key_ratio == 0) throw ParameterError("CM packet-to-key ratio must be >= 1");
  if (channel.backoff_mean <= SimTime::zero()) throw ParameterError("backoff mean must be positive");
  if (!(ne.arrival_rate_kbps > 0.0)) throw ParameterError("arrival rate must be positive");
  if (ne.packet_size == 0) throw ParameterError("packet size must be positive");
  if (ne.encryption_latency < SimTime::zero() || ne.encryption_latency >= ne.packet_interval()) {
    throw ParameterError("NE encryption latency must be shorter than the packet interval");
  }
  if (ne.key_lifetime <= SimTime::zero()) throw ParameterError("key lifetime must be positive");
  if (ne.keys_per_request == 0) throw ParameterError("keys_per_request must be positive");
  if (ne.cache_capacity < ne.keys_per_request) {
    throw ParameterError("cache capacity must hold at least one bundle");
  }
  if (ne.refill_threshold + ne.keys_per_request > ne.cache_capacity) {
    throw ParameterError("refill threshold leaves no room for a bundle");
  }
  if (ne.retry_mean <= SimTime::zero()) throw ParameterError("retry mean must be positive");
}

Scenario scenario(char label) {
  switch (label) {
    case 'A':
      return {'A', CmArchitecture::separately_protected, RoutingKind::distributed_proactive};
    case 'B':
      return {'B', CmArchitecture::separately_protected, RoutingKind::source_reactive};
    case 'C':
      return {'C', CmArchitecture::cm_via_kms, RoutingKind::distributed_proactive};
    case 'D':
      return {'D', CmArchitecture::cm_via_kms, RoutingKind::source_reactive};
    default:
      throw ParameterError(std::string("unknown scenario '") + label + "'");
  }
}

}  // namespace qkdn
