#pragma once

#include <cstdint>
#include <vector>

#include "qkdn/kernel.hpp"
#include "qkdn/rng.hpp"
#include "qkdn/sim_time.hpp"
#include "qkdn/types.hpp"

namespace qkdn {

enum class Parity : std::uint8_t { even = 0, odd = 1 };

inline Parity parity_of(std::uint64_t key_id) { return key_id % 2 == 0 ? Parity::even : Parity::odd; }
inline Parity other(Parity p) { return p == Parity::even ? Parity::odd : Parity::even; }

struct QkdModuleConfig {
  LinkIndex link = 0;
  double key_rate = 100.0;  ///< keys per second
  double jitter = 0.05;     ///< uniform relative spread of the bits per tick
  SimTime post_processing = seconds(1);
  std::uint32_t key_size = 256;  ///< bits
  SimTime tick = seconds(1);
  /// Offset of the first tick within the first interval; the first batch of
  /// raw bits is complete at start_offset + tick.
  SimTime start_offset;

  /// Throws ParameterError on key_rate <= 0, jitter outside [0,1),
  /// key_size == 0 or a non-positive tick.
  void validate() const;
};

/// Which parity each endpoint of a link encrypts with.
struct ParityRoles {
  NodeId low = 0;
  NodeId high = 0;

  /// The lower-id endpoint encrypts with even keys and decrypts with odd
  /// ones; the higher-id endpoint does the opposite.
  Parity encrypt_parity(NodeId endpoint) const;
  Parity decrypt_parity(NodeId endpoint) const { return other(encrypt_parity(endpoint)); }
};

ParityRoles assign_parity_roles(NodeId a, NodeId b);

/// Receives whole keys [first_id, first_id + count) for a link. Both
/// endpoints of a link see the same sequence, so one call feeds both.
class KeySink {
 public:
  virtual ~KeySink() = default;
  virtual void on_keys(LinkIndex link, std::uint64_t first_id, std::uint64_t count) = 0;
};

struct GenerationSample {
  SimTime at;
  std::uint64_t bits = 0;
  std::uint64_t keys = 0;  ///< keys that left post-processing in this batch
};

/// Streaming key source of one QKD link.
///
/// Every tick a jittered quantity of raw bits accumulates. Whole keys are cut
/// from the pool, leftover bits carry over, and each batch is released after
/// the post-processing delay. Batches are pipelined: post-processing of one
/// batch does not hold back generation of the next.
class QkdLink : public EventHandler {
 public:
  QkdLink(Simulator& sim, const QkdModuleConfig& cfg, std::uint64_t seed, KeySink& sink);

  /// Schedules the first tick. Call once before running the simulator.
  void start();
  void handle(const Event& ev) override;

  const QkdModuleConfig& config() const { return cfg_; }
  std::uint64_t keys_emitted() const { return next_id_; }
  std::uint64_t raw_bits() const { return raw_bits_; }
  void enable_trace(bool on) { trace_on_ = on; }
  const std::vector<GenerationSample>& trace() const { return trace_; }

 private:
  enum Tag : std::uint32_t { kTick, kEmit };

  Simulator& sim_;
  QkdModuleConfig cfg_;
  RngStream rng_;
  KeySink& sink_;
  HandlerId self_ = 0;
  std::uint64_t carry_bits_ = 0;
  std::uint64_t raw_bits_ = 0;
  std::uint64_t next_id_ = 0;
  bool trace_on_ = false;
  std::vector<GenerationSample> trace_;
};

}  // namespace qkdn
