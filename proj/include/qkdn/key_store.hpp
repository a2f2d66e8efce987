#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "qkdn/quantum.hpp"

namespace qkdn {

/// What a consumed key was spent on.
enum class KeyUse : std::uint8_t { transport, ack, cm };

/// Keys of one QKD link as held by its two KMS endpoints.
///
/// Both endpoints mirror the same sequence, so a single store per link
/// suffices; even and odd keys form separate FIFO queues and each endpoint
/// draws from its own encryption parity. Keys are tracked as id ranges, so
/// a store holding 10^5 keys costs a handful of words.
class KeyStore {
 public:
  explicit KeyStore(std::uint64_t capacity = 100000) : capacity_(capacity) {}

  /// Offers [first_id, first_id + count). Keys beyond capacity are dropped,
  /// newest first, and counted as discarded. Returns the number accepted.
  std::uint64_t push(std::uint64_t first_id, std::uint64_t count);
  /// Removes the lowest-id available key of the given parity.
  std::optional<std::uint64_t> take(Parity p, KeyUse use);

  std::uint64_t available(Parity p) const { return queue(p).count; }
  std::uint64_t available() const { return even_.count + odd_.count; }
  std::uint64_t capacity() const { return capacity_; }
  std::uint64_t generated() const { return generated_; }
  std::uint64_t consumed() const { return consumed_[0] + consumed_[1] + consumed_[2]; }
  std::uint64_t consumed(KeyUse use) const { return consumed_[static_cast<int>(use)]; }
  std::uint64_t discarded() const { return discarded_; }
  bool conserved() const { return generated_ == consumed() + available() + discarded_; }

 private:
  struct Range {
    std::uint64_t next;  // next id of this parity
    std::uint64_t left;  // ids remaining, stepping by 2
  };
  struct Queue {
    std::deque<Range> ranges;
    std::uint64_t count = 0;
  };
  const Queue& queue(Parity p) const { return p == Parity::even ? even_ : odd_; }
  Queue& queue(Parity p) { return p == Parity::even ? even_ : odd_; }

  std::uint64_t capacity_;
  Queue even_;
  Queue odd_;
  std::uint64_t generated_ = 0;
  std::uint64_t consumed_[3] = {0, 0, 0};
  std::uint64_t discarded_ = 0;
};

/// Records every consumed key id per link; a second use of an id is a bug.
class KeyUsageLedger {
 public:
  explicit KeyUsageLedger(std::size_t links = 0) : used_(links) {}
  /// Returns false when (link, id) was already recorded.
  bool record(LinkIndex link, std::uint64_t id);
  std::uint64_t duplicates() const { return duplicates_; }
  std::uint64_t recorded() const { return recorded_; }

 private:
  std::vector<std::vector<bool>> used_;
  std::uint64_t duplicates_ = 0;
  std::uint64_t recorded_ = 0;
};

}  // namespace qkdn
