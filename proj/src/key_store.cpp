#include "qkdn/key_store.hpp"

#include <algorithm>

namespace qkdn {

std::uint64_t KeyStore::push(std::uint64_t first_id, std::uint64_t count) {
  generated_ += count;
  const std::uint64_t room = capacity_ > available() ? capacity_ - available() : 0;
  const std::uint64_t accepted = count < room ? count : room;
  discarded_ += count - accepted;
  if (accepted == 0) return 0;

  const std::uint64_t end = first_id + accepted;
  for (Parity p : {Parity::even, Parity::odd}) {
    std::uint64_t first = first_id;
    if (parity_of(first) != p) ++first;
    if (first >= end) continue;
    const std::uint64_t n = (end - first + 1) / 2;
    Queue& q = queue(p);
    if (!q.ranges.empty() && q.ranges.back().next + 2 * q.ranges.back().left == first) {
      q.ranges.back().left += n;
    } else {
      q.ranges.push_back({first, n});
    }
    q.count += n;
  }
  return accepted;
}

std::optional<std::uint64_t> KeyStore::take(Parity p, KeyUse use) {
  Queue& q = queue(p);
  if (q.count == 0) return std::nullopt;
  Range& r = q.ranges.front();
  const std::uint64_t id = r.next;
  r.next += 2;
  if (--r.left == 0) q.ranges.pop_front();
  --q.count;
  ++consumed_[static_cast<int>(use)];
  return id;
}

bool KeyUsageLedger::record(LinkIndex link, std::uint64_t id) {
  if (link >= used_.size()) used_.resize(link + 1);
  auto& bits = used_[link];
  if (id >= bits.size()) bits.resize(std::max<std::size_t>(id + 1, bits.size() * 2), false);
  ++recorded_;
  if (bits[id]) {
    ++duplicates_;
    return false;
  }
  bits[id] = true;
  return true;
}

}  // namespace qkdn
