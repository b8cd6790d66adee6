#include "remlab/random.hpp"

#include <stdexcept>

namespace remlab {

StreamKey seed_derivation(std::uint64_t master_seed, std::uint64_t replica_id,
                          std::uint32_t stream_label) {
  if (replica_id > kMaxReplicaId) {
    throw std::out_of_range("replica_id exceeds 2^48 - 1");
  }
  if (stream_label > 0xFFFFu) {
    throw std::out_of_range("stream_label exceeds 16 bits");
  }
  return StreamKey{mix64(master_seed), mix64((replica_id << 16) | stream_label)};
}

}  // namespace remlab
