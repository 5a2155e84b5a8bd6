#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace flyq {

using Rng = std::mt19937_64;

/// Derives an independent 64-bit seed for a named sub-stream.
///
/// The derivation is a pure function of (seed, name, index), so every stream
/// can be reproduced in isolation; this is what lets a test pin Bob's
/// randomness while varying Alice's choices.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0) {
  return Rng(derive_seed(seed, stream, index));
}

/// Uniform double in [0, 1).
inline double uniform01(Rng& rng) {
  return std::generate_canonical<double, 64>(rng);
}

/// The named randomness sources of one session.
///
/// bob: state preparation. alice: the committer's private coins.
/// channel: losses and transmission errors. nature: Born-rule outcomes.
struct SessionStreams {
  Rng bob;
  Rng alice;
  Rng channel;
  Rng nature;

  static SessionStreams derive(std::uint64_t seed, std::uint64_t index = 0) {
    return SessionStreams{make_rng(seed, "bob", index), make_rng(seed, "alice", index),
                          make_rng(seed, "channel", index), make_rng(seed, "nature", index)};
  }
};

}  // namespace flyq
