#pragma once

#include <cstdint>
#include <random>

namespace escm {

// splitmix64 finalizer (Steele, Lea, Flood 2014). Used both to whiten seeds
// and to derive independent per-trial substreams from a master seed by a
// counter scheme, so trial i's stream does not depend on how many draws
// trial i-1 consumed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(splitmix64(master) ^ (index * 0x9e3779b97f4a7c15ULL));
}

inline std::mt19937_64 make_rng(std::uint64_t seed) {
    return std::mt19937_64(splitmix64(seed));
}

// FNV-1a over a stream of 64-bit words; used for seed digests and param hashes.
class Fnv1a {
  public:
    void update(std::uint64_t word) {
        for (int i = 0; i < 8; ++i) {
            state_ ^= (word >> (8 * i)) & 0xffULL;
            state_ *= 0x100000001b3ULL;
        }
    }
    void update_bytes(const void* data, std::size_t size) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < size; ++i) {
            state_ ^= bytes[i];
            state_ *= 0x100000001b3ULL;
        }
    }
    std::uint64_t digest() const { return state_; }

  private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace escm
