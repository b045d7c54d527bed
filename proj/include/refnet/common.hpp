#ifndef REFNET_COMMON_HPP
#define REFNET_COMMON_HPP

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace refnet {

using NodeId = std::uint32_t;
using Weight = std::uint64_t;

constexpr NodeId kInvalidNode = static_cast<NodeId>(-1);

// Thrown when an input file or record violates the expected format.
class input_error : public std::runtime_error {
public:
    explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when an analysis precondition is not met (degenerate data, guards).
class analysis_error : public std::runtime_error {
public:
    explicit analysis_error(const std::string& what) : std::runtime_error(what) {}
};

// splitmix64; used to derive independent RNG streams from (seed, index).
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic per-stream RNG: identical results regardless of how
// streams are scheduled across threads.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
    return std::mt19937_64(mix64(mix64(seed) ^ mix64(stream + 0x51ed2701)));
}

std::size_t thread_budget();

// Runs fn(block_index, begin, end) over [0,n) split into contiguous blocks,
// one per worker. Callers own any merging; merge in block order to stay
// deterministic.
void parallel_blocks(std::size_t n,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

// FNV-1a 64-bit, used for manifest and artifact digests.
class Fnv1a {
public:
    void update(const void* data, std::size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            hash_ ^= p[i];
            hash_ *= 0x100000001b3ULL;
        }
    }
    void update(const std::string& s) { update(s.data(), s.size()); }
    std::uint64_t value() const { return hash_; }
    std::string hex() const;

private:
    std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

std::string file_digest_hex(const std::string& path);

} // namespace refnet

#endif
