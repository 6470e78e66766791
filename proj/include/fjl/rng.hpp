#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace fjl {

// Stream splitting
// ----------------
// Every random object is drawn from its own std::mt19937_64 stream. The seed of
// a stream is derived from the user seed, a domain-separation tag and an index:
//
//     sub_seed = splitmix64(splitmix64(seed ^ fnv1a64(tag)) + index)
//
// Tags in use: "xi", "rows", "G", "fjlt.P", "fjlt.xi", "trial", "points".
// mt19937_64 is fully specified by the standard and the distributions below
// are implemented here rather than taken from <random>, so a seed reproduces
// the same bits on every conforming toolchain.

/// One step of the splitmix64 generator applied to a single value.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// 64-bit FNV-1a hash of a tag.
std::uint64_t fnv1a64(std::string_view text) noexcept;

/// Seed for the stream identified by (seed, tag, index).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag,
                          std::uint64_t index = 0) noexcept;

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();

    /// Uniform integer in [0, bound); bound must be positive. Unbiased (rejection).
    std::uint64_t below(std::uint64_t bound);

    /// Standard normal via the Box-Muller transform; the second variate is cached.
    double normal();

    /// Fill with independent fair +1 / -1 values, 64 signs per engine draw.
    void fill_signs(std::span<std::int8_t> out);

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace fjl
