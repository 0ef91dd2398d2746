#pragma once

#include <concepts>
#include <cstdint>
#include <span>

#include "mlp/multi_index.hpp"

namespace mlp {

// Domain tag separating the two per-node sources: the uniform used for the
// intermediate-time draw and the Gaussian increments of the flow sample.
enum class StreamTag : std::uint64_t { uniform = 1, gaussian = 2 };

// 128-bit stream identity. Keys are plain values: equal keys mean equal
// streams, distinct multi-indices get (collision-resistantly) distinct keys.
struct StreamKey {
    std::uint64_t hi = 0;
    std::uint64_t lo = 0;

    friend bool operator==(const StreamKey&, const StreamKey&) = default;
    friend auto operator<=>(const StreamKey&, const StreamKey&) = default;
};

namespace detail {
// SplitMix64 finalizer: the mixing primitive for key derivation and for the
// counter-to-word map of StreamState.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}
} // namespace detail

// Derives the stream identity for (master seed, multi-index, tag).
//
// Construction: two independent 64-bit absorb chains are seeded from the
// master seed (distinct initial constants), then absorb in order the root
// index, each (level, copy) pair of the path, the path length, and the tag;
// each absorbed word is combined with the chain state through mix64, the
// second chain with a constant word tweak so the lanes stay independent.
// Deterministic; injective up to the collision resistance of the 128-bit
// chain (not cryptographic).
StreamKey derive_key(std::uint64_t master_seed, const MultiIndexKey& idx, StreamTag tag);

// Inverse of the standard normal CDF (Wichura's AS 241, double precision);
// defined for p in (0, 1), relative accuracy about 1e-15.
double inverse_normal_cdf(double p);

// Counter-based generator over one StreamKey. Word i of the stream is
// mix64(lo + i*G1) ^ mix64(hi + i*G2) with fixed odd increments G1, G2, so
// the sequence is a pure function of the key. Uniforms are (word >> 11) *
// 2^-53 in [0, 1); normals apply inverse_normal_cdf to the centered 52-bit
// uniform ((word >> 12) + 0.5) * 2^-52, exactly one word per scalar. Draw
// counters are exact: one per next_uniform, d per d-vector of normals.
//
// Single-owner by design: move-only, never shared between workers.
class StreamState {
public:
    explicit StreamState(StreamKey key) : key_(key) {}

    StreamState(StreamState&&) = default;
    StreamState& operator=(StreamState&&) = default;
    StreamState(const StreamState&) = delete;
    StreamState& operator=(const StreamState&) = delete;

    double next_uniform() {
        ++uniforms_;
        return static_cast<double>(next_word() >> 11) * 0x1.0p-53;
    }

    double next_gaussian() {
        ++gaussians_;
        const double p = (static_cast<double>(next_word() >> 12) + 0.5) * 0x1.0p-52;
        return inverse_normal_cdf(p);
    }

    void fill_gaussian(std::span<double> out) {
        for (double& v : out)
            v = next_gaussian();
    }

    std::uint64_t uniforms_drawn() const { return uniforms_; }
    std::uint64_t gaussians_drawn() const { return gaussians_; }

private:
    std::uint64_t next_word() {
        const std::uint64_t i = counter_++;
        return detail::mix64(key_.lo + i * 0x9E3779B97F4A7C15ull) ^
               detail::mix64(key_.hi + i * 0xD1342543DE82EF95ull);
    }

    StreamKey key_;
    std::uint64_t counter_ = 0;
    std::uint64_t uniforms_ = 0;
    std::uint64_t gaussians_ = 0;
};

// A source of per-node random streams (anything the estimator can draw from).
template <class S>
concept RandomStream = requires(S s, std::span<double> out) {
    { s.next_uniform() } -> std::convertible_to<double>;
    s.fill_gaussian(out);
    { s.uniforms_drawn() } -> std::convertible_to<std::uint64_t>;
    { s.gaussians_drawn() } -> std::convertible_to<std::uint64_t>;
};

// A family of mutually independent streams addressed by multi-index, with
// the uniform/gaussian domains separated per node.
template <class F>
concept StreamFamily = requires(const F f, const MultiIndexKey& k) {
    { f.uniform_stream(k) } -> RandomStream;
    { f.gaussian_stream(k) } -> RandomStream;
};

// The production family: every stream derived from one master seed through
// derive_key. Immutable and safe to share across workers.
class KeyedStreamFamily {
public:
    explicit KeyedStreamFamily(std::uint64_t master_seed) : seed_(master_seed) {}

    StreamState uniform_stream(const MultiIndexKey& idx) const {
        return StreamState(derive_key(seed_, idx, StreamTag::uniform));
    }
    StreamState gaussian_stream(const MultiIndexKey& idx) const {
        return StreamState(derive_key(seed_, idx, StreamTag::gaussian));
    }

    std::uint64_t master_seed() const { return seed_; }

private:
    std::uint64_t seed_;
};

static_assert(RandomStream<StreamState>);
static_assert(StreamFamily<KeyedStreamFamily>);

} // namespace mlp
