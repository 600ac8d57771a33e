#pragma once

#include <array>
#include <cstdint>

namespace msle::rng {

// Philox4x32-10 counter-based generator. Every draw is a pure function of
// (key, counter), which is what makes per-path parallelism reproducible:
// worker scheduling cannot change any stream.
struct Philox4x32 {
    static constexpr std::uint32_t M0 = 0xD2511F53u;
    static constexpr std::uint32_t M1 = 0xCD9E8D57u;
    static constexpr std::uint32_t W0 = 0x9E3779B9u;
    static constexpr std::uint32_t W1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> block(std::uint64_t key,
                                              std::array<std::uint32_t, 4> ctr) {
        std::uint32_t k0 = static_cast<std::uint32_t>(key);
        std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
            k0 += W0;
            k1 += W1;
        }
        return ctr;
    }
};

// Independent sub-streams drawn from one seed. "particle" carries the driving
// Brownian motions; the others feed auxiliary sampling that must not perturb
// the particle noise when toggled on or off.
enum class Stream : std::uint32_t {
    particle = 0,
    bridge = 1,
    tail = 2,
    scatter = 3,
};

namespace detail {
inline std::uint64_t mix64(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}
} // namespace detail

// 128-bit counter layout: (channel, stream, step lo, step hi).
inline std::array<std::uint32_t, 4> make_counter(Stream stream, std::uint32_t channel,
                                                 std::uint64_t step) {
    return {channel, static_cast<std::uint32_t>(stream),
            static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32)};
}

inline std::uint64_t to_u64(std::uint32_t lo, std::uint32_t hi) {
    return static_cast<std::uint64_t>(lo) | (static_cast<std::uint64_t>(hi) << 32);
}

// Uniform in the open interval (0, 1): top 53 bits plus a half-ulp offset so
// 0 is never returned (it would blow up Box-Muller / bridge logs).
inline double u64_to_unit(std::uint64_t u) {
    return static_cast<double>(u >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

struct Draw2 {
    double u1, u2;
};

inline Draw2 uniform2(std::uint64_t seed, Stream stream, std::uint32_t channel,
                      std::uint64_t step) {
    const auto out = Philox4x32::block(detail::mix64(seed), make_counter(stream, channel, step));
    return {u64_to_unit(to_u64(out[0], out[1])), u64_to_unit(to_u64(out[2], out[3]))};
}

inline double uniform(std::uint64_t seed, Stream stream, std::uint32_t channel,
                      std::uint64_t step) {
    return uniform2(seed, stream, channel, step).u1;
}

// Standard normal via Box-Muller (cosine branch only, one draw per counter).
double normal(std::uint64_t seed, Stream stream, std::uint32_t channel, std::uint64_t step);

} // namespace msle::rng
