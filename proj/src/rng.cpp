#include "msle/rng.hpp"

#include <cmath>

namespace msle::rng {

double normal(std::uint64_t seed, Stream stream, std::uint32_t channel, std::uint64_t step) {
    const Draw2 d = uniform2(seed, stream, channel, step);
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(d.u1)) * std::cos(two_pi * d.u2);
}

} // namespace msle::rng
