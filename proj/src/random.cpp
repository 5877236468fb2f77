#include "isac/random.hpp"

#include <cmath>
#include <numbers>

namespace isac {

namespace {

constexpr uint32_t kMul0 = 0xD2511F53u;
constexpr uint32_t kMul1 = 0xCD9E8D57u;
constexpr uint32_t kWeyl0 = 0x9E3779B9u;
constexpr uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(uint32_t a, uint32_t b, uint32_t& hi, uint32_t& lo) {
    const uint64_t prod = static_cast<uint64_t>(a) * b;
    hi = static_cast<uint32_t>(prod >> 32);
    lo = static_cast<uint32_t>(prod);
}

}  // namespace

PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key) {
    for (int round = 0; round < 10; ++round) {
        uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

double to_open_unit(uint64_t bits) {
    // 52 bits plus half a step: the largest value is 1 - 2^-53, the smallest 2^-53.
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

std::array<double, 2> Philox::uniforms(uint64_t index) const {
    const auto b = block(index);
    return {to_open_unit((static_cast<uint64_t>(b[0]) << 32) | b[1]),
            to_open_unit((static_cast<uint64_t>(b[2]) << 32) | b[3])};
}

std::array<double, 2> Philox::normals(uint64_t index) const {
    const auto u = uniforms(index);
    const double r = std::sqrt(-2.0 * std::log(u[0]));
    const double phi = 2.0 * std::numbers::pi * u[1];
    return {r * std::cos(phi), r * std::sin(phi)};
}

}  // namespace isac
