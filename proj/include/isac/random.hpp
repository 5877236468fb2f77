#pragma once

// Philox4x32-10 counter-based generator (Salmon et al. 2011). Every random
// number is a pure function of (key, counter), so streams can be addressed by
// (seed, frame, subcarrier, draw) without any shared state.

#include <array>
#include <cstdint>

namespace isac {

using PhiloxCounter = std::array<uint32_t, 4>;
using PhiloxKey = std::array<uint32_t, 2>;

/// One 10-round Philox4x32 block.
PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key);

/// Addressable stream: key from a 64-bit seed, counter words 2..3 fixed by
/// (stream, substream), word 0..1 enumerate blocks.
class Philox {
public:
    Philox(uint64_t seed, uint32_t stream, uint32_t substream)
        : key_{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)},
          stream_(stream), substream_(substream) {}

    /// Block `index` of this stream.
    PhiloxCounter block(uint64_t index) const {
        return philox4x32({static_cast<uint32_t>(index), static_cast<uint32_t>(index >> 32), stream_, substream_},
                          key_);
    }

    /// Two uniforms in the open interval (0, 1) with 52-bit resolution from block `index`.
    std::array<double, 2> uniforms(uint64_t index) const;

    /// Two independent standard normals from block `index` (Box-Muller).
    std::array<double, 2> normals(uint64_t index) const;

private:
    PhiloxKey key_;
    uint32_t stream_;
    uint32_t substream_;
};

/// Maps 64 random bits to a double in (0, 1), never returning 0 or 1.
double to_open_unit(uint64_t bits);

}  // namespace isac
