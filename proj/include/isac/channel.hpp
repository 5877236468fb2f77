#pragma once

// Frequency-selective channel: h = unnormalized N-point DFT of an L-tap
// impulse response, unit-variance circular Gaussian noise.

#include "isac/fft.hpp"

#include <cstdint>
#include <vector>

namespace isac {

struct ChannelMeta {
    int paths = 1;
    double rician_k_db = 0.0;
    uint64_t seed = 0;
    double average_snr = 0.0;  ///< (P/N) mean|h|^2, filled in by the caller that fixes P
};

struct ChannelRealization {
    std::vector<cplx> h;
    double noise_variance = 1.0;
    ChannelMeta meta;

    size_t size() const { return h.size(); }
    std::vector<double> gains() const;  ///< |h_i|^2
};

/// Rician channel: tap 0 is the deterministic line-of-sight term carrying a
/// fraction K/(K+1) of the tap power, taps 1..paths-1 are i.i.d. circular
/// Gaussian sharing the rest equally. Taps are rescaled to unit total power so
/// mean|h_i|^2 = 1. k_db = +inf gives a deterministic channel.
ChannelRealization rician_channel(int n, int paths, double k_db, uint64_t seed);

/// Flat channel with the given gain on every subcarrier.
ChannelRealization flat_channel(int n, cplx gain = 1.0);

/// Channel with prescribed frequency-domain gains.
ChannelRealization channel_from_gains(std::vector<cplx> h);

}  // namespace isac
