#include "isac/channel.hpp"

#include "isac/random.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace isac {

namespace {
constexpr uint32_t kChannelStream = 0x43484E4Cu;  // "CHNL"
}

std::vector<double> ChannelRealization::gains() const {
    std::vector<double> g(h.size());
    for (size_t i = 0; i < h.size(); ++i) {
        g[i] = std::norm(h[i]);
    }
    return g;
}

ChannelRealization rician_channel(int n, int paths, double k_db, uint64_t seed) {
    if (n < 1 || paths < 1 || paths > n) {
        throw std::invalid_argument("rician_channel: need 1 <= paths <= N, got paths=" + std::to_string(paths) +
                                    ", N=" + std::to_string(n));
    }
    if (std::isnan(k_db)) {
        throw std::invalid_argument("rician_channel: K-factor is NaN");
    }
    const double los_fraction = std::isinf(k_db) ? (k_db > 0 ? 1.0 : 0.0) : [&] {
        const double k = std::pow(10.0, k_db / 10.0);
        return k / (k + 1.0);
    }();

    std::vector<cplx> taps(static_cast<size_t>(n), 0.0);
    if (paths == 1) {
        taps[0] = 1.0;
    } else {
        taps[0] = std::sqrt(los_fraction);
        const double diffuse = (1.0 - los_fraction) / (paths - 1);
        const Philox rng(seed, kChannelStream, 0);
        for (int l = 1; l < paths; ++l) {
            const auto z = rng.normals(static_cast<uint64_t>(l));
            taps[static_cast<size_t>(l)] = std::sqrt(diffuse / 2.0) * cplx(z[0], z[1]);
        }
        double power = 0.0;
        for (const auto& t : taps) {
            power += std::norm(t);
        }
        const double scale = 1.0 / std::sqrt(power);
        for (auto& t : taps) {
            t *= scale;
        }
    }

    ChannelRealization out;
    out.h = FftPlan(n, -1)(taps);
    out.meta = {paths, k_db, seed, 0.0};
    return out;
}

ChannelRealization flat_channel(int n, cplx gain) {
    if (n < 1) {
        throw std::invalid_argument("flat_channel: need N >= 1");
    }
    ChannelRealization out;
    out.h.assign(static_cast<size_t>(n), gain);
    return out;
}

ChannelRealization channel_from_gains(std::vector<cplx> h) {
    ChannelRealization out;
    out.h = std::move(h);
    out.meta.paths = 0;
    return out;
}

}  // namespace isac
