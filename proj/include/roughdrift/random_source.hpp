#pragma once

#include <cstdint>
#include <random>

namespace roughdrift {

/**
 * Identifies one independent random stream.
 *
 * Every draw in the library goes through a RandomSource, so a run is fully
 * determined by its master seed. Monte Carlo path q uses stream_id q; the fBm
 * potential uses its own seed.
 */
struct RandomSource {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_id = 0;

    /// Fresh engine positioned at the start of this stream.
    std::mt19937_64 engine() const {
        std::seed_seq seq{
            static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
            static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32),
            0x5eedu};
        return std::mt19937_64(seq);
    }

    friend bool operator==(const RandomSource&, const RandomSource&) = default;
};

/// splitmix64 finalizer; used to derive per-run seeds from a master seed.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Standard normal draws from one stream.
class GaussianStream {
public:
    explicit GaussianStream(const RandomSource& source) : engine_(source.engine()) {}

    double operator()() { return normal_(engine_); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace roughdrift
