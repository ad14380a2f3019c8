#pragma once

#include <cstdint>
#include <cmath>

namespace hypint {

// Counter-based random stream: every draw is a stateless hash of
// (master_seed, stream_id, counter), so any sample of any substream can be
// generated independently of worker count or interleaving.
class Substream {
public:
    Substream(std::uint64_t master_seed, std::uint64_t stream_id)
        : key_(mix(mix(master_seed + 0x9e3779b97f4a7c15ULL) ^ stream_id)), counter_(0) {}

    std::uint64_t next_u64() { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

    // uniform in [0,1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * next_double(); }

    // uniform on {0,...,m-1}; m must be > 0
    std::uint64_t next_below(std::uint64_t m) { return next_u64() % m; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30; z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27; z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t key_;
    std::uint64_t counter_;
};

} // namespace hypint
