#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace setplan::synth {

// Counter-based generator keyed by (seed, instance index, stream tag).
// Same key and call sequence give the same values on every platform, and
// independent streams never share state, so instance generation can fan
// out across workers without coordination.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t instance_index, std::uint64_t stream_tag)
        : key_(mix(mix(mix(seed + 0x1d8e4e27c47d124fULL) ^ instance_index) ^ stream_tag)) {}

    std::uint64_t next_u64() { return mix(key_ ^ (0x9e3779b97f4a7c15ULL * ++counter_)); }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [0, n) without modulo bias worth caring about here.
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    int next_int(int lo, int hi) {  // inclusive range
        return lo + static_cast<int>(next_below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    bool bernoulli(double p) { return next_double() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace setplan::synth
