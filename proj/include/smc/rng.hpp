#ifndef SMC_RNG_HPP
#define SMC_RNG_HPP

#include <cstdint>

namespace smc::rng {

/// SplitMix64-style finalizer over (key, counter). The whole output stream is a
/// pure function of the pair, which makes results bit-identical across
/// platforms and makes parallel streams trivial to carve out.
constexpr std::uint64_t mix(std::uint64_t key, std::uint64_t counter) {
    std::uint64_t z = key + 0x9e3779b97f4a7c15ULL * (counter + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based 64-bit generator. Copyable; fork() derives an independent
/// child stream deterministically from (key, stream id), so trial i of a
/// parallel batch always sees the same numbers regardless of scheduling.
class Counter {
public:
    explicit Counter(std::uint64_t key) : key_(key) {}

    std::uint64_t next() { return mix(key_, ctr_++); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n), n >= 1, via 128-bit multiply-shift.
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    Counter fork(std::uint64_t stream) const {
        return Counter(mix(key_ ^ 0xda3e39cb94b95bdbULL, stream));
    }

private:
    std::uint64_t key_;
    std::uint64_t ctr_ = 0;
};

}  // namespace smc::rng

#endif
