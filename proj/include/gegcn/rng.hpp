#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace gegcn {

// Seeded generator with hand-rolled distributions so that a (seed, build)
// pair reproduces bit-identical streams; std:: distributions are
// implementation-defined and would break the per-seed determinism contract.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // [0, 1), 53-bit resolution
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // [0, n); modulo bias is negligible for n << 2^64 and keeps the stream
    // portable across standard libraries
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(eng_() % n); }

    bool bernoulli(double p) { return uniform01() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[index(i)]);
        }
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace gegcn
