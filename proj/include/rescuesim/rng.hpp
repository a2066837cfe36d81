#pragma once

#include <cstdint>
#include <random>

#include "rescuesim/errors.hpp"

namespace rescuesim {

// Seeded RNG used for every stochastic draw in the project. The raw
// mt19937_64 stream is identical on all platforms; std::uniform_*
// distributions are not, so the mapping from raw bits to values lives here.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // Uniform integer in [0, n).
    int uniform_int(int n) {
        if (n <= 0) throw ValidationError("Rng::uniform_int: n must be > 0");
        return static_cast<int>(gen_() % static_cast<uint64_t>(n));
    }

    // Uniform double in [0, 1).
    double uniform_real() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    // Uniform double in [lo, hi).
    double uniform_range(double lo, double hi) {
        return lo + (hi - lo) * uniform_real();
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace rescuesim
