#pragma once

#include <cstdint>
#include <random>

namespace whlab {

// splitmix64 finalizer; the fixed increment is the 64-bit golden ratio.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Deterministic per-member seed derivation for ensembles.
inline uint64_t hash64(uint64_t master_seed, uint64_t index) {
    return splitmix64(splitmix64(master_seed) ^ (index * 0xD1342543DE82EF95ULL + 1));
}

// Standard normals from mt19937_64 via Box-Muller on 53-bit uniforms. Both
// the generator sequence and the transform are pinned by this code, so a
// given seed yields the same couplings on every platform.
class GaussianStream {
   public:
    explicit GaussianStream(uint64_t seed) : gen_(seed) {}

    double next() {
        if (have_) {
            have_ = false;
            return spare_;
        }
        double u1 = 1.0 - to_unit(gen_());  // (0, 1]
        double u2 = to_unit(gen_());        // [0, 1)
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_ = true;
        return r * std::cos(a);
    }

   private:
    static double to_unit(uint64_t v) { return static_cast<double>(v >> 11) * 0x1.0p-53; }
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_ = false;
};

}  // namespace whlab
