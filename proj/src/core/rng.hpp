#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace umic {

// Deterministic RNG. mt19937_64 has a standard-specified sequence; the
// gaussian transform is our own Box-Muller so draws are identical across
// library implementations.
class Rng {
public:
    explicit Rng(uint64_t seed = 42) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // uniform in [0,1)
    double uniform() {
        return (next_u64() >> 11) * (1.0 / 9007199254740992.0);
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    uint64_t uniform_index(uint64_t n) {
        return n ? next_u64() % n : 0;
    }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 <= 1e-300) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    void fill_gaussian(double* dst, size_t n) {
        for (size_t i = 0; i < n; ++i) dst[i] = gaussian();
    }

    std::string serialize() const;
    static Rng deserialize(const std::string& s);

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace umic
