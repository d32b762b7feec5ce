#pragma once

// Splittable counter-based random generator. Every random decision in the
// project derives from one 64-bit seed through split() streams; draws are a
// pure function of (key, counter), so results do not depend on call order
// elsewhere or on platform library details.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace geoaux {

class SplitRng {
public:
    explicit SplitRng(std::uint64_t seed) : key_(mix(seed ^ kGamma)) {}

    // Derives an independent stream; does not disturb this generator's counter.
    SplitRng split(std::uint64_t stream) const {
        return SplitRng(from_key{}, mix(key_ ^ mix(stream + kGamma)));
    }

    std::uint64_t next_u64() { return mix(key_ + (++ctr_) * kGamma); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller (cosine branch); consumes two draws.
    double normal() {
        double u1 = uniform();
        if (u1 < 0x1.0p-53) u1 = 0x1.0p-53;
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("SplitRng::next_below: n must be positive");
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    struct from_key {};
    SplitRng(from_key, std::uint64_t key) : key_(key) {}

    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
    static constexpr double kPi = 3.14159265358979323846;

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t ctr_ = 0;
};

}  // namespace geoaux
