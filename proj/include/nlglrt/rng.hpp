#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace nlglrt {

// One splitmix64 step; advances the state and returns the next output.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Named substreams. A seed plus a stream id define an independent generator,
// so e.g. changing the SOI gain never perturbs the noise draws of a scene.
enum class RngStream : std::uint64_t {
    interferer_bits = 1,
    soi_bits = 2,
    noise = 3,
    weight_init = 4,
    shuffle = 5,
    generic = 6,
};

// Deterministic seeded stream. Substream seed = splitmix64(splitmix64(seed) ^ id)
// feeding a mt19937_64 (fully specified by the standard, so portable).
// Gaussians use an explicit Box-Muller transform so the draw sequence is fixed
// by this header and not by the standard library's distribution internals.
class StreamRng {
public:
    StreamRng(std::uint64_t seed, RngStream stream) {
        std::uint64_t s = seed;
        std::uint64_t mixed = splitmix64(s) ^
            (static_cast<std::uint64_t>(stream) * 0x9e3779b97f4a7c15ULL);
        eng_.seed(splitmix64(mixed));
    }

    std::uint64_t next_u64() { return eng_(); }

    int next_bit() { return static_cast<int>(next_u64() >> 63); }

    // uniform in [0, 1), 53-bit resolution
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in [-1, 1)
    double uniform_sym() { return 2.0 * uniform01() - 1.0; }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
        const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;          // [0, 1)
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi_v<double> * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Circular complex Gaussian with total variance `var` (var/2 per component).
    std::complex<double> complex_gaussian(double var) {
        const double s = std::sqrt(0.5 * var);
        const double re = s * gaussian();
        const double im = s * gaussian();
        return {re, im};
    }

    // uniform integer in [0, n); modulo bias is irrelevant at the n used here
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace nlglrt
