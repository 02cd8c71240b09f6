#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "nlglrt/complex_matrix.hpp"
#include "nlglrt/errors.hpp"
#include "nlglrt/rng.hpp"

namespace nlglrt {

// Everything needed to synthesize one scene. Signal powers are set relative
// to the noise variance; directions are scalars in [-1, 1] (broadside = 0).
struct SceneConfig {
    std::size_t num_antennas = 4;
    std::size_t num_samples = 2000;
    std::size_t window_k = 48;
    std::size_t onset_t0 = 1000;    // first sample index at which the SOI is present
    double dir_interferer = -0.5;
    double dir_soi = 0.5;
    double inr_db = 40.0;
    double snr_db = 15.0;
    double noise_variance = 1.0;
    std::size_t samples_per_symbol = 2;
    double alpha = 0.025;           // nonlinearity drive in tanh(alpha x)/alpha
    std::uint64_t seed = 42;
};

inline void validate(const SceneConfig& c) {
    if (c.num_antennas < 2)
        throw InvalidConfig("num_antennas must be >= 2");
    if (c.num_samples == 0)
        throw InvalidConfig("num_samples must be > 0");
    if (c.window_k == 0)
        throw InvalidConfig("window_k must be > 0");
    if (c.window_k > c.onset_t0)
        throw InvalidConfig("window_k must not exceed onset_t0");
    if (c.onset_t0 >= c.num_samples)
        throw InvalidConfig("onset_t0 must be < num_samples");
    if (c.dir_interferer < -1.0 || c.dir_interferer > 1.0)
        throw InvalidConfig("dir_interferer must lie in [-1, 1]");
    if (c.dir_soi < -1.0 || c.dir_soi > 1.0)
        throw InvalidConfig("dir_soi must lie in [-1, 1]");
    if (c.dir_interferer == c.dir_soi)
        throw InvalidConfig("dir_interferer must differ from dir_soi");
    if (c.samples_per_symbol < 1)
        throw InvalidConfig("samples_per_symbol must be >= 1");
    if (!(c.alpha > 0.0))
        throw InvalidConfig("alpha must be > 0");
    if (!(c.noise_variance > 0.0))
        throw InvalidConfig("noise_variance must be > 0");
}

// Half-wavelength uniform linear array response: entry m is exp(i pi m u).
inline std::vector<cxd> steering_vector(double u, std::size_t num_antennas) {
    if (num_antennas == 0)
        throw InvalidConfig("steering_vector: need at least one antenna");
    std::vector<cxd> x(num_antennas);
    for (std::size_t m = 0; m < num_antennas; ++m) {
        const double ph = std::numbers::pi_v<double> * static_cast<double>(m) * u;
        x[m] = {std::cos(ph), std::sin(ph)};
    }
    return x;
}

// Bit 1 -> +1, bit 0 -> -1, each held for `sps` samples (rectangular pulse).
inline std::vector<cxd> bpsk_from_bits(const std::vector<int>& bits, std::size_t sps,
                                       std::size_t num_samples) {
    if (sps < 1) throw InvalidConfig("samples_per_symbol must be >= 1");
    if (bits.size() * sps < num_samples)
        throw DimensionMismatch("bpsk_from_bits: " + std::to_string(bits.size()) +
                                " bits cannot cover " + std::to_string(num_samples) + " samples");
    std::vector<cxd> s(num_samples);
    for (std::size_t t = 0; t < num_samples; ++t)
        s[t] = bits[t / sps] ? cxd(1.0) : cxd(-1.0);
    return s;
}

// Random equiprobable BPSK series with unit average power.
inline std::vector<cxd> gen_bpsk(std::size_t num_samples, std::size_t sps, StreamRng& rng) {
    if (num_samples == 0) throw InvalidConfig("gen_bpsk: need at least one sample");
    if (sps < 1) throw InvalidConfig("samples_per_symbol must be >= 1");
    const std::size_t nbits = (num_samples + sps - 1) / sps;
    std::vector<int> bits(nbits);
    for (std::size_t b = 0; b < nbits; ++b) bits[b] = rng.next_bit();
    return bpsk_from_bits(bits, sps, num_samples);
}

// tanh(alpha x)/alpha applied independently to the I and Q component of
// every entry. Compressive: |output component| <= min(|x|, 1/alpha).
inline ComplexMatrix apply_nonlinearity(const ComplexMatrix& z, double alpha) {
    if (!(alpha > 0.0)) throw InvalidConfig("alpha must be > 0");
    ComplexMatrix out(z.rows(), z.cols());
    const double inv_alpha = 1.0 / alpha;
    for (std::size_t i = 0; i < z.data().size(); ++i) {
        const cxd v = z.data()[i];
        out.data()[i] = {std::tanh(alpha * v.real()) * inv_alpha,
                         std::tanh(alpha * v.imag()) * inv_alpha};
    }
    return out;
}

struct Scene {
    ComplexMatrix z_linear;            // M x L
    ComplexMatrix z_nonlinear;         // tanh(alpha z)/alpha of the above
    std::vector<bool> soi_active_mask; // true iff t >= onset_t0
    SceneConfig config;
};

// Two-source scene: always-on BPSK interferer, SOI gated on at onset_t0,
// circular complex AWGN. Deterministic given config.seed; the interferer
// bits, SOI bits and noise draw from independent substreams, so zeroing one
// gain leaves the other contributions unchanged. Noise is consumed in
// (time, antenna) order.
inline Scene synthesize_scene(const SceneConfig& cfg) {
    validate(cfg);
    const std::size_t m_ant = cfg.num_antennas;
    const std::size_t len = cfg.num_samples;

    const std::vector<cxd> x1 = steering_vector(cfg.dir_interferer, m_ant);
    const std::vector<cxd> x2 = steering_vector(cfg.dir_soi, m_ant);
    const double g1 = std::sqrt(cfg.noise_variance * std::pow(10.0, cfg.inr_db / 10.0));
    const double g2 = std::sqrt(cfg.noise_variance * std::pow(10.0, cfg.snr_db / 10.0));

    StreamRng rng_a1(cfg.seed, RngStream::interferer_bits);
    StreamRng rng_a2(cfg.seed, RngStream::soi_bits);
    StreamRng rng_noise(cfg.seed, RngStream::noise);

    const std::vector<cxd> a1 = gen_bpsk(len, cfg.samples_per_symbol, rng_a1);
    const std::vector<cxd> a2 = gen_bpsk(len, cfg.samples_per_symbol, rng_a2);

    Scene scene;
    scene.config = cfg;
    scene.z_linear = ComplexMatrix(m_ant, len);
    scene.soi_active_mask.assign(len, false);
    for (std::size_t t = 0; t < len; ++t) {
        const bool soi_on = t >= cfg.onset_t0;
        scene.soi_active_mask[t] = soi_on;
        for (std::size_t m = 0; m < m_ant; ++m) {
            cxd v = g1 * a1[t] * x1[m];
            if (soi_on) v += g2 * a2[t] * x2[m];
            v += rng_noise.complex_gaussian(cfg.noise_variance);
            scene.z_linear(m, t) = v;
        }
    }
    scene.z_nonlinear = apply_nonlinearity(scene.z_linear, cfg.alpha);
    return scene;
}

// Identity of a scene family for digests: every generation parameter except
// the per-trial seed.
inline std::string canonical_family_string(const SceneConfig& c) {
    char buf[360];
    std::snprintf(buf, sizeof buf,
                  "M=%zu;L=%zu;k=%zu;T0=%zu;u1=%.17g;u2=%.17g;inr_db=%.17g;snr_db=%.17g;"
                  "sigma2=%.17g;sps=%zu;alpha=%.17g",
                  c.num_antennas, c.num_samples, c.window_k, c.onset_t0,
                  c.dir_interferer, c.dir_soi, c.inr_db, c.snr_db,
                  c.noise_variance, c.samples_per_symbol, c.alpha);
    return buf;
}

}  // namespace nlglrt
