#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "nlglrt/detector.hpp"
#include "nlglrt/rng.hpp"
#include "nlglrt/signal.hpp"

using nlglrt::ComplexMatrix;
using nlglrt::cxd;
using nlglrt::PartitionPair;

namespace {

ComplexMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    nlglrt::StreamRng rng(seed, nlglrt::RngStream::generic);
    ComplexMatrix m(rows, cols);
    for (auto& v : m.data()) v = {rng.gaussian(), rng.gaussian()};
    return m;
}

// Independent statistic oracle: Gauss-Jordan inverse with partial pivoting
// plus explicit products, no shared code with the library path.
double glrt_oracle(const ComplexMatrix& z_old, const ComplexMatrix& z_new) {
    const std::size_t n = z_old.rows();
    std::vector<std::vector<cxd>> r_old(n, std::vector<cxd>(n, 0.0));
    std::vector<std::vector<cxd>> r_new(n, std::vector<cxd>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t t = 0; t < z_old.cols(); ++t)
                r_old[i][j] += z_old(i, t) * std::conj(z_old(j, t));
            for (std::size_t t = 0; t < z_new.cols(); ++t)
                r_new[i][j] += z_new(i, t) * std::conj(z_new(j, t));
        }
    // augmented Gauss-Jordan elimination
    std::vector<std::vector<cxd>> aug(n, std::vector<cxd>(2 * n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) aug[i][j] = r_old[i][j];
        aug[i][n + i] = 1.0;
    }
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t rr = col + 1; rr < n; ++rr)
            if (std::abs(aug[rr][col]) > std::abs(aug[piv][col])) piv = rr;
        std::swap(aug[col], aug[piv]);
        const cxd d = aug[col][col];
        for (std::size_t j = 0; j < 2 * n; ++j) aug[col][j] /= d;
        for (std::size_t rr = 0; rr < n; ++rr) {
            if (rr == col) continue;
            const cxd f = aug[rr][col];
            for (std::size_t j = 0; j < 2 * n; ++j) aug[rr][j] -= f * aug[col][j];
        }
    }
    cxd tr = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) tr += aug[i][n + k] * r_new[k][i];
    return tr.real();
}

}  // namespace

TEST_CASE("statistic on identical partitions equals the antenna count") {
    const ComplexMatrix z = random_matrix(4, 48, 3);
    const double s = nlglrt::glrt_statistic({z, z});
    CHECK(std::abs(s - 4.0) < 1e-9);
}

TEST_CASE("scaling the new partition scales the statistic") {
    const ComplexMatrix z = random_matrix(4, 48, 4);
    const double base = nlglrt::glrt_statistic({z, z});
    ComplexMatrix doubled = z;
    for (auto& v : doubled.data()) v *= 2.0;  // power-of-two scale, exact in binary
    CHECK(nlglrt::glrt_statistic({z, doubled}) == 4.0 * base);

    ComplexMatrix rotated = z;
    for (auto& v : rotated.data()) v *= cxd(1.0, 1.0);  // |c|^2 = 2
    CHECK(nlglrt::glrt_statistic({z, rotated}) == doctest::Approx(2.0 * base).epsilon(1e-12));
}

TEST_CASE("statistic matches the elimination oracle") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const ComplexMatrix z_old = random_matrix(4, 48, 40 + seed);
        const ComplexMatrix z_new = random_matrix(4, 48, 90 + seed);
        const double lib = nlglrt::glrt_statistic({z_old, z_new});
        const double ref = glrt_oracle(z_old, z_new);
        CHECK(std::abs(lib - ref) / std::abs(ref) < 1e-9);
    }
}

TEST_CASE("statistic is invariant under joint invertible transforms") {
    nlglrt::StreamRng rng(55, nlglrt::RngStream::generic);
    for (int rep = 0; rep < 10; ++rep) {
        const ComplexMatrix z_old = random_matrix(4, 48, 400 + rep);
        const ComplexMatrix z_new = random_matrix(4, 48, 500 + rep);
        ComplexMatrix t(4, 4);
        for (std::size_t i = 0; i < 4; ++i) {
            for (std::size_t j = 0; j < 4; ++j)
                t(i, j) = {0.5 * rng.uniform_sym(), 0.5 * rng.uniform_sym()};
            t(i, i) += 2.0;  // diagonally dominant, safely invertible
        }
        const double base = nlglrt::glrt_statistic({z_old, z_new});
        const double moved =
            nlglrt::glrt_statistic({nlglrt::multiply(t, z_old), nlglrt::multiply(t, z_new)});
        CHECK(std::abs(moved - base) / std::abs(base) < 1e-6);
    }
}

TEST_CASE("the trace product of Hermitian factors is numerically real") {
    const ComplexMatrix z_old = random_matrix(4, 48, 61);
    const ComplexMatrix z_new = random_matrix(4, 48, 62);
    const cxd tr = nlglrt::trace(
        nlglrt::multiply(nlglrt::hpd_inverse(nlglrt::gram(z_old)), nlglrt::gram(z_new)));
    CHECK(std::abs(tr.imag()) < 1e-9);
}

TEST_CASE("statistic validates partition shapes") {
    const ComplexMatrix a = random_matrix(4, 48, 70);
    const ComplexMatrix b = random_matrix(3, 48, 71);
    CHECK_THROWS_AS(nlglrt::glrt_statistic({a, b}), nlglrt::DimensionMismatch);
    const ComplexMatrix thin = random_matrix(4, 3, 72);  // k_old < M
    CHECK_THROWS_AS(nlglrt::glrt_statistic({thin, a}), nlglrt::DimensionMismatch);
}

TEST_CASE("sliding trace has length L - 2k + 1 and anchored index map") {
    nlglrt::SceneConfig cfg;
    cfg.num_samples = 400;
    cfg.onset_t0 = 200;
    const auto scene = nlglrt::synthesize_scene(cfg);
    const auto tr = nlglrt::sliding_trace(scene.z_linear, cfg.window_k, {0.0, 1e-9});
    CHECK(tr.stat.size() == cfg.num_samples - 2 * cfg.window_k + 1);
    CHECK(tr.index_map.front() == cfg.window_k);
    CHECK(tr.index_map.back() == cfg.num_samples - cfg.window_k);
    CHECK(std::is_sorted(tr.index_map.begin(), tr.index_map.end()));
    CHECK(tr.window_k == cfg.window_k);
    for (std::size_t i = 0; i < tr.index_map.size(); ++i)
        CHECK(tr.original_time[i] == tr.index_map[i] + cfg.window_k - 1);
    CHECK(tr.original_time.back() == cfg.num_samples - 1);
}

TEST_CASE("stationary noise produces no isolated extreme peak") {
    nlglrt::SceneConfig cfg;
    cfg.num_samples = 240;
    cfg.onset_t0 = 120;
    cfg.inr_db = -std::numeric_limits<double>::infinity();
    cfg.snr_db = -std::numeric_limits<double>::infinity();
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        cfg.seed = seed;
        const auto scene = nlglrt::synthesize_scene(cfg);
        const auto tr = nlglrt::sliding_trace(scene.z_linear, cfg.window_k, {0.0, 1e-9});
        std::vector<double> sorted = tr.stat;
        std::sort(sorted.begin(), sorted.end());
        const double median = sorted[sorted.size() / 2];
        CHECK(sorted.front() >= 0.0);  // HPD old window keeps the statistic non-negative
        CHECK(sorted.back() < 10.0 * median);
    }
}

TEST_CASE("linear scene peaks inside the onset window") {
    nlglrt::SceneConfig cfg;  // strong-interferer defaults, T0 = 1000, k = 48
    cfg.seed = 123;
    const auto scene = nlglrt::synthesize_scene(cfg);
    const auto tr = nlglrt::sliding_trace(scene.z_linear, cfg.window_k, {0.0, 1e-9});
    const std::size_t argmax =
        std::max_element(tr.stat.begin(), tr.stat.end()) - tr.stat.begin();
    const std::size_t peak_time = tr.original_time[argmax];
    CHECK(peak_time >= cfg.onset_t0);
    CHECK(peak_time <= cfg.onset_t0 + cfg.window_k);
}

TEST_CASE("L = 2k leaves exactly one evaluation") {
    const ComplexMatrix z = random_matrix(4, 96, 81);
    const auto tr = nlglrt::sliding_trace(z, 48);
    CHECK(tr.stat.size() == 1);
    CHECK(tr.index_map[0] == 48);
}

TEST_CASE("sliding trace rejects short streams and thin windows") {
    const ComplexMatrix z = random_matrix(4, 95, 82);
    CHECK_THROWS_AS(nlglrt::sliding_trace(z, 48), nlglrt::WindowTooLarge);
    CHECK_THROWS_AS(nlglrt::sliding_trace(z, 3), nlglrt::DimensionMismatch);
}

TEST_CASE("threshold decisions follow the statistic") {
    const ComplexMatrix z = random_matrix(4, 200, 83);
    const auto tr = nlglrt::sliding_trace(z, 48);
    const auto all = nlglrt::threshold_decisions(tr, -std::numeric_limits<double>::infinity());
    CHECK(std::count(all.begin(), all.end(), true) == static_cast<long>(tr.stat.size()));

    const double above = *std::max_element(tr.stat.begin(), tr.stat.end()) + 1.0;
    const auto none = nlglrt::threshold_decisions(tr, above);
    CHECK(std::count(none.begin(), none.end(), true) == 0);

    std::vector<double> sorted = tr.stat;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    const auto mid = nlglrt::threshold_decisions(tr, median);
    std::size_t direct = 0;
    for (const double s : tr.stat)
        if (s >= median) ++direct;
    CHECK(std::count(mid.begin(), mid.end(), true) == static_cast<long>(direct));
}

TEST_CASE("remapping original time follows the kept-index table") {
    const ComplexMatrix z = random_matrix(4, 100, 84);
    auto tr = nlglrt::sliding_trace(z, 48);
    std::vector<std::size_t> kept(100);
    for (std::size_t i = 0; i < kept.size(); ++i) kept[i] = 2 * i + 5;  // fake edit table
    nlglrt::remap_original_time(tr, kept);
    for (std::size_t i = 0; i < tr.index_map.size(); ++i)
        CHECK(tr.original_time[i] == 2 * (tr.index_map[i] + 47) + 5);
}
