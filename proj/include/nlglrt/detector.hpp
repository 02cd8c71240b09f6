#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "nlglrt/complex_matrix.hpp"
#include "nlglrt/errors.hpp"

namespace nlglrt {

// Adjacent sample partitions feeding one statistic evaluation.
struct PartitionPair {
    ComplexMatrix z_old;  // M x k_old, k_old >= M
    ComplexMatrix z_new;  // M x k_new, k_new >= 1
};

struct DetectionTrace {
    std::vector<double> stat;
    std::vector<std::size_t> index_map;      // stream position where z_new starts
    std::vector<std::size_t> original_time;  // pre-edit time of the newest z_new sample
    std::size_t window_k = 0;
};

// Re tr((Z_old Z_old^H + eps I)^-1 Z_new Z_new^H). The trace of a product of
// an HPD and a PSD matrix is real; the imaginary part is rounding noise only.
inline double glrt_statistic(const PartitionPair& pair, const HpdInverseOptions& opts = {}) {
    if (pair.z_old.rows() != pair.z_new.rows())
        throw DimensionMismatch("glrt_statistic: partitions have different antenna counts");
    if (pair.z_old.cols() < pair.z_old.rows())
        throw DimensionMismatch("glrt_statistic: z_old needs at least as many samples as antennas");
    if (pair.z_new.cols() == 0)
        throw DimensionMismatch("glrt_statistic: z_new is empty");
    const ComplexMatrix r_old_inv = hpd_inverse(gram(pair.z_old), opts);
    const ComplexMatrix r_new = gram(pair.z_new);
    return trace(multiply(r_old_inv, r_new)).real();
}

// Statistic at every shift s: windows [s, s+k) vs [s+k, s+2k), shifted one
// sample per evaluation. Output length is cols - 2k + 1. The reported
// original_time anchors each evaluation at the newest z_new sample (the
// latest time the onset must have occurred by), so an evaluation is "at" the
// onset exactly when its z_new window contains it.
inline DetectionTrace sliding_trace(const ComplexMatrix& z, std::size_t k,
                                    const HpdInverseOptions& opts = {}) {
    if (k < z.rows())
        throw DimensionMismatch("sliding_trace: window_k must be >= antenna count");
    if (z.cols() < 2 * k)
        throw WindowTooLarge("sliding_trace: need at least " + std::to_string(2 * k) +
                             " samples, have " + std::to_string(z.cols()));
    const std::size_t evals = z.cols() - 2 * k + 1;
    DetectionTrace tr;
    tr.window_k = k;
    tr.stat.resize(evals);
    tr.index_map.resize(evals);
    tr.original_time.resize(evals);
    for (std::size_t s = 0; s < evals; ++s) {
        PartitionPair pair{columns(z, s, k), columns(z, s + k, k)};
        tr.stat[s] = glrt_statistic(pair, opts);
        tr.index_map[s] = s + k;
        tr.original_time[s] = s + 2 * k - 1;
    }
    return tr;
}

inline std::vector<bool> threshold_decisions(const DetectionTrace& tr, double gamma) {
    std::vector<bool> out(tr.stat.size());
    for (std::size_t i = 0; i < tr.stat.size(); ++i) out[i] = tr.stat[i] >= gamma;
    return out;
}

// Rewrites original_time through the kept-column table produced by editing,
// so trace anchors refer to pre-edit sample times again.
inline void remap_original_time(DetectionTrace& tr, const std::vector<std::size_t>& kept_indices) {
    for (std::size_t i = 0; i < tr.index_map.size(); ++i) {
        const std::size_t pos = tr.index_map[i] + tr.window_k - 1;  // newest z_new sample
        if (pos >= kept_indices.size())
            throw DimensionMismatch("remap_original_time: index " + std::to_string(pos) +
                                    " outside kept table of size " +
                                    std::to_string(kept_indices.size()));
        tr.original_time[i] = kept_indices[pos];
    }
}

}  // namespace nlglrt
