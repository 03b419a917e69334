// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "bitkv/config.hpp"
#include "bitkv/kvcache.hpp"
#include "bitkv/tensor.hpp"

namespace bitkv {

// Running state of online softmax over one query tile: unnormalized output
// accumulator O, per-row running max m, and per-row running exp-sum l. The
// normalized result O / l is taken only at combine time.
struct PartialOutput {
    size_t rows = 0;
    size_t d = 0;
    std::vector<float> o;  // rows * d
    std::vector<float> m;  // rows, starts at -inf
    std::vector<float> l;  // rows, starts at 0

    static PartialOutput init(size_t rows, size_t d);
};

// Scratch for the partitioned softmax: per-partition row maxima plus a
// score-tile staging area the probability tile is written through before the
// PV product consumes it.
struct StagingBuffer {
    std::vector<float> partition_max;  // warp_n entries
    std::vector<float> p_tile;         // tile_m * tile_n

    void reserve(size_t warp_n, size_t tile_m, size_t tile_n);
};

// Row max of s [rows, cols] computed as warp_n partition reductions merged
// through buf.partition_max; equals the direct row max exactly.
// ShapeError unless cols % warp_n == 0.
void partitioned_rowmax(const float* s, size_t rows, size_t cols, size_t warp_n,
                        StagingBuffer& buf, float* rowmax_out);

// One online-softmax step over a key/value tile:
//   S = scale_factor * Q K^T, m' = max(m, rowmax S), P = exp(S - m'),
//   l' = l * e^(m-m') + rowsum P, O' = P V + diag(e^(m-m')) O.
// The rescale factor e^(m-m') is 0 while m is still -inf. Row max uses the
// partitioned reduction when tile_n divides by warp_n, direct otherwise
// (ragged residual tiles).
void attend_tile(PartialOutput& state, const float* q, const float* k, const float* v,
                 size_t tile_n, size_t d, float scale_factor, size_t warp_n, StagingBuffer& buf);

// Attends over the residual tokens of cell (b, h). When the residual is full
// (res_len == N_r) also returns the packed block built from the same
// buffers, for the cache-update phase to commit. StateError if empty.
std::optional<PackedBlock> residual_attend(const KVCache& cache, size_t b, size_t h,
                                           const float* q, size_t q_rows, float scale_factor,
                                           size_t warp_n, PartialOutput& state,
                                           StagingBuffer& buf);

// Attends over the packed segment of cell (b, h), split into num_splits
// contiguous token ranges walked tile-by-tile (dequantize tile, then attend).
// Returns one PartialOutput per non-empty split; empty packed cache gives {}.
std::vector<PartialOutput> packed_attend(const KVCache& cache, size_t b, size_t h, const float* q,
                                         size_t q_rows, size_t tile_n, size_t num_splits,
                                         float scale_factor, size_t warp_n);

// Log-sum-exp reduction of partial outputs:
//   m* = max m_i, O = sum O_i e^(m_i - m*), l = sum l_i e^(m_i - m*),
// returning O / l. EmptyInput if partials is empty.
std::vector<float> combine(std::span<const PartialOutput> partials);

// Engine output for one decode step, f32 (comparison precision).
struct AttnOutput {
    size_t batch = 0;
    size_t heads = 0;
    size_t d = 0;
    std::vector<float> data;  // batch * heads * d

    float* row(size_t b, size_t h) { return data.data() + (b * heads + h) * d; }
    const float* row(size_t b, size_t h) const { return data.data() + (b * heads + h) * d; }
};

// One decode step over a batch: appends the new token, runs the residual and
// packed paths per (batch, kv_head) with the grouped query tile, combines,
// and commits full residual blocks afterwards.
//   q: [batch, heads_q, d], k_new/v_new: [batch, heads_kv, d].
AttnOutput decode_step(KVCache& cache, const AttentionConfig& cfg, const Tensor& q,
                       const Tensor& k_new, const Tensor& v_new);

}  // namespace bitkv
