// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

#include "bitkv/tensor.hpp"

namespace bitkv {

// Geometry shared by every attention operation. warp_n / warp_m are logical
// partition factors along the key and query tile dimensions; they shape the
// partitioned softmax reduction and the residual block size, not threads.
struct AttentionConfig {
    size_t batch = 1;
    size_t heads_q = 32;
    size_t heads_kv = 8;
    size_t head_dim = 128;  // d
    size_t tile_m = 1;      // T_m
    size_t tile_n = 64;     // T_n
    size_t num_splits = 1;
    size_t warp_n = 4;      // W_n
    size_t warp_m = 1;      // W_m

    size_t n_group() const { return heads_q / heads_kv; }
};

// Returns cfg unchanged iff every invariant holds; throws ConfigError naming
// the violated invariant otherwise.
AttentionConfig validate_config(const AttentionConfig& cfg);

// Regroups query heads so that the n_group heads sharing one KV head form a
// tile: [1, heads_q, d] -> [n_group, heads_kv, d], with output head (g, h)
// taken from input head h * n_group + g. Pure element permutation.
Tensor gqa_transform(const Tensor& q, size_t n_group);

// Inverse of gqa_transform: [n_group, heads_kv, d] -> [1, heads_q, d].
Tensor gqa_untransform(const Tensor& q, size_t n_group);

}  // namespace bitkv
