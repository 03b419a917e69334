// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace bitkv {

// Element permutation inside one 16-bit storage word. order[k] is the
// logical element index held by field k, counting fields from the most
// significant B bits down. pack_num * num_bits == 16 always.
struct InterleavePerm {
    uint32_t num_bits = 0;
    uint32_t pack_num = 0;
    std::array<uint8_t, 8> order{};

    std::array<uint8_t, 8> inverse() const {
        std::array<uint8_t, 8> inv{};
        for (uint32_t k = 0; k < pack_num; ++k) inv[order[k]] = static_cast<uint8_t>(k);
        return inv;
    }
};

// The interleaved layout: odd logical indices descending, then even indices
// descending (the 8-element case reads 75316420). Supported widths: 2, 4, 8
// plus 16 for passthrough words holding a single element.
InterleavePerm interleave_order(uint32_t num_bits);

// Identity layout with the same pack geometry; used by the no-interleave
// ablation. Writer and reader must agree on the permutation either way.
InterleavePerm identity_order(uint32_t num_bits);

// Packs pack_num codes into one word, field k holding codes[order[k]].
// Throws CodeOverflow if any code needs more than num_bits bits.
uint16_t pack_word(std::span<const uint16_t> codes, const InterleavePerm& perm);

// Exact inverse of pack_word for the same permutation.
void unpack_word(uint16_t word, const InterleavePerm& perm, std::span<uint16_t> codes_out);

// Residual block size N_r = 8 * W_n * pack_num: the token granularity at
// which the residual cache is quantized, packed, and committed.
size_t residual_block_size(uint32_t num_bits, size_t warp_n);

// Per-partition iteration count T_n / (W_n * 8); ShapeError if not whole.
size_t iteration_count(size_t tile_n, size_t warp_n);

// XOR column swizzle used for conflict-free staging layouts; pure math here.
inline size_t swizzle_col(size_t row, size_t col) { return row ^ col; }

}  // namespace bitkv
