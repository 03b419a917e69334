// SPDX-License-Identifier: Apache-2.0
#include "bitkv/layout.hpp"

#include <string>

#include "bitkv/errors.hpp"

namespace bitkv {

namespace {

void check_bits(uint32_t num_bits) {
    if (num_bits != 2 && num_bits != 4 && num_bits != 8 && num_bits != 16) {
        throw UnsupportedBits("num_bits must be one of 2, 4, 8, 16; got " +
                              std::to_string(num_bits));
    }
}

}  // namespace

InterleavePerm interleave_order(uint32_t num_bits) {
    check_bits(num_bits);
    InterleavePerm perm;
    perm.num_bits = num_bits;
    perm.pack_num = 16 / num_bits;
    uint32_t k = 0;
    for (uint32_t i = perm.pack_num; i-- > 0;) {
        if (i % 2 == 1) perm.order[k++] = static_cast<uint8_t>(i);
    }
    for (uint32_t i = perm.pack_num; i-- > 0;) {
        if (i % 2 == 0) perm.order[k++] = static_cast<uint8_t>(i);
    }
    return perm;
}

InterleavePerm identity_order(uint32_t num_bits) {
    check_bits(num_bits);
    InterleavePerm perm;
    perm.num_bits = num_bits;
    perm.pack_num = 16 / num_bits;
    for (uint32_t i = 0; i < perm.pack_num; ++i) perm.order[i] = static_cast<uint8_t>(i);
    return perm;
}

uint16_t pack_word(std::span<const uint16_t> codes, const InterleavePerm& perm) {
    if (codes.size() != perm.pack_num) {
        throw ShapeError("pack_word expects exactly pack_num codes");
    }
    const uint32_t limit = perm.num_bits >= 16 ? 0x10000u : (1u << perm.num_bits);
    uint32_t word = 0;
    for (uint32_t k = 0; k < perm.pack_num; ++k) {
        const uint32_t code = codes[perm.order[k]];
        if (code >= limit) {
            throw CodeOverflow("code " + std::to_string(code) + " does not fit in " +
                               std::to_string(perm.num_bits) + " bits");
        }
        const uint32_t shift = 16 - (k + 1) * perm.num_bits;
        word |= code << shift;
    }
    return static_cast<uint16_t>(word);
}

void unpack_word(uint16_t word, const InterleavePerm& perm, std::span<uint16_t> codes_out) {
    if (codes_out.size() != perm.pack_num) {
        throw ShapeError("unpack_word expects exactly pack_num output slots");
    }
    const uint32_t mask = perm.num_bits >= 16 ? 0xFFFFu : (1u << perm.num_bits) - 1u;
    for (uint32_t k = 0; k < perm.pack_num; ++k) {
        const uint32_t shift = 16 - (k + 1) * perm.num_bits;
        codes_out[perm.order[k]] = static_cast<uint16_t>((word >> shift) & mask);
    }
}

size_t residual_block_size(uint32_t num_bits, size_t warp_n) {
    check_bits(num_bits);
    return 8 * warp_n * (16 / num_bits);
}

size_t iteration_count(size_t tile_n, size_t warp_n) {
    const size_t stride = warp_n * 8;
    if (stride == 0 || tile_n % stride != 0) {
        throw ShapeError("tile_n (" + std::to_string(tile_n) +
                         ") must be a multiple of warp_n*8 (" + std::to_string(stride) + ")");
    }
    return tile_n / stride;
}

}  // namespace bitkv
