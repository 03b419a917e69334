// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bitkv/fp16.hpp"

namespace bitkv {

enum class QuantAxis : uint32_t {
    KChannel = 0,  // groups run along the token dimension, one per channel
    KToken = 1,    // groups run along the d dimension, one per token
};

// Bit width and grouping for the key tensor; values are always quantized
// token-wise. num_bits == 16 selects passthrough (no quantization at all).
struct QuantSpec {
    uint32_t num_bits = 4;
    QuantAxis k_axis = QuantAxis::KChannel;
    size_t group_size = 64;

    bool passthrough() const { return num_bits == 16; }
};

// Per-group (scale, zero) pairs stored adjacently as binary16 bits so one
// 32-bit load fetches both. Grid shape:
//   channel-wise: (rows/group_size, d)   token-wise: (rows, d/group_size)
struct QuantParams {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<uint16_t> data;  // 2 * rows * cols entries

    size_t group_count() const { return rows * cols; }
    float scale(size_t g) const { return f16_bits_to_f32(data[2 * g]); }
    float zero(size_t g) const { return f16_bits_to_f32(data[2 * g + 1]); }
    void push(float scale, float zero) {
        data.push_back(f32_to_f16_bits(scale));
        data.push_back(f32_to_f16_bits(zero));
    }
    bool operator==(const QuantParams&) const = default;
};

struct GroupParams {
    float scale;
    float zero;
};

// Smallest scale: the bottom of the binary16 normal range. Degenerate groups
// (max == min) clamp here and dequantize back to the zero-point exactly.
inline constexpr float kMinScale = 6.103515625e-05f;  // 2^-14

// zero = min(group); scale = (max - min) / (2^B - 1), clamped below by
// kMinScale; both rounded to the nearest binary16 value.
GroupParams compute_group_params(std::span<const float> group, uint32_t num_bits);

// codes[i] = clamp(round_half_even((x - zero) / scale), 0, 2^B - 1).
void quantize_group(std::span<const float> group, float scale, float zero, uint32_t num_bits,
                    std::span<uint16_t> codes_out);

// values[i] = code * scale + zero in 32-bit arithmetic. Rounding to storage
// precision happens where values land in a tensor or staging tile, not here.
void dequantize_group(std::span<const uint16_t> codes, float scale, float zero,
                      std::span<float> values_out);

struct QuantizedTile {
    std::vector<uint16_t> codes;  // row-major [rows, d]
    QuantParams params;
};

// Group-wise quantization of a row-major [rows, d] tile along the given
// axis. ShapeError if group_size does not divide the grouped extent.
QuantizedTile quantize_tile(const float* tile, size_t rows, size_t d, uint32_t num_bits,
                            QuantAxis axis, size_t group_size);

// Reconstructs a [rows, d] tile from codes + params; each element is rounded
// to its binary16-representable storage value.
void dequantize_tile(const std::vector<uint16_t>& codes, const QuantParams& params, size_t rows,
                     size_t d, QuantAxis axis, size_t group_size, float* out);

}  // namespace bitkv
