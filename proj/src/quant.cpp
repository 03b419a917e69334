// SPDX-License-Identifier: Apache-2.0
#include "bitkv/quant.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bitkv/errors.hpp"

namespace bitkv {

namespace {

uint32_t qmax_for(uint32_t num_bits) { return (1u << num_bits) - 1u; }

}  // namespace

GroupParams compute_group_params(std::span<const float> group, uint32_t num_bits) {
    float lo = group[0];
    float hi = group[0];
    for (float x : group) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    float scale = round_f16((hi - lo) / static_cast<float>(qmax_for(num_bits)));
    if (!(scale >= kMinScale)) scale = kMinScale;
    return GroupParams{scale, round_f16(lo)};
}

void quantize_group(std::span<const float> group, float scale, float zero, uint32_t num_bits,
                    std::span<uint16_t> codes_out) {
    const float qmax = static_cast<float>(qmax_for(num_bits));
    for (size_t i = 0; i < group.size(); ++i) {
        // nearbyintf rounds half to even under the default FP environment.
        const float c = std::nearbyintf((group[i] - zero) / scale);
        codes_out[i] = static_cast<uint16_t>(std::clamp(c, 0.0f, qmax));
    }
}

void dequantize_group(std::span<const uint16_t> codes, float scale, float zero,
                      std::span<float> values_out) {
    for (size_t i = 0; i < codes.size(); ++i) {
        values_out[i] = static_cast<float>(codes[i]) * scale + zero;
    }
}

QuantizedTile quantize_tile(const float* tile, size_t rows, size_t d, uint32_t num_bits,
                            QuantAxis axis, size_t group_size) {
    const size_t grouped_extent = axis == QuantAxis::KChannel ? rows : d;
    if (group_size == 0 || grouped_extent % group_size != 0) {
        throw ShapeError("group_size (" + std::to_string(group_size) +
                         ") must divide the grouped extent (" + std::to_string(grouped_extent) +
                         ")");
    }

    QuantizedTile out;
    out.codes.assign(rows * d, 0);
    if (axis == QuantAxis::KChannel) {
        out.params.rows = rows / group_size;
        out.params.cols = d;
        out.params.data.reserve(2 * out.params.rows * out.params.cols);
        std::vector<float> group(group_size);
        std::vector<uint16_t> codes(group_size);
        for (size_t gr = 0; gr < out.params.rows; ++gr) {
            for (size_t c = 0; c < d; ++c) {
                for (size_t i = 0; i < group_size; ++i) {
                    group[i] = tile[(gr * group_size + i) * d + c];
                }
                const GroupParams p = compute_group_params(group, num_bits);
                quantize_group(group, p.scale, p.zero, num_bits, codes);
                out.params.push(p.scale, p.zero);
                for (size_t i = 0; i < group_size; ++i) {
                    out.codes[(gr * group_size + i) * d + c] = codes[i];
                }
            }
        }
    } else {
        out.params.rows = rows;
        out.params.cols = d / group_size;
        out.params.data.reserve(2 * out.params.rows * out.params.cols);
        for (size_t t = 0; t < rows; ++t) {
            for (size_t gc = 0; gc < out.params.cols; ++gc) {
                std::span<const float> group(tile + t * d + gc * group_size, group_size);
                const GroupParams p = compute_group_params(group, num_bits);
                quantize_group(group, p.scale, p.zero, num_bits,
                               std::span<uint16_t>(out.codes.data() + t * d + gc * group_size,
                                                   group_size));
                out.params.push(p.scale, p.zero);
            }
        }
    }
    return out;
}

void dequantize_tile(const std::vector<uint16_t>& codes, const QuantParams& params, size_t rows,
                     size_t d, QuantAxis axis, size_t group_size, float* out) {
    if (codes.size() != rows * d) {
        throw ShapeError("dequantize_tile: codes do not cover the tile");
    }
    for (size_t t = 0; t < rows; ++t) {
        for (size_t c = 0; c < d; ++c) {
            const size_t g = axis == QuantAxis::KChannel
                                 ? (t / group_size) * params.cols + c
                                 : t * params.cols + c / group_size;
            const float v =
                static_cast<float>(codes[t * d + c]) * params.scale(g) + params.zero(g);
            out[t * d + c] = round_f16(v);
        }
    }
}

}  // namespace bitkv
