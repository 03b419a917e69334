// SPDX-License-Identifier: Apache-2.0
#include "bitkv/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "bitkv/errors.hpp"
#include "bitkv/fp16.hpp"

namespace bitkv {

std::vector<float> naive_attention(const float* q, size_t q_rows, const float* k, const float* v,
                                   size_t len, size_t d) {
    const float inv_sqrt_d = 1.0f / std::sqrt(static_cast<float>(d));
    std::vector<float> out(q_rows * d, 0.0f);
    std::vector<float> scores(len);
    for (size_t i = 0; i < q_rows; ++i) {
        for (size_t j = 0; j < len; ++j) {
            float s = 0.0f;
            for (size_t c = 0; c < d; ++c) s += q[i * d + c] * k[j * d + c];
            scores[j] = s * inv_sqrt_d;
        }
        float m = -std::numeric_limits<float>::infinity();
        for (size_t j = 0; j < len; ++j) m = std::max(m, scores[j]);
        float l = 0.0f;
        for (size_t j = 0; j < len; ++j) {
            scores[j] = std::exp(scores[j] - m);
            l += scores[j];
        }
        for (size_t c = 0; c < d; ++c) {
            float acc = 0.0f;
            for (size_t j = 0; j < len; ++j) acc += scores[j] * v[j * d + c];
            out[i * d + c] = acc / l;
        }
    }
    return out;
}

namespace {

// Reference group quantize/dequantize, written out longhand on purpose: this
// is the yardstick the quant and kvcache modules are measured against.
void reference_roundtrip_group(const float* x, size_t stride, size_t n, uint32_t num_bits,
                               float* out) {
    float lo = x[0];
    float hi = x[0];
    for (size_t i = 1; i < n; ++i) {
        lo = std::min(lo, x[i * stride]);
        hi = std::max(hi, x[i * stride]);
    }
    const float qmax = static_cast<float>((1u << num_bits) - 1u);
    float scale = round_f16((hi - lo) / qmax);
    if (!(scale >= kMinScale)) scale = kMinScale;
    const float zero = round_f16(lo);
    for (size_t i = 0; i < n; ++i) {
        const float c = std::clamp(std::nearbyintf((x[i * stride] - zero) / scale), 0.0f, qmax);
        out[i * stride] = round_f16(c * scale + zero);
    }
}

void reference_block(const float* block, size_t rows, size_t d, uint32_t num_bits, QuantAxis axis,
                     size_t group_size, float* out) {
    if (axis == QuantAxis::KChannel) {
        if (rows % group_size != 0) throw ShapeError("group_size must divide block rows");
        for (size_t gr = 0; gr < rows / group_size; ++gr) {
            for (size_t c = 0; c < d; ++c) {
                reference_roundtrip_group(block + (gr * group_size) * d + c, d, group_size,
                                          num_bits, out + (gr * group_size) * d + c);
            }
        }
    } else {
        if (d % group_size != 0) throw ShapeError("group_size must divide head_dim");
        for (size_t t = 0; t < rows; ++t) {
            for (size_t gc = 0; gc < d / group_size; ++gc) {
                reference_roundtrip_group(block + t * d + gc * group_size, 1, group_size, num_bits,
                                          out + t * d + gc * group_size);
            }
        }
    }
}

}  // namespace

void offline_quant_reference(const float* k, const float* v, size_t len, size_t d,
                             const QuantSpec& spec, size_t n_r, float* k_out, float* v_out) {
    std::copy(k, k + len * d, k_out);
    std::copy(v, v + len * d, v_out);
    if (spec.passthrough()) return;
    const size_t full = len - len % n_r;
    for (size_t t0 = 0; t0 < full; t0 += n_r) {
        reference_block(k + t0 * d, n_r, d, spec.num_bits, spec.k_axis, spec.group_size,
                        k_out + t0 * d);
        reference_block(v + t0 * d, n_r, d, spec.num_bits, QuantAxis::KToken, spec.group_size,
                        v_out + t0 * d);
    }
}

OracleReport compare(std::span<const float> engine_out, std::span<const float> oracle_out) {
    if (engine_out.size() != oracle_out.size()) {
        throw ShapeError("compare: outputs differ in length");
    }
    OracleReport rep;
    double dot = 0.0, na = 0.0, nb = 0.0, diff2 = 0.0;
    for (size_t i = 0; i < engine_out.size(); ++i) {
        const double a = engine_out[i];
        const double b = oracle_out[i];
        rep.max_abs_err = std::max(rep.max_abs_err, std::abs(a - b));
        dot += a * b;
        na += a * a;
        nb += b * b;
        diff2 += (a - b) * (a - b);
    }
    rep.rel_l2_err = nb > 0.0 ? std::sqrt(diff2) / std::sqrt(nb) : std::sqrt(diff2);
    if (na == 0.0 && nb == 0.0) {
        rep.cosine_similarity = 1.0;
    } else if (na == 0.0 || nb == 0.0) {
        rep.cosine_similarity = 0.0;
    } else {
        rep.cosine_similarity = dot / (std::sqrt(na) * std::sqrt(nb));
    }
    return rep;
}

}  // namespace bitkv
