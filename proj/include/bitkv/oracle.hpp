// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bitkv/quant.hpp"

namespace bitkv {

// Brute-force references the engine is tested against. Everything here is
// materialized, untiled, and summed left to right in 32-bit so tolerance
// budgets isolate tiling and quantization effects. Deliberately independent
// of the engine code paths.

// O = softmax(Q K^T / sqrt(d)) V with the full score matrix materialized.
// q: [q_rows, d], k/v: [len, d]; returns [q_rows, d].
std::vector<float> naive_attention(const float* q, size_t q_rows, const float* k, const float* v,
                                   size_t len, size_t d);

// Quantize + dequantize each full n_r-token block of [len, d] independently;
// the trailing partial block (and everything when spec is passthrough) is
// copied unchanged. K uses spec.k_axis, V is always token-wise.
void offline_quant_reference(const float* k, const float* v, size_t len, size_t d,
                             const QuantSpec& spec, size_t n_r, float* k_out, float* v_out);

struct OracleReport {
    double max_abs_err = 0.0;
    double rel_l2_err = 0.0;
    double cosine_similarity = 1.0;
};

// Error metrics between an engine output and its oracle, computed in double
// so tolerances near 1e-7 stay resolvable. ShapeError on length mismatch.
OracleReport compare(std::span<const float> engine_out, std::span<const float> oracle_out);

}  // namespace bitkv
