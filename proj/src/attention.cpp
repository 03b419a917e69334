// SPDX-License-Identifier: Apache-2.0
#include "bitkv/attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bitkv/errors.hpp"
#include "bitkv/parallel.hpp"

namespace bitkv {

namespace {
constexpr float kNegInf = -std::numeric_limits<float>::infinity();
}

PartialOutput PartialOutput::init(size_t rows, size_t d) {
    PartialOutput p;
    p.rows = rows;
    p.d = d;
    p.o.assign(rows * d, 0.0f);
    p.m.assign(rows, kNegInf);
    p.l.assign(rows, 0.0f);
    return p;
}

void StagingBuffer::reserve(size_t warp_n, size_t tile_m, size_t tile_n) {
    partition_max.resize(warp_n);
    p_tile.resize(tile_m * tile_n);
}

void partitioned_rowmax(const float* s, size_t rows, size_t cols, size_t warp_n,
                        StagingBuffer& buf, float* rowmax_out) {
    if (warp_n == 0 || cols % warp_n != 0) {
        throw ShapeError("partitioned_rowmax: cols must divide evenly across warp_n partitions");
    }
    const size_t slice = cols / warp_n;
    buf.partition_max.resize(warp_n);
    for (size_t i = 0; i < rows; ++i) {
        for (size_t w = 0; w < warp_n; ++w) {
            float m = kNegInf;
            const float* base = s + i * cols + w * slice;
            for (size_t j = 0; j < slice; ++j) m = std::max(m, base[j]);
            buf.partition_max[w] = m;
        }
        float m = kNegInf;
        for (size_t w = 0; w < warp_n; ++w) m = std::max(m, buf.partition_max[w]);
        rowmax_out[i] = m;
    }
}

void attend_tile(PartialOutput& state, const float* q, const float* k, const float* v,
                 size_t tile_n, size_t d, float scale_factor, size_t warp_n, StagingBuffer& buf) {
    const size_t rows = state.rows;
    buf.p_tile.resize(rows * tile_n);
    float* s = buf.p_tile.data();

    for (size_t i = 0; i < rows; ++i) {
        for (size_t j = 0; j < tile_n; ++j) {
            float acc = 0.0f;
            for (size_t c = 0; c < d; ++c) acc += q[i * d + c] * k[j * d + c];
            s[i * tile_n + j] = acc * scale_factor;
        }
    }

    std::vector<float> tile_max(rows);
    const size_t w = (warp_n > 0 && tile_n % warp_n == 0) ? warp_n : 1;
    partitioned_rowmax(s, rows, tile_n, w, buf, tile_max.data());

    for (size_t i = 0; i < rows; ++i) {
        const float m_new = std::max(state.m[i], tile_max[i]);
        const float rescale = state.m[i] == kNegInf ? 0.0f : std::exp(state.m[i] - m_new);
        // P is staged in 32-bit; the PV product reads it back from the
        // staging tile.
        float rowsum = 0.0f;
        for (size_t j = 0; j < tile_n; ++j) {
            const float p = std::exp(s[i * tile_n + j] - m_new);
            s[i * tile_n + j] = p;
            rowsum += p;
        }
        float* o = state.o.data() + i * d;
        for (size_t c = 0; c < d; ++c) {
            float acc = 0.0f;
            for (size_t j = 0; j < tile_n; ++j) acc += s[i * tile_n + j] * v[j * d + c];
            o[c] = acc + rescale * o[c];
        }
        state.l[i] = state.l[i] * rescale + rowsum;
        state.m[i] = m_new;
    }
}

std::optional<PackedBlock> residual_attend(const KVCache& cache, size_t b, size_t h,
                                           const float* q, size_t q_rows, float scale_factor,
                                           size_t warp_n, PartialOutput& state,
                                           StagingBuffer& buf) {
    const size_t len = cache.res_len(b, h);
    if (len == 0) throw StateError("residual_attend: residual cache is empty");
    if (state.rows != q_rows) throw ShapeError("residual_attend: state rows != q rows");
    const size_t d = cache.head_dim();
    std::vector<float> k(len * d), v(len * d);
    cache.residual_tile(b, h, k.data(), v.data());
    attend_tile(state, q, k.data(), v.data(), len, d, scale_factor, warp_n, buf);
    if (len == cache.n_r()) return cache.build_block(b, h);
    return std::nullopt;
}

std::vector<PartialOutput> packed_attend(const KVCache& cache, size_t b, size_t h, const float* q,
                                         size_t q_rows, size_t tile_n, size_t num_splits,
                                         float scale_factor, size_t warp_n) {
    const size_t plen = cache.packed_len(b, h);
    if (plen % cache.n_r() != 0) throw ShapeError("packed segment is not block-aligned");
    std::vector<PartialOutput> partials;
    if (plen == 0) return partials;

    const size_t d = cache.head_dim();
    const size_t n_tiles = (plen + tile_n - 1) / tile_n;
    const size_t splits = std::max<size_t>(1, num_splits);
    const size_t base = n_tiles / splits;
    const size_t rem = n_tiles % splits;

    std::vector<float> k(tile_n * d), v(tile_n * d);
    StagingBuffer buf;
    size_t tile_begin = 0;
    for (size_t s = 0; s < splits; ++s) {
        const size_t count = base + (s < rem ? 1 : 0);
        if (count == 0) continue;
        const size_t t_begin = tile_begin * tile_n;
        const size_t t_end = std::min((tile_begin + count) * tile_n, plen);
        tile_begin += count;

        PartialOutput state = PartialOutput::init(q_rows, d);
        for (size_t t0 = t_begin; t0 < t_end; t0 += tile_n) {
            const size_t len = std::min(tile_n, t_end - t0);
            cache.packed_tile(b, h, t0, len, k.data(), v.data());
            attend_tile(state, q, k.data(), v.data(), len, d, scale_factor, warp_n, buf);
        }
        partials.push_back(std::move(state));
    }
    return partials;
}

std::vector<float> combine(std::span<const PartialOutput> partials) {
    if (partials.empty()) throw EmptyInput("combine: no partial outputs");
    const size_t rows = partials[0].rows;
    const size_t d = partials[0].d;
    for (const auto& p : partials) {
        if (p.rows != rows || p.d != d) throw ShapeError("combine: partial shapes differ");
    }
    std::vector<float> out(rows * d, 0.0f);
    for (size_t i = 0; i < rows; ++i) {
        float m_star = kNegInf;
        for (const auto& p : partials) m_star = std::max(m_star, p.m[i]);
        float l = 0.0f;
        for (const auto& p : partials) {
            const float w = p.m[i] == kNegInf ? 0.0f : std::exp(p.m[i] - m_star);
            l += p.l[i] * w;
            for (size_t c = 0; c < d; ++c) out[i * d + c] += p.o[i * d + c] * w;
        }
        for (size_t c = 0; c < d; ++c) out[i * d + c] /= l;
    }
    return out;
}

AttnOutput decode_step(KVCache& cache, const AttentionConfig& cfg, const Tensor& q,
                       const Tensor& k_new, const Tensor& v_new) {
    validate_config(cfg);
    const size_t d = cfg.head_dim;
    const size_t n_group = cfg.n_group();
    if (q.ndim() != 3 || q.dim(0) != cfg.batch || q.dim(1) != cfg.heads_q || q.dim(2) != d) {
        throw ShapeError("decode_step: q must be [batch, heads_q, d]");
    }
    if (k_new.ndim() != 3 || k_new.dim(0) != cfg.batch || k_new.dim(1) != cfg.heads_kv ||
        k_new.dim(2) != d || v_new.shape() != k_new.shape()) {
        throw ShapeError("decode_step: k_new/v_new must be [batch, heads_kv, d]");
    }
    if (cache.batch() != cfg.batch || cache.heads_kv() != cfg.heads_kv ||
        cache.head_dim() != d) {
        throw ShapeError("decode_step: cache geometry does not match config");
    }

    for (size_t b = 0; b < cfg.batch; ++b) {
        for (size_t h = 0; h < cfg.heads_kv; ++h) {
            std::vector<float> k_row(d), v_row(d);
            for (size_t c = 0; c < d; ++c) {
                k_row[c] = k_new(b, h, c);
                v_row[c] = v_new(b, h, c);
            }
            cache.append_token(b, h, k_row.data(), v_row.data());
        }
    }

    AttnOutput out;
    out.batch = cfg.batch;
    out.heads = cfg.heads_q;
    out.d = d;
    out.data.assign(cfg.batch * cfg.heads_q * d, 0.0f);

    const float inv_sqrt_d = 1.0f / std::sqrt(static_cast<float>(d));
    const size_t items = cfg.batch * cfg.heads_kv;
    std::vector<std::optional<PackedBlock>> pending(items);

    parallel_for(items, [&](size_t item) {
        const size_t b = item / cfg.heads_kv;
        const size_t h = item % cfg.heads_kv;

        // The 1/sqrt(d) factor is folded into the query tile once.
        std::vector<float> q_tile(n_group * d);
        for (size_t g = 0; g < n_group; ++g) {
            for (size_t c = 0; c < d; ++c) {
                q_tile[g * d + c] = q(b, h * n_group + g, c) * inv_sqrt_d;
            }
        }

        StagingBuffer buf;
        std::vector<PartialOutput> partials;
        PartialOutput res_state = PartialOutput::init(n_group, d);
        pending[item] = residual_attend(cache, b, h, q_tile.data(), n_group, 1.0f, cfg.warp_n,
                                        res_state, buf);
        partials.push_back(std::move(res_state));

        std::vector<PartialOutput> main = packed_attend(cache, b, h, q_tile.data(), n_group,
                                                        cfg.tile_n, cfg.num_splits, 1.0f,
                                                        cfg.warp_n);
        for (auto& p : main) partials.push_back(std::move(p));

        const std::vector<float> merged = combine(partials);
        for (size_t g = 0; g < n_group; ++g) {
            float* dst = out.row(b, h * n_group + g);
            std::copy(merged.begin() + static_cast<ptrdiff_t>(g * d),
                      merged.begin() + static_cast<ptrdiff_t>((g + 1) * d), dst);
        }
    });

    // Cache-update phase: commit the blocks produced by the residual path.
    for (size_t item = 0; item < items; ++item) {
        if (pending[item].has_value()) {
            cache.commit_block(item / cfg.heads_kv, item % cfg.heads_kv,
                               std::move(*pending[item]));
        }
    }
    return out;
}

}  // namespace bitkv
