// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "bitkv/attention.hpp"
#include "bitkv/errors.hpp"
#include "bitkv/fp16.hpp"
#include "bitkv/oracle.hpp"

using namespace bitkv;

namespace {

std::vector<float> rounded_gaussian(std::mt19937& rng, size_t n) {
    std::normal_distribution<float> dist;
    std::vector<float> out(n);
    for (auto& x : out) x = round_f16(dist(rng));
    return out;
}

// Tiled attention over [len, d] K/V with tile size tile_n, f32 inputs.
std::vector<float> run_tiled(const float* q, size_t rows, const float* k, const float* v,
                             size_t len, size_t d, size_t tile_n, size_t warp_n) {
    PartialOutput state = PartialOutput::init(rows, d);
    StagingBuffer buf;
    const float scale = 1.0f / std::sqrt(float(d));
    for (size_t t0 = 0; t0 < len; t0 += tile_n) {
        const size_t n = std::min(tile_n, len - t0);
        attend_tile(state, q, k + t0 * d, v + t0 * d, n, d, scale, warp_n, buf);
    }
    std::vector<PartialOutput> partials;
    partials.push_back(std::move(state));
    return combine(partials);
}

}  // namespace

TEST_CASE("a single tile covering the sequence matches the naive softmax") {
    std::mt19937 rng(17);
    for (int rep = 0; rep < 20; ++rep) {
        const size_t rows = 1 + rep % 4, len = 8 + (rep * 7) % 56, d = 32;
        const auto q = rounded_gaussian(rng, rows * d);
        const auto k = rounded_gaussian(rng, len * d);
        const auto v = rounded_gaussian(rng, len * d);
        const auto tiled = run_tiled(q.data(), rows, k.data(), v.data(), len, d, len, 1);
        const auto ref = naive_attention(q.data(), rows, k.data(), v.data(), len, d);
        CHECK(compare(tiled, ref).max_abs_err < 1e-5);
    }
}

TEST_CASE("identical keys give the column mean of V") {
    const size_t len = 12, d = 16;
    std::mt19937 rng(3);
    const auto v = rounded_gaussian(rng, len * d);
    std::vector<float> k(len * d);
    const auto row = rounded_gaussian(rng, d);
    for (size_t j = 0; j < len; ++j) std::copy(row.begin(), row.end(), k.begin() + j * d);
    const auto q = rounded_gaussian(rng, d);
    const auto out = run_tiled(q.data(), 1, k.data(), v.data(), len, d, 4, 1);
    for (size_t c = 0; c < d; ++c) {
        float mean = 0.0f;
        for (size_t j = 0; j < len; ++j) mean += v[j * d + c];
        mean /= float(len);
        CHECK(out[c] == doctest::Approx(mean).epsilon(1e-5));
    }
}

TEST_CASE("tile visit order does not change the result") {
    std::mt19937 rng(29);
    const size_t rows = 2, len = 64, d = 16, tile = 16;
    const auto q = rounded_gaussian(rng, rows * d);
    const auto k = rounded_gaussian(rng, len * d);
    const auto v = rounded_gaussian(rng, len * d);

    std::vector<size_t> order = {0, 1, 2, 3};
    const float scale = 1.0f / std::sqrt(float(d));
    std::vector<float> first;
    do {
        PartialOutput state = PartialOutput::init(rows, d);
        StagingBuffer buf;
        for (size_t idx : order) {
            attend_tile(state, q.data(), k.data() + idx * tile * d, v.data() + idx * tile * d,
                        tile, d, scale, 1, buf);
        }
        std::vector<PartialOutput> ps;
        ps.push_back(std::move(state));
        const auto out = combine(ps);
        if (first.empty()) {
            first = out;
        } else {
            CHECK(compare(out, first).max_abs_err < 1e-5);
        }
    } while (std::next_permutation(order.begin(), order.end()));
}

TEST_CASE("partitioned rowmax equals the direct rowmax exactly") {
    std::mt19937 rng(5);
    const size_t rows = 7, cols = 32;
    std::vector<float> s(rows * cols);
    std::normal_distribution<float> dist;
    for (auto& x : s) x = dist(rng);
    StagingBuffer buf;
    std::vector<float> direct(rows), part(rows);
    partitioned_rowmax(s.data(), rows, cols, 1, buf, direct.data());
    for (size_t w : {2, 4, 8}) {
        partitioned_rowmax(s.data(), rows, cols, w, buf, part.data());
        CHECK(part == direct);
    }
    CHECK_THROWS_AS(partitioned_rowmax(s.data(), rows, cols, 5, buf, part.data()), ShapeError);
}

TEST_CASE("partitioned rowmax of a constant tile is the constant") {
    const size_t rows = 3, cols = 16;
    std::vector<float> s(rows * cols, 1.5f);
    StagingBuffer buf;
    std::vector<float> out(rows);
    partitioned_rowmax(s.data(), rows, cols, 4, buf, out.data());
    for (float m : out) CHECK(m == 1.5f);
}

TEST_CASE("combine of one partial is its normalized output") {
    std::mt19937 rng(31);
    const size_t rows = 2, len = 24, d = 8;
    const auto q = rounded_gaussian(rng, rows * d);
    const auto k = rounded_gaussian(rng, len * d);
    const auto v = rounded_gaussian(rng, len * d);
    const auto ref = naive_attention(q.data(), rows, k.data(), v.data(), len, d);
    const auto out = run_tiled(q.data(), rows, k.data(), v.data(), len, d, len, 1);
    CHECK(compare(out, ref).max_abs_err < 1e-5);
}

TEST_CASE("combine is invariant to the order of partials") {
    std::mt19937 rng(37);
    const size_t rows = 2, len = 96, d = 16, tile = 16;
    const auto q = rounded_gaussian(rng, rows * d);
    const auto k = rounded_gaussian(rng, len * d);
    const auto v = rounded_gaussian(rng, len * d);
    const float scale = 1.0f / std::sqrt(float(d));

    std::vector<PartialOutput> parts;
    for (size_t t0 = 0; t0 < len; t0 += tile * 2) {
        PartialOutput state = PartialOutput::init(rows, d);
        StagingBuffer buf;
        for (size_t t = t0; t < std::min(len, t0 + tile * 2); t += tile) {
            attend_tile(state, q.data(), k.data() + t * d, v.data() + t * d, tile, d, scale, 1,
                        buf);
        }
        parts.push_back(std::move(state));
    }
    const auto base = combine(parts);
    std::vector<size_t> order(parts.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937 shuffle_rng(7);
    for (int rep = 0; rep < 10; ++rep) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        std::vector<PartialOutput> shuffled;
        for (size_t i : order) shuffled.push_back(parts[i]);
        const auto out = combine(shuffled);
        CHECK(compare(out, base).max_abs_err < 1e-6);
    }
}

TEST_CASE("combine rejects an empty list") {
    std::vector<PartialOutput> none;
    CHECK_THROWS_AS(combine(none), EmptyInput);
}

TEST_CASE("softmax weights sum to one through a ones-valued V") {
    std::mt19937 rng(41);
    const size_t rows = 3, len = 200, d = 16;
    const auto q = rounded_gaussian(rng, rows * d);
    const auto k = rounded_gaussian(rng, len * d);
    std::vector<float> ones(len * d, 1.0f);
    const auto out = run_tiled(q.data(), rows, k.data(), ones.data(), len, d, 32, 2);
    for (float x : out) CHECK(x == doctest::Approx(1.0).epsilon(1e-5));
}

// --- engine-level tests over the cache -------------------------------------

namespace {

struct EngineCase {
    AttentionConfig cfg;
    KVCache cache;
    std::vector<std::vector<float>> k_hist, v_hist;  // per (b, h)
    Tensor last_q{{1, 1, 1}};
    AttnOutput last_out;

    EngineCase(AttentionConfig cfg_in, QuantSpec spec, size_t prefill_len, size_t steps,
               uint64_t seed, CacheBackend backend = CacheBackend::Contiguous,
               size_t page_size = 16)
        : cfg(validate_config(cfg_in)),
          cache(cfg.batch, cfg.heads_kv, cfg.head_dim, cfg.warp_n, spec, backend, page_size) {
        std::mt19937 rng(static_cast<unsigned>(seed));
        const size_t d = cfg.head_dim;
        k_hist.resize(cfg.batch * cfg.heads_kv);
        v_hist.resize(cfg.batch * cfg.heads_kv);
        for (size_t i = 0; i < k_hist.size(); ++i) {
            k_hist[i] = rounded_gaussian(rng, prefill_len * d);
            v_hist[i] = rounded_gaussian(rng, prefill_len * d);
            cache.prefill(i / cfg.heads_kv, i % cfg.heads_kv, k_hist[i].data(),
                          v_hist[i].data(), prefill_len);
        }
        for (size_t s = 0; s < steps; ++s) step(rng);
    }

    void step(std::mt19937& rng) {
        const size_t d = cfg.head_dim;
        Tensor q({cfg.batch, cfg.heads_q, d});
        Tensor kn({cfg.batch, cfg.heads_kv, d});
        Tensor vn({cfg.batch, cfg.heads_kv, d});
        std::normal_distribution<float> dist;
        for (size_t i = 0; i < q.numel(); ++i) q.set(i, dist(rng));
        for (size_t i = 0; i < kn.numel(); ++i) kn.set(i, dist(rng));
        for (size_t i = 0; i < vn.numel(); ++i) vn.set(i, dist(rng));
        for (size_t b = 0; b < cfg.batch; ++b) {
            for (size_t h = 0; h < cfg.heads_kv; ++h) {
                auto& kc = k_hist[b * cfg.heads_kv + h];
                auto& vc = v_hist[b * cfg.heads_kv + h];
                for (size_t c = 0; c < d; ++c) {
                    kc.push_back(kn(b, h, c));
                    vc.push_back(vn(b, h, c));
                }
            }
        }
        last_q = q;
        last_out = decode_step(cache, cfg, q, kn, vn);
    }

    std::vector<float> oracle_row(size_t b, size_t qh) const {
        const size_t d = cfg.head_dim;
        const size_t h = qh / cfg.n_group();
        std::vector<float> q_row(d);
        for (size_t c = 0; c < d; ++c) q_row[c] = last_q(b, qh, c);
        const auto& kc = k_hist[b * cfg.heads_kv + h];
        const auto& vc = v_hist[b * cfg.heads_kv + h];
        return naive_attention(q_row.data(), 1, kc.data(), vc.data(), kc.size() / d, d);
    }
};

QuantSpec passthrough_spec() { return QuantSpec{16, QuantAxis::KChannel, 64}; }

}  // namespace

TEST_CASE("first token: attention over a single cached token returns its V row") {
    AttentionConfig cfg;
    cfg.batch = 1;
    cfg.heads_q = 2;
    cfg.heads_kv = 2;
    cfg.head_dim = 8;
    cfg.tile_n = 8;
    cfg.warp_n = 1;
    EngineCase e(cfg, passthrough_spec(), 0, 1, 99);
    for (size_t h = 0; h < 2; ++h) {
        const auto& vc = e.v_hist[h];
        for (size_t c = 0; c < 8; ++c) {
            CHECK(e.last_out.row(0, h)[c] == doctest::Approx(vc[c]).epsilon(1e-6));
        }
    }
}

TEST_CASE("residual path over one token equals that token's value") {
    QuantSpec spec = passthrough_spec();
    KVCache cache(1, 1, 4, 1, spec);
    const std::vector<float> k = {0.5f, -0.25f, 1.0f, 0.75f};
    const std::vector<float> v = {1.0f, 2.0f, 3.0f, 4.0f};
    cache.append_token(0, 0, k.data(), v.data());
    PartialOutput state = PartialOutput::init(1, 4);
    StagingBuffer buf;
    const std::vector<float> q = {1.0f, 0.0f, 0.0f, 0.0f};
    const auto block = residual_attend(cache, 0, 0, q.data(), 1, 1.0f, 1, state, buf);
    CHECK(!block.has_value());  // residual not full
    std::vector<PartialOutput> ps;
    ps.push_back(std::move(state));
    const auto out = combine(ps);
    for (size_t c = 0; c < 4; ++c) CHECK(out[c] == doctest::Approx(v[c]));
}

TEST_CASE("residual path returns a packed block exactly when full") {
    QuantSpec spec{4, QuantAxis::KChannel, 8};
    KVCache cache(1, 1, 8, 1, spec);  // N_r = 32
    std::mt19937 rng(4);
    const auto k = rounded_gaussian(rng, cache.n_r() * 8);
    const auto v = rounded_gaussian(rng, cache.n_r() * 8);
    for (size_t t = 0; t < cache.n_r(); ++t) {
        cache.append_token(0, 0, k.data() + t * 8, v.data() + t * 8);
    }
    PartialOutput state = PartialOutput::init(1, 8);
    StagingBuffer buf;
    const auto q = rounded_gaussian(rng, 8);
    const auto block = residual_attend(cache, 0, 0, q.data(), 1, 1.0f, 1, state, buf);
    REQUIRE(block.has_value());
    // The produced block commits and reproduces the residual within the
    // quantization bound of each group.
    cache.commit_block(0, 0, *block);
    CHECK(cache.packed_len(0, 0) == cache.n_r());
    CHECK(cache.res_len(0, 0) == 0);
    std::vector<float> kd(cache.n_r() * 8), vd(cache.n_r() * 8);
    cache.packed_tile(0, 0, 0, cache.n_r(), kd.data(), vd.data());
    for (size_t i = 0; i < kd.size(); ++i) {
        CHECK(std::abs(kd[i] - k[i]) < 0.5f);  // 4-bit Gaussian: half a wide step
        CHECK(std::abs(vd[i] - v[i]) < 0.5f);
    }
}

TEST_CASE("packed_attend split counts and equivalence") {
    AttentionConfig cfg;
    cfg.batch = 1;
    cfg.heads_q = 2;
    cfg.heads_kv = 1;
    cfg.head_dim = 32;
    cfg.tile_n = 16;
    cfg.warp_n = 2;
    QuantSpec spec = passthrough_spec();
    spec.group_size = 16;
    EngineCase e(cfg, spec, 200, 0, 123);

    const size_t d = cfg.head_dim;
    std::mt19937 rng(5);
    const auto q = rounded_gaussian(rng, 2 * d);

    const auto one = packed_attend(e.cache, 0, 0, q.data(), 2, cfg.tile_n, 1, 1.0f, cfg.warp_n);
    REQUIRE(one.size() == 1);
    std::vector<float> base = combine(one);

    for (size_t splits : {2, 4, 8}) {
        const auto parts =
            packed_attend(e.cache, 0, 0, q.data(), 2, cfg.tile_n, splits, 1.0f, cfg.warp_n);
        CHECK(parts.size() <= splits);
        CHECK(!parts.empty());
        const auto merged = combine(parts);
        CHECK(compare(merged, base).max_abs_err < 1e-5);
    }
}

TEST_CASE("packed_attend on an empty packed cache returns no partials") {
    QuantSpec spec = passthrough_spec();
    KVCache cache(1, 1, 8, 1, spec);
    std::vector<float> q(8, 0.1f);
    const auto parts = packed_attend(cache, 0, 0, q.data(), 1, 8, 4, 1.0f, 1);
    CHECK(parts.empty());
}

TEST_CASE("decode over a passthrough cache matches the naive oracle") {
    AttentionConfig cfg;
    cfg.batch = 2;
    cfg.heads_q = 4;
    cfg.heads_kv = 2;
    cfg.head_dim = 64;
    cfg.tile_n = 32;
    cfg.warp_n = 4;
    cfg.num_splits = 2;
    EngineCase e(cfg, passthrough_spec(), 180, 4, 7);
    for (size_t b = 0; b < cfg.batch; ++b) {
        for (size_t qh = 0; qh < cfg.heads_q; ++qh) {
            const auto ref = e.oracle_row(b, qh);
            const OracleReport r =
                compare(std::span<const float>(e.last_out.row(b, qh), cfg.head_dim), ref);
            CHECK(r.max_abs_err < 1e-5);
        }
    }
}

TEST_CASE("quantized decode equals naive attention on dequantized KV") {
    AttentionConfig cfg;
    cfg.batch = 1;
    cfg.heads_q = 2;
    cfg.heads_kv = 1;
    cfg.head_dim = 32;
    cfg.tile_n = 16;
    cfg.warp_n = 2;
    for (uint32_t bits : {2u, 4u, 8u}) {
        QuantSpec spec{bits, QuantAxis::KChannel, 16};
        EngineCase e(cfg, spec, 150, 3, 1000 + bits);
        // Oracle path: offline-dequantize the history, then run naive
        // attention on it.
        const size_t d = cfg.head_dim;
        const auto& kc = e.k_hist[0];
        const auto& vc = e.v_hist[0];
        const size_t len = kc.size() / d;
        std::vector<float> kd(len * d), vd(len * d);
        offline_quant_reference(kc.data(), vc.data(), len, d, spec, e.cache.n_r(), kd.data(),
                                vd.data());
        for (size_t qh = 0; qh < cfg.heads_q; ++qh) {
            std::vector<float> q_row(d);
            for (size_t c = 0; c < d; ++c) q_row[c] = e.last_q(size_t{0}, qh, c);
            const auto ref = naive_attention(q_row.data(), 1, kd.data(), vd.data(), len, d);
            const OracleReport r =
                compare(std::span<const float>(e.last_out.row(0, qh), d), ref);
            CHECK(r.max_abs_err < 1e-5);
        }
    }
}

TEST_CASE("the N_r-th decode step triggers exactly one flush") {
    AttentionConfig cfg;
    cfg.batch = 1;
    cfg.heads_q = 1;
    cfg.heads_kv = 1;
    cfg.head_dim = 16;
    cfg.tile_n = 8;
    cfg.warp_n = 1;
    QuantSpec spec{8, QuantAxis::KChannel, 16};
    EngineCase e(cfg, spec, 0, 0, 55);
    const size_t n_r = e.cache.n_r();  // 16
    std::mt19937 rng(8);
    for (size_t s = 0; s < n_r - 1; ++s) {
        e.step(rng);
        CHECK(e.cache.packed_len(0, 0) == 0);
        CHECK(e.cache.res_len(0, 0) == s + 1);
    }
    e.step(rng);  // the N_r-th token
    CHECK(e.cache.packed_len(0, 0) == n_r);
    CHECK(e.cache.res_len(0, 0) == 0);
}

TEST_CASE("GQA grouping matches per-head attention with shared KV") {
    for (auto [hq, hkv] : std::vector<std::pair<size_t, size_t>>{{32, 8}, {32, 32}, {8, 1}}) {
        AttentionConfig cfg;
        cfg.batch = 1;
        cfg.heads_q = hq;
        cfg.heads_kv = hkv;
        cfg.head_dim = 32;
        cfg.tile_n = 16;
        cfg.warp_n = 2;
        cfg.num_splits = 2;
        EngineCase e(cfg, passthrough_spec(), 90, 2, 2024);
        for (size_t qh = 0; qh < hq; ++qh) {
            const auto ref = e.oracle_row(0, qh);
            const OracleReport r =
                compare(std::span<const float>(e.last_out.row(0, qh), cfg.head_dim), ref);
            CHECK(r.max_abs_err < 1e-5);
        }
    }
}

TEST_CASE("decode_step validates tensor shapes") {
    AttentionConfig cfg;
    cfg.batch = 1;
    cfg.heads_q = 2;
    cfg.heads_kv = 1;
    cfg.head_dim = 8;
    cfg.tile_n = 8;
    cfg.warp_n = 1;
    KVCache cache(1, 1, 8, 1, passthrough_spec());
    Tensor q({1, 3, 8});  // wrong head count
    Tensor kn({1, 1, 8}), vn({1, 1, 8});
    CHECK_THROWS_AS(decode_step(cache, cfg, q, kn, vn), ShapeError);
}
