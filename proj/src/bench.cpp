// SPDX-License-Identifier: Apache-2.0
#include "bitkv/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "bitkv/attention.hpp"
#include "bitkv/config.hpp"
#include "bitkv/errors.hpp"
#include "bitkv/layout.hpp"

namespace bitkv {

float GaussianSource::next() {
    if (has_spare_) {
        has_spare_ = false;
        return static_cast<float>(spare_);
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return static_cast<float>(r * std::cos(theta));
}

double GaussianSource::uniform() {
    // (0, 1]: keep log() finite.
    return (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;
}

uint64_t fnv1a64(const void* data, size_t len, uint64_t seed) {
    const auto* p = static_cast<const uint8_t*>(data);
    uint64_t h = seed;
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Per-cell fp16 ground-truth history kept alongside the cache for oracle
// comparison and replay checks.
struct Histories {
    size_t d = 0;
    size_t heads_kv = 0;
    std::vector<std::vector<float>> k, v;  // [batch*heads_kv][len*d]

    std::vector<float>& k_cell(size_t b, size_t h) { return k[b * heads_kv + h]; }
    std::vector<float>& v_cell(size_t b, size_t h) { return v[b * heads_kv + h]; }
};

void fill_rounded(GaussianSource& g, float* dst, size_t n) {
    for (size_t i = 0; i < n; ++i) dst[i] = round_f16(g.next());
}

double percentile(std::vector<double> xs, double p) {
    if (xs.empty()) return 0.0;
    std::sort(xs.begin(), xs.end());
    const size_t idx = std::min(xs.size() - 1,
                                static_cast<size_t>(p * static_cast<double>(xs.size() - 1) + 0.5));
    return xs[idx];
}

}  // namespace

BenchReport run_bench(const WorkloadSpec& spec) {
    if (spec.mode == WorkloadMode::Single && spec.batch != 1) {
        throw ConfigError("single mode runs with batch = 1");
    }
    if (spec.steps == 0) throw ConfigError("steps must be >= 1");
    if (spec.bits != 2 && spec.bits != 4 && spec.bits != 8 && spec.bits != 16) {
        throw ConfigError("bits must be one of 2, 4, 8, 16");
    }

    AttentionConfig cfg;
    cfg.batch = spec.batch;
    cfg.heads_q = spec.heads_q;
    cfg.heads_kv = spec.heads_kv;
    cfg.head_dim = spec.head_dim;
    cfg.tile_m = std::max<size_t>(1, spec.heads_q / spec.heads_kv);
    cfg.tile_n = spec.tile_n;
    cfg.num_splits = spec.num_splits;
    cfg.warp_n = spec.warp_n;
    validate_config(cfg);

    QuantSpec qspec;
    qspec.num_bits = spec.bits;
    qspec.k_axis = spec.quant_axis;
    qspec.group_size = spec.effective_group_size();

    const CacheBackend backend =
        spec.mode == WorkloadMode::Page ? CacheBackend::Paged : CacheBackend::Contiguous;
    KVCache cache(spec.batch, spec.heads_kv, spec.head_dim, spec.warp_n, qspec, backend,
                  spec.page_size, 0, spec.interleave);

    BenchReport report;
    report.spec = spec;
    report.n_r = cache.n_r();

    const size_t d = spec.head_dim;
    const size_t cells = spec.batch * spec.heads_kv;
    GaussianSource gen(spec.seed);

    Histories hist;
    hist.d = d;
    hist.heads_kv = spec.heads_kv;
    hist.k.resize(cells);
    hist.v.resize(cells);
    for (size_t i = 0; i < cells; ++i) {
        hist.k[i].reserve((spec.seq_len + spec.steps) * d);
        hist.v[i].reserve((spec.seq_len + spec.steps) * d);
        hist.k[i].resize(spec.seq_len * d);
        hist.v[i].resize(spec.seq_len * d);
        fill_rounded(gen, hist.k[i].data(), spec.seq_len * d);
        fill_rounded(gen, hist.v[i].data(), spec.seq_len * d);
    }

    const auto t_prefill = Clock::now();
    for (size_t b = 0; b < spec.batch; ++b) {
        for (size_t h = 0; h < spec.heads_kv; ++h) {
            cache.prefill(b, h, hist.k_cell(b, h).data(), hist.v_cell(b, h).data(),
                          spec.seq_len);
        }
    }
    report.prefill_seconds = seconds_since(t_prefill);

    const size_t n_group = cfg.n_group();
    uint64_t checksum = 0xcbf29ce484222325ull;
    for (size_t step = 0; step < spec.steps; ++step) {
        Tensor q({spec.batch, spec.heads_q, d});
        Tensor k_new({spec.batch, spec.heads_kv, d});
        Tensor v_new({spec.batch, spec.heads_kv, d});
        for (size_t b = 0; b < spec.batch; ++b) {
            for (size_t h = 0; h < spec.heads_q; ++h) {
                for (size_t c = 0; c < d; ++c) q.set(b, h, c, gen.next());
            }
            for (size_t h = 0; h < spec.heads_kv; ++h) {
                for (size_t c = 0; c < d; ++c) k_new.set(b, h, c, gen.next());
                for (size_t c = 0; c < d; ++c) v_new.set(b, h, c, gen.next());
            }
        }
        for (size_t b = 0; b < spec.batch; ++b) {
            for (size_t h = 0; h < spec.heads_kv; ++h) {
                auto& kc = hist.k_cell(b, h);
                auto& vc = hist.v_cell(b, h);
                for (size_t c = 0; c < d; ++c) {
                    kc.push_back(k_new(b, h, c));
                    vc.push_back(v_new(b, h, c));
                }
            }
        }

        const auto t_step = Clock::now();
        AttnOutput out = decode_step(cache, cfg, q, k_new, v_new);
        report.step_seconds.push_back(seconds_since(t_step));

        checksum = fnv1a64(out.data.data(), out.data.size() * sizeof(float), checksum);

        if (spec.verify) {
            const size_t len = hist.k_cell(0, 0).size() / d;
            for (size_t b = 0; b < spec.batch; ++b) {
                for (size_t qh = 0; qh < spec.heads_q; ++qh) {
                    const size_t h = qh / n_group;
                    std::vector<float> q_row(d);
                    for (size_t c = 0; c < d; ++c) q_row[c] = q(b, qh, c);
                    const std::vector<float> ref = naive_attention(
                        q_row.data(), 1, hist.k_cell(b, h).data(), hist.v_cell(b, h).data(),
                        len, d);
                    const OracleReport r =
                        compare(std::span<const float>(out.row(b, qh), d), ref);
                    report.oracle.max_abs_err = std::max(report.oracle.max_abs_err,
                                                         r.max_abs_err);
                    report.oracle.rel_l2_err = std::max(report.oracle.rel_l2_err, r.rel_l2_err);
                    report.oracle.cosine_similarity =
                        std::min(report.oracle.cosine_similarity, r.cosine_similarity);
                }
            }
            report.verified = true;
        }
    }
    report.output_checksum = checksum;

    report.total_seconds = 0.0;
    for (double s : report.step_seconds) report.total_seconds += s;
    std::vector<double> ms;
    for (double s : report.step_seconds) ms.push_back(s * 1e3);
    report.mean_ms = report.total_seconds * 1e3 / static_cast<double>(spec.steps);
    report.p50_ms = percentile(ms, 0.50);
    report.p99_ms = percentile(ms, 0.99);
    report.tokens_per_second = report.total_seconds > 0.0
                                   ? static_cast<double>(spec.steps * spec.batch) /
                                         report.total_seconds
                                   : 0.0;
    report.memory = cache.memory();
    return report;
}

namespace {

const char* mode_name(WorkloadMode m) {
    switch (m) {
        case WorkloadMode::Single: return "single";
        case WorkloadMode::Batches: return "batches";
        case WorkloadMode::Page: return "page";
    }
    return "?";
}

char hex_digit(uint64_t v) { return "0123456789abcdef"[v & 0xF]; }

std::string hex64(uint64_t v) {
    std::string s = "0x";
    for (int shift = 60; shift >= 0; shift -= 4) s.push_back(hex_digit(v >> shift));
    return s;
}

nlohmann::json numerics_json(const BenchReport& r) {
    nlohmann::json j;
    j["config"] = {
        {"mode", mode_name(r.spec.mode)},
        {"seq_len", r.spec.seq_len},
        {"batch", r.spec.batch},
        {"heads_q", r.spec.heads_q},
        {"heads_kv", r.spec.heads_kv},
        {"head_dim", r.spec.head_dim},
        {"bits", r.spec.bits},
        {"group_size", r.spec.effective_group_size()},
        {"quant_axis", r.spec.quant_axis == QuantAxis::KChannel ? "k-channel" : "k-token"},
        {"num_splits", r.spec.num_splits},
        {"page_size", r.spec.page_size},
        {"steps", r.spec.steps},
        {"seed", r.spec.seed},
        {"interleave", r.spec.interleave},
        {"tile_n", r.spec.tile_n},
        {"warp_n", r.spec.warp_n},
        {"n_r", r.n_r},
    };
    j["memory"] = {
        {"k_packed_payload_bytes", r.memory.k_packed_payload_bytes},
        {"v_packed_payload_bytes", r.memory.v_packed_payload_bytes},
        {"params_bytes", r.memory.params_bytes},
        {"residual_bytes", r.memory.residual_bytes},
    };
    j["output_checksum"] = hex64(r.output_checksum);
    if (r.verified) {
        j["oracle"] = {
            {"max_abs_err", r.oracle.max_abs_err},
            {"rel_l2_err", r.oracle.rel_l2_err},
            {"cosine_similarity", r.oracle.cosine_similarity},
        };
    }
    return j;
}

}  // namespace

std::string report_json(const BenchReport& r, bool deterministic_only) {
    nlohmann::json j = numerics_json(r);
    if (!deterministic_only) {
        j["timing"] = {
            {"prefill_seconds", r.prefill_seconds},
            {"decode_seconds", r.total_seconds},
            {"mean_ms", r.mean_ms},
            {"p50_ms", r.p50_ms},
            {"p99_ms", r.p99_ms},
            {"tokens_per_second", r.tokens_per_second},
        };
    }
    return j.dump(2);
}

std::string report_csv(const BenchReport& r) {
    std::ostringstream os;
    os << "step,latency_ms\n";
    for (size_t i = 0; i < r.step_seconds.size(); ++i) {
        os << i << "," << r.step_seconds[i] * 1e3 << "\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Verification battery
// ---------------------------------------------------------------------------

namespace {

struct CaseDriver {
    // Runs prefill + steps decode steps and keeps the last output plus the
    // fp16 history, for engine-vs-oracle and engine-vs-engine checks.
    WorkloadSpec spec;
    AttnOutput last_out;
    Histories hist;
    KVCache cache{1, 1, 8, 1, QuantSpec{16, QuantAxis::KToken, 8}};

    explicit CaseDriver(WorkloadSpec s) : spec(std::move(s)), cache(make_cache(spec)) {
        AttentionConfig cfg = config(spec);
        validate_config(cfg);
        const size_t d = spec.head_dim;
        const size_t cells = spec.batch * spec.heads_kv;
        GaussianSource gen(spec.seed);
        hist.d = d;
        hist.heads_kv = spec.heads_kv;
        hist.k.resize(cells);
        hist.v.resize(cells);
        for (size_t i = 0; i < cells; ++i) {
            hist.k[i].resize(spec.seq_len * d);
            hist.v[i].resize(spec.seq_len * d);
            fill_rounded(gen, hist.k[i].data(), spec.seq_len * d);
            fill_rounded(gen, hist.v[i].data(), spec.seq_len * d);
        }
        for (size_t b = 0; b < spec.batch; ++b) {
            for (size_t h = 0; h < spec.heads_kv; ++h) {
                cache.prefill(b, h, hist.k_cell(b, h).data(), hist.v_cell(b, h).data(),
                              spec.seq_len);
            }
        }
        for (size_t step = 0; step < spec.steps; ++step) {
            Tensor q({spec.batch, spec.heads_q, d});
            Tensor k_new({spec.batch, spec.heads_kv, d});
            Tensor v_new({spec.batch, spec.heads_kv, d});
            for (size_t b = 0; b < spec.batch; ++b) {
                for (size_t h = 0; h < spec.heads_q; ++h) {
                    for (size_t c = 0; c < d; ++c) q.set(b, h, c, gen.next());
                }
                for (size_t h = 0; h < spec.heads_kv; ++h) {
                    for (size_t c = 0; c < d; ++c) k_new.set(b, h, c, gen.next());
                    for (size_t c = 0; c < d; ++c) v_new.set(b, h, c, gen.next());
                }
            }
            for (size_t b = 0; b < spec.batch; ++b) {
                for (size_t h = 0; h < spec.heads_kv; ++h) {
                    for (size_t c = 0; c < d; ++c) {
                        hist.k_cell(b, h).push_back(k_new(b, h, c));
                        hist.v_cell(b, h).push_back(v_new(b, h, c));
                    }
                }
            }
            last_q = q;
            last_out = decode_step(cache, config(spec), q, k_new, v_new);
        }
    }

    Tensor last_q;

    static AttentionConfig config(const WorkloadSpec& s) {
        AttentionConfig cfg;
        cfg.batch = s.batch;
        cfg.heads_q = s.heads_q;
        cfg.heads_kv = s.heads_kv;
        cfg.head_dim = s.head_dim;
        cfg.tile_m = std::max<size_t>(1, s.heads_q / s.heads_kv);
        cfg.tile_n = s.tile_n;
        cfg.num_splits = s.num_splits;
        cfg.warp_n = s.warp_n;
        return cfg;
    }

    static KVCache make_cache(const WorkloadSpec& s) {
        QuantSpec q;
        q.num_bits = s.bits;
        q.k_axis = s.quant_axis;
        q.group_size = s.effective_group_size();
        const CacheBackend backend =
            s.mode == WorkloadMode::Page ? CacheBackend::Paged : CacheBackend::Contiguous;
        return KVCache(s.batch, s.heads_kv, s.head_dim, s.warp_n, q, backend, s.page_size, 0,
                       s.interleave);
    }

    // fp16 naive oracle for the final step.
    std::vector<float> oracle_row(size_t b, size_t qh) const {
        const size_t d = spec.head_dim;
        const size_t n_group = spec.heads_q / spec.heads_kv;
        const size_t h = qh / n_group;
        std::vector<float> q_row(d);
        for (size_t c = 0; c < d; ++c) q_row[c] = last_q(b, qh, c);
        const auto& kc = hist.k[b * spec.heads_kv + h];
        const auto& vc = hist.v[b * spec.heads_kv + h];
        return naive_attention(q_row.data(), 1, kc.data(), vc.data(), kc.size() / d, d);
    }
};

WorkloadSpec small_passthrough_spec(uint64_t seed) {
    WorkloadSpec s;
    s.mode = WorkloadMode::Single;
    s.seq_len = 150 + static_cast<size_t>(seed % 90);
    s.batch = 1;
    s.heads_q = 4;
    s.heads_kv = 2;
    s.head_dim = 64;
    s.bits = 16;
    s.num_splits = 2;
    s.steps = 3;
    s.seed = seed;
    s.tile_n = 32;
    s.warp_n = 2;
    return s;
}

VerifyResult check_pack_unpack(uint64_t, uint64_t) {
    for (uint32_t bits : {2u, 4u, 8u}) {
        const InterleavePerm perm = interleave_order(bits);
        std::vector<uint16_t> codes(perm.pack_num);
        for (uint32_t w = 0; w < 0x10000u; ++w) {
            unpack_word(static_cast<uint16_t>(w), perm, codes);
            if (pack_word(codes, perm) != w) {
                return {"pack_unpack_roundtrip", false,
                        "word " + std::to_string(w) + " bits " + std::to_string(bits)};
            }
        }
    }
    return {"pack_unpack_roundtrip", true, "all 65536 words, bits {2,4,8}"};
}

VerifyResult check_quant_bound(uint64_t seed_begin, uint64_t seed_end, uint32_t bits) {
    if (bits == 16) return {"quant_roundtrip_bound", true, "skipped (passthrough)"};
    size_t groups = 0;
    for (uint64_t seed = seed_begin; seed < seed_end; ++seed) {
        GaussianSource gen(seed * 7919 + 13);
        for (uint32_t b : {2u, 4u, 8u}) {
            for (size_t rep = 0; rep < 40; ++rep) {
                std::vector<float> group(64);
                fill_rounded(gen, group.data(), group.size());
                const GroupParams p = compute_group_params(group, b);
                std::vector<uint16_t> codes(group.size());
                quantize_group(group, p.scale, p.zero, b, codes);
                std::vector<float> back(group.size());
                dequantize_group(codes, p.scale, p.zero, back);
                const float bound = p.scale / 2.0f * (1.0f + 0x1.0p-10f);
                for (size_t i = 0; i < group.size(); ++i) {
                    if (std::abs(back[i] - group[i]) > bound) {
                        return {"quant_roundtrip_bound", false,
                                "violation at seed " + std::to_string(seed)};
                    }
                }
                ++groups;
            }
        }
    }
    return {"quant_roundtrip_bound", true, std::to_string(groups) + " groups"};
}

VerifyResult check_replay(uint64_t seed_begin, uint64_t seed_end, uint32_t bits) {
    for (uint64_t seed = seed_begin; seed < seed_end; ++seed) {
        GaussianSource gen(seed * 104729 + 7);
        const size_t d = 64;
        const size_t warp_n = (seed % 2) ? 1 : 4;
        QuantSpec spec;
        spec.num_bits = bits;
        spec.k_axis = (seed % 3 == 0) ? QuantAxis::KToken : QuantAxis::KChannel;
        spec.group_size = 16;
        KVCache cache(1, 1, d, warp_n, spec);
        const size_t total = 1 + static_cast<size_t>(seed % 500);
        const size_t lp = total / 2;
        std::vector<float> k(total * d), v(total * d);
        fill_rounded(gen, k.data(), k.size());
        fill_rounded(gen, v.data(), v.size());
        cache.prefill(0, 0, k.data(), v.data(), lp);
        for (size_t t = lp; t < total; ++t) {
            cache.append_token(0, 0, k.data() + t * d, v.data() + t * d);
            if (cache.res_len(0, 0) == cache.n_r()) cache.flush_residual(0, 0);
            if (cache.packed_len(0, 0) % cache.n_r() != 0 ||
                cache.res_len(0, 0) >= cache.n_r()) {
                return {"replay_equivalence", false, "state invariant broke"};
            }
        }
        std::vector<float> rk, rv, ok(total * d), ov(total * d);
        cache.reconstruct(0, 0, rk, rv);
        offline_quant_reference(k.data(), v.data(), total, d, spec, cache.n_r(), ok.data(),
                                ov.data());
        if (rk != ok || rv != ov) {
            return {"replay_equivalence", false, "reconstruction mismatch, seed " +
                                                     std::to_string(seed)};
        }
    }
    return {"replay_equivalence", true, "bit-exact on all seeds"};
}

VerifyResult check_tiled_vs_naive(uint64_t seed_begin, uint64_t seed_end) {
    double worst = 0.0;
    for (uint64_t seed = seed_begin; seed < seed_end; ++seed) {
        CaseDriver run(small_passthrough_spec(seed));
        for (size_t qh = 0; qh < run.spec.heads_q; ++qh) {
            const auto ref = run.oracle_row(0, qh);
            const OracleReport r = compare(
                std::span<const float>(run.last_out.row(0, qh), run.spec.head_dim), ref);
            worst = std::max(worst, r.max_abs_err);
        }
    }
    return {"tiled_vs_naive", worst < 1e-5, "max_abs_err " + std::to_string(worst)};
}

VerifyResult check_split_invariance(uint64_t seed_begin, uint64_t seed_end) {
    double worst = 0.0;
    for (uint64_t seed = seed_begin; seed < seed_end; ++seed) {
        WorkloadSpec base = small_passthrough_spec(seed);
        base.num_splits = 1;
        CaseDriver ref(base);
        for (size_t splits : {2, 4, 8}) {
            WorkloadSpec s = base;
            s.num_splits = splits;
            CaseDriver run(s);
            for (size_t i = 0; i < ref.last_out.data.size(); ++i) {
                worst = std::max(worst, static_cast<double>(std::abs(
                                            ref.last_out.data[i] - run.last_out.data[i])));
            }
        }
    }
    return {"split_invariance", worst < 1e-5, "max pairwise diff " + std::to_string(worst)};
}

VerifyResult check_gqa(uint64_t seed_begin, uint64_t seed_end, uint32_t bits) {
    double worst = 0.0;
    for (uint64_t seed = seed_begin; seed < seed_end; ++seed) {
        WorkloadSpec s = small_passthrough_spec(seed);
        s.heads_q = 8;
        s.heads_kv = 2;
        s.bits = 16;
        CaseDriver run(s);
        for (size_t qh = 0; qh < s.heads_q; ++qh) {
            const auto ref = run.oracle_row(0, qh);
            const OracleReport r =
                compare(std::span<const float>(run.last_out.row(0, qh), s.head_dim), ref);
            worst = std::max(worst, r.max_abs_err);
        }
    }
    (void)bits;
    return {"gqa_equivalence", worst < 1e-5, "max_abs_err " + std::to_string(worst)};
}

VerifyResult check_paged(uint64_t seed_begin, uint64_t seed_end, uint32_t bits) {
    for (uint64_t seed = seed_begin; seed < seed_end; ++seed) {
        WorkloadSpec s = small_passthrough_spec(seed);
        s.bits = bits;
        s.batch = 2;
        s.mode = WorkloadMode::Batches;
        s.group_size = 16;
        WorkloadSpec p = s;
        p.mode = WorkloadMode::Page;
        p.page_size = 8;
        CaseDriver a(s), b(p);
        for (size_t i = 0; i < a.last_out.data.size(); ++i) {
            if (std::abs(a.last_out.data[i] - b.last_out.data[i]) > 1e-6) {
                return {"paged_equals_contiguous", false, "outputs diverge"};
            }
        }
        std::vector<float> ka, va, kb, vb;
        a.cache.reconstruct(0, 0, ka, va);
        b.cache.reconstruct(0, 0, kb, vb);
        if (ka != kb || va != vb) {
            return {"paged_equals_contiguous", false, "reconstructions diverge"};
        }
    }
    return {"paged_equals_contiguous", true, "bit-exact reconstruction, outputs within 1e-6"};
}

VerifyResult check_fault_detection(uint64_t seed_begin, uint64_t, uint32_t bits) {
    GaussianSource gen(seed_begin * 31 + 5);
    const size_t d = 64;
    QuantSpec spec;
    spec.num_bits = bits;
    spec.group_size = 16;
    KVCache cache(1, 1, d, 4, spec);
    const size_t total = cache.n_r() * 3;
    std::vector<float> k(total * d), v(total * d);
    fill_rounded(gen, k.data(), k.size());
    fill_rounded(gen, v.data(), v.size());
    cache.prefill(0, 0, k.data(), v.data(), total);
    std::vector<float> rk0, rv0;
    cache.reconstruct(0, 0, rk0, rv0);
    cache.corrupt_word(0, 0, 1, 3, static_cast<uint16_t>(~0u));
    std::vector<float> rk1, rv1;
    cache.reconstruct(0, 0, rk1, rv1);
    const bool detected = rk0 != rk1;
    return {"fault_injection_detected", detected,
            detected ? "corrupted word changed reconstruction" : "corruption went unnoticed"};
}

}  // namespace

KVCache run_workload_cache(const WorkloadSpec& spec) {
    if (spec.mode == WorkloadMode::Single && spec.batch != 1) {
        throw ConfigError("single mode runs with batch = 1");
    }
    CaseDriver run(spec);
    return std::move(run.cache);
}

std::vector<VerifyResult> run_verify(uint64_t seed_begin, uint64_t seed_end, uint32_t bits) {
    std::vector<VerifyResult> results;
    results.push_back(check_pack_unpack(seed_begin, seed_end));
    results.push_back(check_quant_bound(seed_begin, seed_end, bits));
    results.push_back(check_replay(seed_begin, seed_end, bits == 16 ? 16 : bits));
    results.push_back(check_tiled_vs_naive(seed_begin, seed_end));
    results.push_back(check_split_invariance(seed_begin, seed_end));
    results.push_back(check_gqa(seed_begin, seed_end, bits));
    results.push_back(check_paged(seed_begin, seed_end, bits));
    results.push_back(check_fault_detection(seed_begin, seed_end, bits));
    return results;
}

}  // namespace bitkv
