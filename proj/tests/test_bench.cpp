// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "bitkv/bench.hpp"
#include "bitkv/errors.hpp"

using namespace bitkv;

namespace {

WorkloadSpec small_spec() {
    WorkloadSpec s;
    s.mode = WorkloadMode::Single;
    s.seq_len = 200;
    s.batch = 1;
    s.heads_q = 4;
    s.heads_kv = 2;
    s.head_dim = 64;
    s.bits = 4;
    s.group_size = 16;
    s.num_splits = 2;
    s.steps = 4;
    s.seed = 5;
    s.tile_n = 32;
    s.warp_n = 2;
    return s;
}

}  // namespace

TEST_CASE("same seed reproduces byte-identical numerics") {
    const WorkloadSpec s = small_spec();
    const BenchReport a = run_bench(s);
    const BenchReport b = run_bench(s);
    CHECK(a.output_checksum == b.output_checksum);
    CHECK(report_json(a, /*deterministic_only=*/true) ==
          report_json(b, /*deterministic_only=*/true));
}

TEST_CASE("passthrough workload matches the oracle below 1e-5") {
    WorkloadSpec s = small_spec();
    s.bits = 16;
    s.verify = true;
    const BenchReport r = run_bench(s);
    CHECK(r.verified);
    CHECK(r.oracle.max_abs_err < 1e-5);
    CHECK(r.oracle.cosine_similarity > 1.0 - 1e-7);
}

TEST_CASE("4-bit error is no worse than 2-bit error on the same seed") {
    WorkloadSpec s4 = small_spec();
    s4.verify = true;
    s4.seq_len = 512;
    WorkloadSpec s2 = s4;
    s2.bits = 2;
    const BenchReport r4 = run_bench(s4);
    const BenchReport r2 = run_bench(s2);
    CHECK(r4.oracle.rel_l2_err <= r2.oracle.rel_l2_err);
}

TEST_CASE("memory fields equal the cache accounting") {
    WorkloadSpec s = small_spec();
    const BenchReport r = run_bench(s);
    const KVCache cache = run_workload_cache(s);
    const auto mem = cache.memory();
    CHECK(r.memory.k_packed_payload_bytes == mem.k_packed_payload_bytes);
    CHECK(r.memory.v_packed_payload_bytes == mem.v_packed_payload_bytes);
    CHECK(r.memory.params_bytes == mem.params_bytes);
    CHECK(r.memory.residual_bytes == mem.residual_bytes);
}

TEST_CASE("no-interleave ablation changes nothing observable") {
    WorkloadSpec a = small_spec();
    WorkloadSpec b = a;
    b.interleave = false;
    CHECK(run_bench(a).output_checksum == run_bench(b).output_checksum);
}

TEST_CASE("csv emits one row per step") {
    const BenchReport r = run_bench(small_spec());
    const std::string csv = report_csv(r);
    size_t lines = 0;
    for (char c : csv) lines += c == '\n';
    CHECK(lines == 1 + small_spec().steps);  // header + steps
}

TEST_CASE("single mode rejects batch > 1") {
    WorkloadSpec s = small_spec();
    s.batch = 2;
    CHECK_THROWS_AS(run_bench(s), ConfigError);
}

TEST_CASE("the verify battery passes on default seeds") {
    for (uint32_t bits : {4u, 16u}) {
        const auto results = run_verify(0, 2, bits);
        for (const auto& r : results) {
            INFO(r.name, ": ", r.detail);
            CHECK(r.pass);
        }
    }
}
