// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "bitkv/kvcache.hpp"
#include "bitkv/oracle.hpp"

namespace bitkv {

// Deterministic standard-normal source (Box-Muller over mt19937_64). The
// standard library distributions are implementation-defined, which would
// break seed-stable golden outputs.
class GaussianSource {
public:
    explicit GaussianSource(uint64_t seed) : rng_(seed) {}
    float next();

private:
    double uniform();
    std::mt19937_64 rng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// FNV-1a 64-bit over raw bytes; used to fingerprint step outputs.
uint64_t fnv1a64(const void* data, size_t len, uint64_t seed = 0xcbf29ce484222325ull);

enum class WorkloadMode { Single, Batches, Page };

struct WorkloadSpec {
    WorkloadMode mode = WorkloadMode::Single;
    size_t seq_len = 1024;
    size_t batch = 1;
    size_t heads_q = 32;
    size_t heads_kv = 8;
    size_t head_dim = 128;
    uint32_t bits = 4;       // 16 = fp16 passthrough
    size_t group_size = 0;   // 0: 64 channel-wise, 128 token-wise
    QuantAxis quant_axis = QuantAxis::KChannel;
    size_t num_splits = 4;
    size_t page_size = 16;
    size_t steps = 32;
    uint64_t seed = 0;
    bool verify = false;
    bool interleave = true;
    size_t tile_n = 64;
    size_t warp_n = 4;

    size_t effective_group_size() const {
        if (group_size != 0) return group_size;
        return quant_axis == QuantAxis::KChannel ? 64 : 128;
    }
};

struct BenchReport {
    WorkloadSpec spec;
    size_t n_r = 0;
    double prefill_seconds = 0.0;
    std::vector<double> step_seconds;
    double total_seconds = 0.0;
    double mean_ms = 0.0;
    double p50_ms = 0.0;
    double p99_ms = 0.0;
    double tokens_per_second = 0.0;
    KVCache::Memory memory;
    bool verified = false;
    OracleReport oracle;  // worst case across verified steps
    uint64_t output_checksum = 0;
};

// Seeds an RNG, generates Gaussian Q/K/V, prefills, runs `steps` decode
// steps, and (with spec.verify) compares every step against the fp16 naive
// oracle. ConfigError on inconsistent workload parameters.
BenchReport run_bench(const WorkloadSpec& spec);

// Runs the same seeded workload and hands back the final cache state
// (prefill plus `steps` decode steps); backs the dump subcommand.
KVCache run_workload_cache(const WorkloadSpec& spec);

// JSON report; deterministic_only restricts it to the fields that must be
// byte-identical for a fixed seed (config echo, memory, oracle, checksum).
std::string report_json(const BenchReport& report, bool deterministic_only = false);

// One CSV row per step: step index and latency in milliseconds.
std::string report_csv(const BenchReport& report);

struct VerifyResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// Cross-module invariant battery over a seed range; bits == 16 skips the
// quantization-only checks. Used by the `verify` subcommand.
std::vector<VerifyResult> run_verify(uint64_t seed_begin, uint64_t seed_end, uint32_t bits);

}  // namespace bitkv
