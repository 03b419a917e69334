// SPDX-License-Identifier: Apache-2.0
//
// bitkv: benchmark and verification front end for the low-bit KV cache
// decode engine. Subcommands: bench, verify, dump, load.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bitkv/attention.hpp"
#include "bitkv/bench.hpp"
#include "bitkv/config.hpp"
#include "bitkv/errors.hpp"
#include "bitkv/serialize.hpp"

namespace {

struct CommonFlags {
    std::string mode = "single";
    bitkv::WorkloadSpec spec;
    std::string quant_axis = "k-channel";
    bool no_interleave = false;

    void add_to(CLI::App& app) {
        app.add_option("--mode", mode, "Workload: single, batches, page")
            ->check(CLI::IsMember({"single", "batches", "page"}));
        app.add_option("--seq-len", spec.seq_len, "Prefill length in tokens");
        app.add_option("--batch", spec.batch, "Concurrent sequences");
        app.add_option("--heads-q", spec.heads_q, "Query heads");
        app.add_option("--heads-kv", spec.heads_kv, "KV heads");
        app.add_option("--head-dim", spec.head_dim, "Head dimension d");
        app.add_option("--bits", spec.bits, "KV cache bits: 2, 4, 8, or 16 (fp16 passthrough)");
        app.add_option("--group-size", spec.group_size,
                       "Quantization group size (default 64 channel-wise, 128 token-wise)");
        app.add_option("--quant-axis", quant_axis, "Key quantization axis")
            ->check(CLI::IsMember({"k-channel", "k-token"}));
        app.add_option("--splits", spec.num_splits, "FlashDecoding-style split count");
        app.add_option("--page-size", spec.page_size, "Tokens per page (page mode)");
        app.add_option("--steps", spec.steps, "Decode steps to run");
        app.add_option("--seed", spec.seed, "RNG seed");
        app.add_option("--tile-n", spec.tile_n, "Key tile size T_n");
        app.add_option("--warp-n", spec.warp_n, "Partition factor W_n along keys");
        app.add_flag("--no-interleave", no_interleave,
                     "Use the identity packing permutation (ablation)");
    }

    bitkv::WorkloadSpec resolve() {
        if (mode == "single") spec.mode = bitkv::WorkloadMode::Single;
        if (mode == "batches") spec.mode = bitkv::WorkloadMode::Batches;
        if (mode == "page") spec.mode = bitkv::WorkloadMode::Page;
        spec.quant_axis = quant_axis == "k-token" ? bitkv::QuantAxis::KToken
                                                  : bitkv::QuantAxis::KChannel;
        spec.interleave = !no_interleave;
        return spec;
    }
};

void write_or_print(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text << "\n";
        return;
    }
    std::ofstream os(path);
    if (!os) throw bitkv::Error("cannot open " + path + " for writing");
    os << text << "\n";
}

// Replays one seeded decode step on a loaded cache and reports the output
// fingerprint; the golden-file test pins this end to end.
nlohmann::json replay_step(bitkv::KVCache& cache, uint64_t seed) {
    const size_t d = cache.head_dim();
    const size_t heads_kv = cache.heads_kv();
    bitkv::AttentionConfig cfg;
    cfg.batch = cache.batch();
    cfg.heads_q = heads_kv;  // replay runs one query head per kv head
    cfg.heads_kv = heads_kv;
    cfg.head_dim = d;
    cfg.tile_n = 8 * cache.warp_n();
    cfg.warp_n = cache.warp_n();
    cfg.num_splits = 2;

    bitkv::GaussianSource gen(seed);
    bitkv::Tensor q({cfg.batch, cfg.heads_q, d});
    bitkv::Tensor k({cfg.batch, heads_kv, d});
    bitkv::Tensor v({cfg.batch, heads_kv, d});
    for (size_t b = 0; b < cfg.batch; ++b) {
        for (size_t h = 0; h < cfg.heads_q; ++h)
            for (size_t c = 0; c < d; ++c) q.set(b, h, c, gen.next());
        for (size_t h = 0; h < heads_kv; ++h) {
            for (size_t c = 0; c < d; ++c) k.set(b, h, c, gen.next());
            for (size_t c = 0; c < d; ++c) v.set(b, h, c, gen.next());
        }
    }
    const bitkv::AttnOutput out = bitkv::decode_step(cache, cfg, q, k, v);

    nlohmann::json j;
    j["seed"] = seed;
    j["output_checksum"] =
        bitkv::fnv1a64(out.data.data(), out.data.size() * sizeof(float)) ;
    j["first_values"] = std::vector<float>(out.data.begin(),
                                           out.data.begin() + std::min<size_t>(8, out.data.size()));
    return j;
}

nlohmann::json cache_summary(const bitkv::KVCache& cache) {
    nlohmann::json j;
    j["bits"] = cache.spec().num_bits;
    j["quant_axis"] =
        cache.spec().k_axis == bitkv::QuantAxis::KChannel ? "k-channel" : "k-token";
    j["group_size"] = cache.spec().group_size;
    j["n_r"] = cache.n_r();
    j["head_dim"] = cache.head_dim();
    j["batch"] = cache.batch();
    j["heads_kv"] = cache.heads_kv();
    j["interleave"] = cache.interleaved();
    nlohmann::json lens = nlohmann::json::array();
    for (size_t b = 0; b < cache.batch(); ++b) {
        for (size_t h = 0; h < cache.heads_kv(); ++h) {
            lens.push_back({{"packed_len", cache.packed_len(b, h)},
                            {"res_len", cache.res_len(b, h)}});
        }
    }
    j["cells"] = lens;
    const auto mem = cache.memory();
    j["memory"] = {{"k_packed_payload_bytes", mem.k_packed_payload_bytes},
                   {"v_packed_payload_bytes", mem.v_packed_payload_bytes},
                   {"params_bytes", mem.params_bytes},
                   {"residual_bytes", mem.residual_bytes}};
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Low-bit KV cache decode engine: benchmark and verification"};
    app.require_subcommand(1);

    // bench ------------------------------------------------------------
    auto* bench = app.add_subcommand("bench", "Run a decode workload and report metrics");
    CommonFlags bench_flags;
    bench_flags.add_to(*bench);
    bool bench_verify = false;
    bool bench_csv = false;
    std::string bench_output;
    bench->add_flag("--verify", bench_verify, "Compare every step against the naive oracle");
    bench->add_flag("--csv", bench_csv, "Emit one CSV row per step instead of JSON");
    bench->add_option("--output", bench_output, "Write the report to a file");

    // verify -----------------------------------------------------------
    auto* verify = app.add_subcommand("verify", "Run the cross-module invariant battery");
    uint64_t verify_seed = 0;
    uint64_t verify_count = 4;
    uint32_t verify_bits = 4;
    std::string verify_output;
    verify->add_option("--seed", verify_seed, "First seed");
    verify->add_option("--count", verify_count, "Number of seeds");
    verify->add_option("--bits", verify_bits, "Bit width under test (16 skips quant checks)");
    verify->add_option("--output", verify_output, "Write the summary to a file");

    // dump ---------------------------------------------------------------
    auto* dump = app.add_subcommand("dump", "Run a workload and dump the cache to a file");
    CommonFlags dump_flags;
    dump_flags.add_to(*dump);
    std::string dump_output;
    dump->add_option("--output", dump_output, "Cache file path")->required();

    // load ---------------------------------------------------------------
    auto* load = app.add_subcommand("load", "Load a cache file and summarize it");
    std::string load_path;
    bool load_replay = false;
    uint64_t load_seed = 1;
    std::string load_output;
    load->add_option("file", load_path, "Cache file path")->required();
    load->add_flag("--replay", load_replay, "Run one seeded decode step after loading");
    load->add_option("--seed", load_seed, "Replay seed");
    load->add_option("--output", load_output, "Write the summary to a file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (bench->parsed()) {
            bitkv::WorkloadSpec spec = bench_flags.resolve();
            spec.verify = bench_verify;
            const bitkv::BenchReport report = bitkv::run_bench(spec);
            write_or_print(bench_csv ? bitkv::report_csv(report) : bitkv::report_json(report),
                           bench_output);
        } else if (verify->parsed()) {
            const auto results =
                bitkv::run_verify(verify_seed, verify_seed + verify_count, verify_bits);
            bool all_pass = true;
            std::string text;
            for (const auto& r : results) {
                all_pass = all_pass && r.pass;
                text += std::string(r.pass ? "[PASS] " : "[FAIL] ") + r.name + ": " + r.detail +
                        "\n";
            }
            write_or_print(text, verify_output);
            return all_pass ? 0 : 1;
        } else if (dump->parsed()) {
            const bitkv::KVCache cache = bitkv::run_workload_cache(dump_flags.resolve());
            bitkv::dump_cache_file(cache, dump_output);
            std::cout << "wrote " << dump_output << "\n";
        } else if (load->parsed()) {
            bitkv::KVCache cache = bitkv::load_cache_file(load_path);
            nlohmann::json j = cache_summary(cache);
            if (load_replay) j["replay"] = replay_step(cache, load_seed);
            write_or_print(j.dump(2), load_output);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
