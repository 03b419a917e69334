// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "bitkv/layout.hpp"
#include "bitkv/quant.hpp"

namespace bitkv {

// One committed residual block: N_r tokens of quantized K/V packed into
// 16-bit words plus their group parameters. Words are laid out column-major
// over the [N_r, d] tile, pack_num consecutive tokens per word, so the
// writer (residual path) and reader (attention path) share one permutation.
// Passthrough blocks carry raw binary16 bits as 16-bit "codes" and no params.
struct PackedBlock {
    std::vector<uint16_t> k_words;
    std::vector<uint16_t> v_words;
    QuantParams k_params;
    QuantParams v_params;

    bool operator==(const PackedBlock&) const = default;
};

// Low-bit packed segment of one (batch, kv_head) cell.
struct PackedKV {
    std::vector<PackedBlock> blocks;
    size_t packed_len = 0;  // tokens; always a multiple of N_r

    size_t k_word_count() const {
        size_t n = 0;
        for (const auto& b : blocks) n += b.k_words.size();
        return n;
    }
    size_t v_word_count() const {
        size_t n = 0;
        for (const auto& b : blocks) n += b.v_words.size();
        return n;
    }
};

// High-precision tail of one cell, contiguous backend.
struct ResidualCache {
    std::vector<float> k;  // res_len * d, binary16-representable values
    std::vector<float> v;
    size_t res_len = 0;
};

// Fixed-size token pages backing the paged cache. Pages hold binary16-
// representable K/V rows; handles are recycled LIFO so physical order
// diverges from logical order under churn.
class PagePool {
public:
    PagePool() = default;
    PagePool(size_t page_size, size_t head_dim, size_t max_pages = 0);

    uint32_t alloc();  // CapacityError when max_pages is exhausted
    void release(uint32_t id);

    float* k_row(uint32_t page, size_t slot);
    float* v_row(uint32_t page, size_t slot);
    const float* k_row(uint32_t page, size_t slot) const;
    const float* v_row(uint32_t page, size_t slot) const;

    size_t page_size() const { return page_size_; }
    size_t live_pages() const { return pages_.size() - free_.size(); }

private:
    struct Page {
        std::vector<float> k, v;
    };
    std::vector<Page> pages_;
    std::vector<uint32_t> free_;
    size_t page_size_ = 0;
    size_t head_dim_ = 0;
    size_t max_pages_ = 0;
};

// Logical token sequence mapped onto pool pages. Holds the tokens currently
// resident (the residual tail once flushing starts); always satisfies
// page count == ceil(length / page_size).
struct PageTable {
    size_t page_size = 16;
    std::vector<uint32_t> pages;
    size_t length = 0;
};

// Appends one token row pair, allocating a page iff the last page is full.
void paged_append(PageTable& pt, PagePool& pool, const float* k_row, const float* v_row,
                  size_t d);

// Copies tokens [t0, t0+len) into contiguous [len, d] buffers.
void paged_gather(const PageTable& pt, const PagePool& pool, size_t t0, size_t len, size_t d,
                  float* k_out, float* v_out);

// Drops the first n_tokens (must cover whole pages) and releases their pages.
void paged_pop_front(PageTable& pt, PagePool& pool, size_t n_tokens);

enum class CacheBackend { Contiguous, Paged };

// Hybrid KV cache: a packed low-bit segment plus a high-precision residual
// per (batch, kv_head) cell. Tokens enter the residual; when it reaches N_r
// they are quantized, packed, and committed as one block.
class KVCache {
public:
    KVCache(size_t batch, size_t heads_kv, size_t head_dim, size_t warp_n, QuantSpec spec,
            CacheBackend backend = CacheBackend::Contiguous, size_t page_size = 16,
            size_t max_pages = 0, bool interleave = true);

    size_t batch() const { return batch_; }
    size_t heads_kv() const { return heads_kv_; }
    size_t head_dim() const { return head_dim_; }
    size_t warp_n() const { return warp_n_; }
    size_t n_r() const { return n_r_; }
    const QuantSpec& spec() const { return spec_; }
    CacheBackend backend() const { return backend_; }
    size_t page_size() const { return page_size_; }
    bool interleaved() const { return interleave_; }
    const InterleavePerm& perm() const { return perm_; }

    // Prefill: packs the first len - len % N_r tokens block-wise, keeps the
    // tail in the residual. k/v are [len, d] rows for one cell.
    void prefill(size_t b, size_t h, const float* k, const float* v, size_t len);

    // Decode-phase append of one token row pair into the residual.
    // CapacityError if the residual is already full (flush first).
    void append_token(size_t b, size_t h, const float* k_row, const float* v_row);

    // Quantize + pack + commit the full residual, then clear it.
    // StateError unless res_len == N_r.
    void flush_residual(size_t b, size_t h);

    // Quantize + pack the full residual without committing (the residual
    // path produces this during attention). StateError unless full.
    PackedBlock build_block(size_t b, size_t h) const;

    // Cache-update phase: append a block built from the current residual and
    // clear it. StateError unless res_len == N_r.
    void commit_block(size_t b, size_t h, PackedBlock block);

    // Loader-side append of an already-packed block (no residual involved).
    void adopt_block(size_t b, size_t h, PackedBlock block);

    size_t packed_len(size_t b, size_t h) const { return cell(b, h).packed.packed_len; }
    size_t res_len(size_t b, size_t h) const;
    size_t total_len(size_t b, size_t h) const { return packed_len(b, h) + res_len(b, h); }
    const PackedKV& packed(size_t b, size_t h) const { return cell(b, h).packed; }

    // Copies the residual tokens into contiguous [res_len, d] buffers.
    void residual_tile(size_t b, size_t h, float* k_out, float* v_out) const;

    // Dequantizes packed tokens [t0, t0+len) into [len, d] staging buffers;
    // values carry binary16 storage precision (passthrough is bit-exact).
    void packed_tile(size_t b, size_t h, size_t t0, size_t len, float* k_out,
                     float* v_out) const;

    // Full logical reconstruction: dequantized packed segment + residual.
    void reconstruct(size_t b, size_t h, std::vector<float>& k_out,
                     std::vector<float>& v_out) const;

    // Test hook: overwrite one packed word (fault injection).
    void corrupt_word(size_t b, size_t h, size_t block, size_t word, uint16_t value);

    struct Memory {
        size_t k_packed_payload_bytes = 0;
        size_t v_packed_payload_bytes = 0;
        size_t params_bytes = 0;
        size_t residual_bytes = 0;  // modeled fp16 bytes (paged: allocated pages)
    };
    Memory memory() const;

private:
    struct Cell {
        PackedKV packed;
        ResidualCache res;  // contiguous backend
        PageTable table;    // paged backend
    };

    Cell& cell(size_t b, size_t h) { return cells_[b * heads_kv_ + h]; }
    const Cell& cell(size_t b, size_t h) const { return cells_[b * heads_kv_ + h]; }
    PackedBlock make_block_from(const float* k_rows, const float* v_rows) const;
    void clear_residual(Cell& c);

    size_t batch_ = 1;
    size_t heads_kv_ = 1;
    size_t head_dim_ = 0;
    size_t warp_n_ = 1;
    size_t n_r_ = 0;
    QuantSpec spec_;
    CacheBackend backend_ = CacheBackend::Contiguous;
    size_t page_size_ = 16;
    bool interleave_ = true;
    InterleavePerm perm_;
    PagePool pool_;
    std::vector<Cell> cells_;
};

// Packs row-major [n_r, d] codes into words, pack_num consecutive tokens per
// word within each channel column; inverse below. Both sides of the cache
// use these, which is the layout-compatibility contract.
std::vector<uint16_t> pack_block_codes(const std::vector<uint16_t>& codes, size_t n_r, size_t d,
                                       const InterleavePerm& perm);
std::vector<uint16_t> unpack_block_codes(const std::vector<uint16_t>& words, size_t n_r, size_t d,
                                         const InterleavePerm& perm);

}  // namespace bitkv
