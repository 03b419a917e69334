// SPDX-License-Identifier: Apache-2.0
#include "bitkv/kvcache.hpp"

#include <algorithm>
#include <cstring>
#include <string>

#include "bitkv/errors.hpp"

namespace bitkv {

PagePool::PagePool(size_t page_size, size_t head_dim, size_t max_pages)
    : page_size_(page_size), head_dim_(head_dim), max_pages_(max_pages) {}

uint32_t PagePool::alloc() {
    if (!free_.empty()) {
        const uint32_t id = free_.back();
        free_.pop_back();
        return id;
    }
    if (max_pages_ != 0 && pages_.size() >= max_pages_) {
        throw CapacityError("page pool exhausted (" + std::to_string(max_pages_) + " pages)");
    }
    Page p;
    p.k.assign(page_size_ * head_dim_, 0.0f);
    p.v.assign(page_size_ * head_dim_, 0.0f);
    pages_.push_back(std::move(p));
    return static_cast<uint32_t>(pages_.size() - 1);
}

void PagePool::release(uint32_t id) { free_.push_back(id); }

float* PagePool::k_row(uint32_t page, size_t slot) {
    return pages_[page].k.data() + slot * head_dim_;
}
float* PagePool::v_row(uint32_t page, size_t slot) {
    return pages_[page].v.data() + slot * head_dim_;
}
const float* PagePool::k_row(uint32_t page, size_t slot) const {
    return pages_[page].k.data() + slot * head_dim_;
}
const float* PagePool::v_row(uint32_t page, size_t slot) const {
    return pages_[page].v.data() + slot * head_dim_;
}

void paged_append(PageTable& pt, PagePool& pool, const float* k_row, const float* v_row,
                  size_t d) {
    const size_t slot = pt.length % pt.page_size;
    if (slot == 0) pt.pages.push_back(pool.alloc());
    const uint32_t page = pt.pages.back();
    std::memcpy(pool.k_row(page, slot), k_row, d * sizeof(float));
    std::memcpy(pool.v_row(page, slot), v_row, d * sizeof(float));
    ++pt.length;
}

void paged_gather(const PageTable& pt, const PagePool& pool, size_t t0, size_t len, size_t d,
                  float* k_out, float* v_out) {
    if (t0 + len > pt.length) throw ShapeError("paged_gather: range past end of table");
    for (size_t i = 0; i < len; ++i) {
        const size_t t = t0 + i;
        const uint32_t page = pt.pages[t / pt.page_size];
        const size_t slot = t % pt.page_size;
        std::memcpy(k_out + i * d, pool.k_row(page, slot), d * sizeof(float));
        std::memcpy(v_out + i * d, pool.v_row(page, slot), d * sizeof(float));
    }
}

void paged_pop_front(PageTable& pt, PagePool& pool, size_t n_tokens) {
    if (n_tokens > pt.length) throw StateError("paged_pop_front: more tokens than resident");
    if (n_tokens % pt.page_size != 0) {
        throw StateError("paged_pop_front: must drop whole pages");
    }
    const size_t n_pages = n_tokens / pt.page_size;
    for (size_t i = 0; i < n_pages; ++i) pool.release(pt.pages[i]);
    pt.pages.erase(pt.pages.begin(), pt.pages.begin() + static_cast<ptrdiff_t>(n_pages));
    pt.length -= n_tokens;
}

std::vector<uint16_t> pack_block_codes(const std::vector<uint16_t>& codes, size_t n_r, size_t d,
                                       const InterleavePerm& perm) {
    if (codes.size() != n_r * d) throw ShapeError("pack_block_codes: codes do not cover block");
    if (n_r % perm.pack_num != 0) throw ShapeError("pack_block_codes: N_r not pack-aligned");
    const size_t groups = n_r / perm.pack_num;
    std::vector<uint16_t> words(groups * d);
    std::vector<uint16_t> tmp(perm.pack_num);
    for (size_t c = 0; c < d; ++c) {
        for (size_t g = 0; g < groups; ++g) {
            for (size_t k = 0; k < perm.pack_num; ++k) {
                tmp[k] = codes[(g * perm.pack_num + k) * d + c];
            }
            words[c * groups + g] = pack_word(tmp, perm);
        }
    }
    return words;
}

std::vector<uint16_t> unpack_block_codes(const std::vector<uint16_t>& words, size_t n_r, size_t d,
                                         const InterleavePerm& perm) {
    const size_t groups = n_r / perm.pack_num;
    if (words.size() != groups * d) throw ShapeError("unpack_block_codes: word count mismatch");
    std::vector<uint16_t> codes(n_r * d);
    std::vector<uint16_t> tmp(perm.pack_num);
    for (size_t c = 0; c < d; ++c) {
        for (size_t g = 0; g < groups; ++g) {
            unpack_word(words[c * groups + g], perm, tmp);
            for (size_t k = 0; k < perm.pack_num; ++k) {
                codes[(g * perm.pack_num + k) * d + c] = tmp[k];
            }
        }
    }
    return codes;
}

KVCache::KVCache(size_t batch, size_t heads_kv, size_t head_dim, size_t warp_n, QuantSpec spec,
                 CacheBackend backend, size_t page_size, size_t max_pages, bool interleave)
    : batch_(batch),
      heads_kv_(heads_kv),
      head_dim_(head_dim),
      warp_n_(warp_n),
      spec_(spec),
      backend_(backend),
      page_size_(page_size),
      interleave_(interleave) {
    if (batch == 0 || heads_kv == 0 || head_dim == 0 || warp_n == 0) {
        throw ConfigError("cache geometry fields must be > 0");
    }
    n_r_ = residual_block_size(spec.num_bits, warp_n);
    perm_ = interleave ? interleave_order(spec.num_bits) : identity_order(spec.num_bits);
    if (!spec.passthrough()) {
        if (spec.group_size == 0 || head_dim % spec.group_size != 0) {
            throw ConfigError("group_size (" + std::to_string(spec.group_size) +
                              ") must divide head_dim (token-wise V groups)");
        }
        if (spec.k_axis == QuantAxis::KChannel && n_r_ % spec.group_size != 0) {
            throw ConfigError("channel-wise group_size (" + std::to_string(spec.group_size) +
                              ") must divide N_r (" + std::to_string(n_r_) + ")");
        }
    }
    if (backend == CacheBackend::Paged) {
        if (page_size == 0 || n_r_ % page_size != 0) {
            throw ConfigError("page_size (" + std::to_string(page_size) + ") must divide N_r (" +
                              std::to_string(n_r_) + ")");
        }
        pool_ = PagePool(page_size, head_dim, max_pages);
    }
    cells_.resize(batch * heads_kv);
    for (auto& c : cells_) c.table.page_size = page_size;
}

size_t KVCache::res_len(size_t b, size_t h) const {
    const Cell& c = cell(b, h);
    return backend_ == CacheBackend::Paged ? c.table.length : c.res.res_len;
}

void KVCache::prefill(size_t b, size_t h, const float* k, const float* v, size_t len) {
    Cell& c = cell(b, h);
    if (c.packed.packed_len != 0 || res_len(b, h) != 0) {
        throw StateError("prefill into a non-empty cell");
    }
    const size_t n_p = len - len % n_r_;
    for (size_t t0 = 0; t0 < n_p; t0 += n_r_) {
        c.packed.blocks.push_back(make_block_from(k + t0 * head_dim_, v + t0 * head_dim_));
    }
    c.packed.packed_len = n_p;
    for (size_t t = n_p; t < len; ++t) {
        append_token(b, h, k + t * head_dim_, v + t * head_dim_);
    }
}

void KVCache::append_token(size_t b, size_t h, const float* k_row, const float* v_row) {
    Cell& c = cell(b, h);
    if (res_len(b, h) == n_r_) {
        throw CapacityError("residual is full; flush before appending");
    }
    if (backend_ == CacheBackend::Paged) {
        paged_append(c.table, pool_, k_row, v_row, head_dim_);
    } else {
        c.res.k.insert(c.res.k.end(), k_row, k_row + head_dim_);
        c.res.v.insert(c.res.v.end(), v_row, v_row + head_dim_);
        ++c.res.res_len;
    }
}

PackedBlock KVCache::make_block_from(const float* k_rows, const float* v_rows) const {
    PackedBlock block;
    if (spec_.passthrough()) {
        std::vector<uint16_t> k_codes(n_r_ * head_dim_);
        std::vector<uint16_t> v_codes(n_r_ * head_dim_);
        for (size_t i = 0; i < n_r_ * head_dim_; ++i) {
            k_codes[i] = f32_to_f16_bits(k_rows[i]);
            v_codes[i] = f32_to_f16_bits(v_rows[i]);
        }
        block.k_words = pack_block_codes(k_codes, n_r_, head_dim_, perm_);
        block.v_words = pack_block_codes(v_codes, n_r_, head_dim_, perm_);
        return block;
    }
    QuantizedTile k_tile = quantize_tile(k_rows, n_r_, head_dim_, spec_.num_bits, spec_.k_axis,
                                         spec_.group_size);
    QuantizedTile v_tile = quantize_tile(v_rows, n_r_, head_dim_, spec_.num_bits,
                                         QuantAxis::KToken, spec_.group_size);
    block.k_words = pack_block_codes(k_tile.codes, n_r_, head_dim_, perm_);
    block.v_words = pack_block_codes(v_tile.codes, n_r_, head_dim_, perm_);
    block.k_params = std::move(k_tile.params);
    block.v_params = std::move(v_tile.params);
    return block;
}

PackedBlock KVCache::build_block(size_t b, size_t h) const {
    if (res_len(b, h) != n_r_) {
        throw StateError("build_block requires a full residual (res_len == N_r)");
    }
    const Cell& c = cell(b, h);
    if (backend_ == CacheBackend::Paged) {
        std::vector<float> k(n_r_ * head_dim_), v(n_r_ * head_dim_);
        paged_gather(c.table, pool_, 0, n_r_, head_dim_, k.data(), v.data());
        return make_block_from(k.data(), v.data());
    }
    return make_block_from(c.res.k.data(), c.res.v.data());
}

void KVCache::clear_residual(Cell& c) {
    if (backend_ == CacheBackend::Paged) {
        paged_pop_front(c.table, pool_, n_r_);
    } else {
        c.res.k.clear();
        c.res.v.clear();
        c.res.res_len = 0;
    }
}

void KVCache::commit_block(size_t b, size_t h, PackedBlock block) {
    if (res_len(b, h) != n_r_) {
        throw StateError("commit_block requires a full residual (res_len == N_r)");
    }
    adopt_block(b, h, std::move(block));
    clear_residual(cell(b, h));
}

void KVCache::adopt_block(size_t b, size_t h, PackedBlock block) {
    Cell& c = cell(b, h);
    c.packed.blocks.push_back(std::move(block));
    c.packed.packed_len += n_r_;
}

void KVCache::flush_residual(size_t b, size_t h) {
    if (res_len(b, h) != n_r_) {
        throw StateError("flush_residual requires res_len == N_r, have " +
                         std::to_string(res_len(b, h)));
    }
    commit_block(b, h, build_block(b, h));
}

void KVCache::residual_tile(size_t b, size_t h, float* k_out, float* v_out) const {
    const Cell& c = cell(b, h);
    if (backend_ == CacheBackend::Paged) {
        paged_gather(c.table, pool_, 0, c.table.length, head_dim_, k_out, v_out);
    } else {
        std::copy(c.res.k.begin(), c.res.k.end(), k_out);
        std::copy(c.res.v.begin(), c.res.v.end(), v_out);
    }
}

void KVCache::packed_tile(size_t b, size_t h, size_t t0, size_t len, float* k_out,
                          float* v_out) const {
    const Cell& c = cell(b, h);
    if (t0 + len > c.packed.packed_len) {
        throw ShapeError("packed_tile: range past packed segment");
    }
    size_t written = 0;
    while (written < len) {
        const size_t t = t0 + written;
        const size_t bi = t / n_r_;
        const size_t local = t % n_r_;
        const size_t take = std::min(len - written, n_r_ - local);
        const PackedBlock& blk = c.packed.blocks[bi];
        const std::vector<uint16_t> k_codes =
            unpack_block_codes(blk.k_words, n_r_, head_dim_, perm_);
        const std::vector<uint16_t> v_codes =
            unpack_block_codes(blk.v_words, n_r_, head_dim_, perm_);
        if (spec_.passthrough()) {
            for (size_t i = 0; i < take; ++i) {
                for (size_t cidx = 0; cidx < head_dim_; ++cidx) {
                    k_out[(written + i) * head_dim_ + cidx] =
                        f16_bits_to_f32(k_codes[(local + i) * head_dim_ + cidx]);
                    v_out[(written + i) * head_dim_ + cidx] =
                        f16_bits_to_f32(v_codes[(local + i) * head_dim_ + cidx]);
                }
            }
        } else {
            const size_t vcols = head_dim_ / spec_.group_size;
            for (size_t i = 0; i < take; ++i) {
                const size_t row = local + i;
                for (size_t cidx = 0; cidx < head_dim_; ++cidx) {
                    const size_t kg = spec_.k_axis == QuantAxis::KChannel
                                          ? (row / spec_.group_size) * head_dim_ + cidx
                                          : row * (head_dim_ / spec_.group_size) +
                                                cidx / spec_.group_size;
                    const size_t vg = row * vcols + cidx / spec_.group_size;
                    k_out[(written + i) * head_dim_ + cidx] = round_f16(
                        static_cast<float>(k_codes[row * head_dim_ + cidx]) *
                            blk.k_params.scale(kg) +
                        blk.k_params.zero(kg));
                    v_out[(written + i) * head_dim_ + cidx] = round_f16(
                        static_cast<float>(v_codes[row * head_dim_ + cidx]) *
                            blk.v_params.scale(vg) +
                        blk.v_params.zero(vg));
                }
            }
        }
        written += take;
    }
}

void KVCache::reconstruct(size_t b, size_t h, std::vector<float>& k_out,
                          std::vector<float>& v_out) const {
    const size_t total = total_len(b, h);
    k_out.assign(total * head_dim_, 0.0f);
    v_out.assign(total * head_dim_, 0.0f);
    const size_t plen = packed_len(b, h);
    if (plen > 0) packed_tile(b, h, 0, plen, k_out.data(), v_out.data());
    if (res_len(b, h) > 0) {
        residual_tile(b, h, k_out.data() + plen * head_dim_, v_out.data() + plen * head_dim_);
    }
}

void KVCache::corrupt_word(size_t b, size_t h, size_t block, size_t word, uint16_t value) {
    cells_[b * heads_kv_ + h].packed.blocks.at(block).k_words.at(word) = value;
}

KVCache::Memory KVCache::memory() const {
    Memory m;
    for (const auto& c : cells_) {
        m.k_packed_payload_bytes += c.packed.k_word_count() * 2;
        m.v_packed_payload_bytes += c.packed.v_word_count() * 2;
        for (const auto& blk : c.packed.blocks) {
            m.params_bytes += (blk.k_params.data.size() + blk.v_params.data.size()) * 2;
        }
        if (backend_ == CacheBackend::Paged) {
            m.residual_bytes += c.table.pages.size() * page_size_ * head_dim_ * 2 * 2;
        } else {
            m.residual_bytes += c.res.res_len * head_dim_ * 2 * 2;
        }
    }
    return m;
}

}  // namespace bitkv
