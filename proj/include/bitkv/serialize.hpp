// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>

#include "bitkv/kvcache.hpp"

namespace bitkv {

// BDKV v1 cache file, all integers little-endian:
//   "BDKV" magic | version u8 | flags u8 (bit0 = interleaved layout)
//   u32: num_bits, quant_axis, group_size, N_r, head_dim, batch, heads_kv
//   per cell (batch-major, head-minor):
//     u32 packed_len, u32 res_len
//     K words u16[], K params u16[], V words u16[], V params u16[]
//     residual K u16[res_len*d] (binary16 bits), residual V likewise
// Array lengths are derived from the header fields. FormatError (with byte
// offset) on bad magic, bad field values, or truncation.
void dump_cache(const KVCache& cache, std::ostream& os);
KVCache load_cache(std::istream& is);  // always reconstructs a contiguous backend

void dump_cache_file(const KVCache& cache, const std::string& path);
KVCache load_cache_file(const std::string& path);

}  // namespace bitkv
