// SPDX-License-Identifier: Apache-2.0
#include "bitkv/serialize.hpp"

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "bitkv/errors.hpp"

namespace bitkv {

namespace {

constexpr char kMagic[4] = {'B', 'D', 'K', 'V'};
constexpr uint8_t kVersion = 1;

class Writer {
public:
    explicit Writer(std::ostream& os) : os_(os) {}
    void u8(uint8_t v) { os_.put(static_cast<char>(v)); }
    void u32(uint32_t v) {
        char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                     static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
        os_.write(b, 4);
    }
    void u16(uint16_t v) {
        char b[2] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF)};
        os_.write(b, 2);
    }
    void u16s(const std::vector<uint16_t>& vs) {
        for (uint16_t v : vs) u16(v);
    }

private:
    std::ostream& os_;
};

class Reader {
public:
    explicit Reader(std::istream& is) : is_(is) {}
    size_t offset() const { return offset_; }
    uint8_t u8() {
        char c;
        if (!is_.get(c)) throw FormatError("unexpected end of file", offset_);
        ++offset_;
        return static_cast<uint8_t>(c);
    }
    uint32_t u32() {
        uint8_t b[4];
        bytes(b, 4);
        return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
               static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
    }
    uint16_t u16() {
        uint8_t b[2];
        bytes(b, 2);
        return static_cast<uint16_t>(b[0] | b[1] << 8);
    }
    std::vector<uint16_t> u16s(size_t count) {
        std::vector<uint16_t> out(count);
        for (size_t i = 0; i < count; ++i) out[i] = u16();
        return out;
    }
    void bytes(uint8_t* dst, size_t n) {
        if (!is_.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n))) {
            throw FormatError("unexpected end of file", offset_ + static_cast<size_t>(is_.gcount()));
        }
        offset_ += n;
    }

private:
    std::istream& is_;
    size_t offset_ = 0;
};

size_t param_count(const QuantSpec& spec, size_t n_r, size_t d, bool is_key) {
    if (spec.passthrough()) return 0;
    const QuantAxis axis = is_key ? spec.k_axis : QuantAxis::KToken;
    const size_t groups = axis == QuantAxis::KChannel ? (n_r / spec.group_size) * d
                                                      : n_r * (d / spec.group_size);
    return 2 * groups;  // (scale, zero) halves
}

}  // namespace

void dump_cache(const KVCache& cache, std::ostream& os) {
    Writer w(os);
    os.write(kMagic, 4);
    w.u8(kVersion);
    w.u8(cache.interleaved() ? 1 : 0);
    w.u32(cache.spec().num_bits);
    w.u32(static_cast<uint32_t>(cache.spec().k_axis));
    w.u32(static_cast<uint32_t>(cache.spec().group_size));
    w.u32(static_cast<uint32_t>(cache.n_r()));
    w.u32(static_cast<uint32_t>(cache.head_dim()));
    w.u32(static_cast<uint32_t>(cache.batch()));
    w.u32(static_cast<uint32_t>(cache.heads_kv()));

    const size_t d = cache.head_dim();
    std::vector<float> res_k, res_v;
    for (size_t b = 0; b < cache.batch(); ++b) {
        for (size_t h = 0; h < cache.heads_kv(); ++h) {
            const size_t rlen = cache.res_len(b, h);
            w.u32(static_cast<uint32_t>(cache.packed_len(b, h)));
            w.u32(static_cast<uint32_t>(rlen));
            const PackedKV& packed = cache.packed(b, h);
            for (const auto& blk : packed.blocks) w.u16s(blk.k_words);
            for (const auto& blk : packed.blocks) w.u16s(blk.k_params.data);
            for (const auto& blk : packed.blocks) w.u16s(blk.v_words);
            for (const auto& blk : packed.blocks) w.u16s(blk.v_params.data);
            res_k.assign(rlen * d, 0.0f);
            res_v.assign(rlen * d, 0.0f);
            if (rlen > 0) cache.residual_tile(b, h, res_k.data(), res_v.data());
            for (float x : res_k) w.u16(f32_to_f16_bits(x));
            for (float x : res_v) w.u16(f32_to_f16_bits(x));
        }
    }
    os.flush();
}

KVCache load_cache(std::istream& is) {
    Reader r(is);
    uint8_t magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("bad magic", 0);
    const uint8_t version = r.u8();
    if (version != kVersion) {
        throw FormatError("unsupported version " + std::to_string(version), 4);
    }
    const bool interleave = (r.u8() & 1) != 0;
    QuantSpec spec;
    spec.num_bits = r.u32();
    const uint32_t axis = r.u32();
    if (axis > 1) throw FormatError("bad quant axis", r.offset() - 4);
    spec.k_axis = static_cast<QuantAxis>(axis);
    spec.group_size = r.u32();
    const size_t n_r = r.u32();
    const size_t d = r.u32();
    const size_t batch = r.u32();
    const size_t heads_kv = r.u32();
    if (n_r == 0 || n_r % (8 * (16 / spec.num_bits)) != 0) {
        throw FormatError("N_r inconsistent with num_bits", 10);
    }
    const size_t warp_n = n_r / (8 * (16 / spec.num_bits));

    KVCache cache(batch, heads_kv, d, warp_n, spec, CacheBackend::Contiguous, 16, 0, interleave);
    const size_t words_per_block = n_r * d * spec.num_bits / 16;
    const size_t k_pcount = param_count(spec, n_r, d, true);
    const size_t v_pcount = param_count(spec, n_r, d, false);

    for (size_t b = 0; b < batch; ++b) {
        for (size_t h = 0; h < heads_kv; ++h) {
            const size_t plen = r.u32();
            const size_t rlen = r.u32();
            if (plen % n_r != 0) throw FormatError("packed_len not block-aligned", r.offset() - 8);
            if (rlen >= n_r) throw FormatError("res_len must be < N_r", r.offset() - 4);
            const size_t blocks = plen / n_r;
            std::vector<std::vector<uint16_t>> kw(blocks), kp(blocks), vw(blocks), vp(blocks);
            for (size_t i = 0; i < blocks; ++i) kw[i] = r.u16s(words_per_block);
            for (size_t i = 0; i < blocks; ++i) kp[i] = r.u16s(k_pcount);
            for (size_t i = 0; i < blocks; ++i) vw[i] = r.u16s(words_per_block);
            for (size_t i = 0; i < blocks; ++i) vp[i] = r.u16s(v_pcount);

            std::vector<float> res_k(rlen * d), res_v(rlen * d);
            for (size_t i = 0; i < rlen * d; ++i) res_k[i] = f16_bits_to_f32(r.u16());
            for (size_t i = 0; i < rlen * d; ++i) res_v[i] = f16_bits_to_f32(r.u16());

            // Rebuild the cell through the public state machine: residual
            // rows first would violate ordering, so commit blocks directly.
            for (size_t i = 0; i < blocks; ++i) {
                PackedBlock blk;
                blk.k_words = std::move(kw[i]);
                blk.v_words = std::move(vw[i]);
                if (!spec.passthrough()) {
                    blk.k_params.rows = spec.k_axis == QuantAxis::KChannel ? n_r / spec.group_size
                                                                           : n_r;
                    blk.k_params.cols = spec.k_axis == QuantAxis::KChannel
                                            ? d
                                            : d / spec.group_size;
                    blk.k_params.data = std::move(kp[i]);
                    blk.v_params.rows = n_r;
                    blk.v_params.cols = d / spec.group_size;
                    blk.v_params.data = std::move(vp[i]);
                }
                cache.adopt_block(b, h, std::move(blk));
            }
            for (size_t t = 0; t < rlen; ++t) {
                cache.append_token(b, h, res_k.data() + t * d, res_v.data() + t * d);
            }
        }
    }
    return cache;
}

void dump_cache_file(const KVCache& cache, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path + " for writing");
    dump_cache(cache, os);
    if (!os) throw Error("write to " + path + " failed");
}

KVCache load_cache_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path);
    return load_cache(is);
}

}  // namespace bitkv
