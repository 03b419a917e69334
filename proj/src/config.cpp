// SPDX-License-Identifier: Apache-2.0
#include "bitkv/config.hpp"

#include <string>

#include "bitkv/errors.hpp"

namespace bitkv {

AttentionConfig validate_config(const AttentionConfig& cfg) {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw ConfigError(what);
    };
    require(cfg.batch > 0, "batch must be > 0");
    require(cfg.heads_q > 0, "heads_q must be > 0");
    require(cfg.heads_kv > 0, "heads_kv must be > 0");
    require(cfg.head_dim > 0, "head_dim must be > 0");
    require(cfg.tile_m > 0, "tile_m must be > 0");
    require(cfg.tile_n > 0, "tile_n must be > 0");
    require(cfg.num_splits >= 1, "num_splits must be >= 1");
    require(cfg.warp_n > 0, "warp_n must be > 0");
    require(cfg.warp_m > 0, "warp_m must be > 0");
    require(cfg.heads_q % cfg.heads_kv == 0,
            "heads_q (" + std::to_string(cfg.heads_q) + ") must be divisible by heads_kv (" +
                std::to_string(cfg.heads_kv) + ")");
    require(cfg.tile_n % (cfg.warp_n * 8) == 0,
            "tile_n (" + std::to_string(cfg.tile_n) + ") must be divisible by warp_n*8 (" +
                std::to_string(cfg.warp_n * 8) + ")");
    return cfg;
}

Tensor gqa_transform(const Tensor& q, size_t n_group) {
    if (q.ndim() != 3 || q.dim(0) != 1) {
        throw ShapeError("gqa_transform expects shape [1, heads_q, d]");
    }
    const size_t heads_q = q.dim(1);
    const size_t d = q.dim(2);
    if (n_group == 0 || heads_q % n_group != 0) {
        throw ShapeError("heads_q must be divisible by n_group");
    }
    const size_t heads_kv = heads_q / n_group;
    Tensor out({n_group, heads_kv, d});
    for (size_t h = 0; h < heads_kv; ++h) {
        for (size_t g = 0; g < n_group; ++g) {
            for (size_t k = 0; k < d; ++k) {
                out.set(g, h, k, q(0, h * n_group + g, k));
            }
        }
    }
    return out;
}

Tensor gqa_untransform(const Tensor& q, size_t n_group) {
    if (q.ndim() != 3 || q.dim(0) != n_group) {
        throw ShapeError("gqa_untransform expects shape [n_group, heads_kv, d]");
    }
    const size_t heads_kv = q.dim(1);
    const size_t d = q.dim(2);
    Tensor out({1, heads_kv * n_group, d});
    for (size_t h = 0; h < heads_kv; ++h) {
        for (size_t g = 0; g < n_group; ++g) {
            for (size_t k = 0; k < d; ++k) {
                out.set(size_t{0}, h * n_group + g, k, q(g, h, k));
            }
        }
    }
    return out;
}

}  // namespace bitkv
