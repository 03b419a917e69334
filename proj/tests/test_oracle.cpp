// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "bitkv/errors.hpp"
#include "bitkv/fp16.hpp"
#include "bitkv/oracle.hpp"

using namespace bitkv;

TEST_CASE("single key returns that value row") {
    const size_t d = 8;
    std::vector<float> q(d, 0.5f), k(d, 1.0f), v(d);
    for (size_t c = 0; c < d; ++c) v[c] = float(c);
    const auto out = naive_attention(q.data(), 1, k.data(), v.data(), 1, d);
    for (size_t c = 0; c < d; ++c) CHECK(out[c] == doctest::Approx(v[c]));
}

TEST_CASE("zero scores average the values uniformly") {
    const size_t d = 4, len = 6;
    std::vector<float> q(d, 0.0f);  // orthogonal to everything
    std::vector<float> k(len * d), v(len * d);
    std::mt19937 rng(3);
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    for (auto& x : k) x = dist(rng);
    for (auto& x : v) x = dist(rng);
    const auto out = naive_attention(q.data(), 1, k.data(), v.data(), len, d);
    for (size_t c = 0; c < d; ++c) {
        float mean = 0.0f;
        for (size_t j = 0; j < len; ++j) mean += v[j * d + c];
        mean /= float(len);
        CHECK(out[c] == doctest::Approx(mean).epsilon(1e-6));
    }
}

TEST_CASE("compare reports zero error for identical inputs") {
    const std::vector<float> a = {1.0f, -2.0f, 3.0f};
    const OracleReport r = compare(a, a);
    CHECK(r.max_abs_err == 0.0);
    CHECK(r.rel_l2_err == 0.0);
    CHECK(r.cosine_similarity == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("compare reports zero cosine for orthogonal vectors") {
    const std::vector<float> a = {1.0f, 0.0f};
    const std::vector<float> b = {0.0f, 1.0f};
    CHECK(compare(a, b).cosine_similarity == doctest::Approx(0.0));
}

TEST_CASE("compare rejects mismatched shapes") {
    const std::vector<float> a = {1.0f};
    const std::vector<float> b = {1.0f, 2.0f};
    CHECK_THROWS_AS(compare(a, b), ShapeError);
}

TEST_CASE("offline reference reconstructs constant tensors exactly") {
    const size_t len = 40, d = 8, n_r = 16;
    std::vector<float> k(len * d, 2.5f), v(len * d, -1.25f);
    std::vector<float> ko(len * d), vo(len * d);
    QuantSpec spec{4, QuantAxis::KChannel, 8};
    offline_quant_reference(k.data(), v.data(), len, d, spec, n_r, ko.data(), vo.data());
    CHECK(ko == k);
    CHECK(vo == v);
}

TEST_CASE("offline reference is the identity in passthrough mode") {
    const size_t len = 33, d = 4;
    std::mt19937 rng(9);
    std::normal_distribution<float> dist;
    std::vector<float> k(len * d), v(len * d);
    for (auto& x : k) x = round_f16(dist(rng));
    for (auto& x : v) x = round_f16(dist(rng));
    std::vector<float> ko(len * d), vo(len * d);
    QuantSpec spec{16, QuantAxis::KToken, 4};
    offline_quant_reference(k.data(), v.data(), len, d, spec, 8, ko.data(), vo.data());
    CHECK(ko == k);
    CHECK(vo == v);
}

TEST_CASE("offline reference leaves the partial tail block untouched") {
    const size_t len = 20, d = 4, n_r = 16;
    std::mt19937 rng(11);
    std::normal_distribution<float> dist;
    std::vector<float> k(len * d), v(len * d);
    for (auto& x : k) x = round_f16(dist(rng));
    for (auto& x : v) x = round_f16(dist(rng));
    std::vector<float> ko(len * d), vo(len * d);
    QuantSpec spec{2, QuantAxis::KToken, 4};
    offline_quant_reference(k.data(), v.data(), len, d, spec, n_r, ko.data(), vo.data());
    bool head_changed = false;
    for (size_t i = 0; i < n_r * d; ++i) head_changed = head_changed || ko[i] != k[i];
    CHECK(head_changed);  // 2-bit quantization of Gaussian data is lossy
    for (size_t i = n_r * d; i < len * d; ++i) {
        CHECK(ko[i] == k[i]);
        CHECK(vo[i] == v[i]);
    }
}
