// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>

#include "bitkv/fp16.hpp"

using namespace bitkv;

TEST_CASE("widen-narrow round-trips every half bit pattern") {
    for (uint32_t h = 0; h < 0x10000u; ++h) {
        const uint16_t bits = static_cast<uint16_t>(h);
        const float f = f16_bits_to_f32(bits);
        if (std::isnan(f)) {
            CHECK(std::isnan(f16_bits_to_f32(f32_to_f16_bits(f))));
            continue;
        }
        CHECK(f32_to_f16_bits(f) == bits);
    }
}

TEST_CASE("well-known values convert exactly") {
    CHECK(f16_bits_to_f32(0x3C00) == 1.0f);
    CHECK(f16_bits_to_f32(0xC000) == -2.0f);
    CHECK(f16_bits_to_f32(0x7BFF) == 65504.0f);
    CHECK(f16_bits_to_f32(0x0001) == 0x1.0p-24f);  // smallest subnormal
    CHECK(f16_bits_to_f32(0x0400) == 0x1.0p-14f);  // smallest normal
    CHECK(f32_to_f16_bits(0.0f) == 0x0000);
    CHECK(f32_to_f16_bits(-0.0f) == 0x8000);
}

TEST_CASE("narrowing rounds ties to even") {
    // 1 + 2^-11 sits exactly between 1.0 (even mantissa) and 1 + 2^-10.
    CHECK(f32_to_f16_bits(1.0f + 0x1.0p-11f) == f32_to_f16_bits(1.0f));
    // 1 + 3*2^-11 sits between mantissas 1 (odd) and 2 (even): picks 2.
    CHECK(f32_to_f16_bits(1.0f + 3 * 0x1.0p-11f) == f32_to_f16_bits(1.0f + 0x1.0p-9f));
    // Nearest-not-tie cases round to nearest.
    CHECK(round_f16(0.4f) == doctest::Approx(0.39990234375f).epsilon(0));
    CHECK(round_f16(1000.3f) == 1000.0f);
}

TEST_CASE("overflow boundary behaves like IEEE narrowing") {
    // 65520 ties between 65504 and 2^16; ties-to-even selects infinity.
    CHECK(f32_to_f16_bits(65520.0f) == 0x7C00);
    CHECK(f32_to_f16_bits(65519.996f) == 0x7BFF);
    CHECK(f32_to_f16_bits(1e30f) == 0x7C00);
    CHECK(f32_to_f16_bits(-1e30f) == 0xFC00);
    // Below half the smallest subnormal: flushes to zero.
    CHECK(f32_to_f16_bits(0x1.0p-26f) == 0x0000);
    CHECK(f32_to_f16_bits(0x1.8p-25f) == 0x0001);
}
