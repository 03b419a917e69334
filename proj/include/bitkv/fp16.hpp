// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cstring>

namespace bitkv {

// IEEE 754 binary16 <-> binary32 conversion. Narrowing rounds to nearest,
// ties to even; values beyond the half range saturate to infinity and NaN
// maps to a quiet NaN. Widening is exact.

inline uint16_t f32_to_f16_bits(float value) {
    uint32_t f;
    std::memcpy(&f, &value, sizeof(f));
    const uint32_t sign = f & 0x80000000u;
    f ^= sign;

    uint16_t out;
    if (f >= 0x47800000u) {  // >= 65536: infinity (or NaN)
        out = f > 0x7F800000u ? 0x7E00u : 0x7C00u;
    } else if (f < 0x38800000u) {  // < 2^-14: subnormal half or zero
        // Adding 0.5f aligns the subnormal payload with the low mantissa
        // bits of the float sum; float addition performs the rounding.
        float aligned;
        std::memcpy(&aligned, &f, sizeof(f));
        aligned += 0.5f;
        uint32_t bits;
        std::memcpy(&bits, &aligned, sizeof(bits));
        out = static_cast<uint16_t>(bits - 0x3F000000u);
    } else {
        const uint32_t mant_odd = (f >> 13) & 1u;
        f += 0xC8000FFFu;  // rebias exponent and add the round-half bias
        f += mant_odd;     // ties-to-even
        out = static_cast<uint16_t>(f >> 13);
    }
    return static_cast<uint16_t>(out | (sign >> 16));
}

inline float f16_bits_to_f32(uint16_t h) {
    const uint32_t sign = static_cast<uint32_t>(h & 0x8000u) << 16;
    uint32_t exp = (h >> 10) & 0x1Fu;
    uint32_t mant = h & 0x3FFu;
    uint32_t bits;
    if (exp == 0) {
        if (mant == 0) {
            bits = sign;
        } else {  // subnormal: renormalize
            exp = 1;
            while (!(mant & 0x400u)) {
                mant <<= 1;
                --exp;
            }
            mant &= 0x3FFu;
            bits = sign | ((exp + 112u) << 23) | (mant << 13);
        }
    } else if (exp == 31) {
        bits = sign | 0x7F800000u | (mant << 13);
    } else {
        bits = sign | ((exp + 112u) << 23) | (mant << 13);
    }
    float out;
    std::memcpy(&out, &bits, sizeof(out));
    return out;
}

// Round a float to the nearest binary16-representable value.
inline float round_f16(float value) {
    return f16_bits_to_f32(f32_to_f16_bits(value));
}

}  // namespace bitkv
