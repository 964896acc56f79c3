#pragma once

#include <cstdint>
#include <limits>

namespace lsort {

// 12-bit signed sample domain shared by the filter and detector.
inline constexpr int32_t kSampleMin = -2048;
inline constexpr int32_t kSampleMax = 2047;

template <typename T>
constexpr int32_t sat12(T v) {
    if (v < kSampleMin) return kSampleMin;
    if (v > kSampleMax) return kSampleMax;
    return static_cast<int32_t>(v);
}

// Arithmetic right shift with round-to-nearest, ties away from zero.
constexpr int64_t rshift_round(int64_t v, unsigned bits) {
    const int64_t half = int64_t{1} << (bits - 1);
    if (v >= 0) return (v + half) >> bits;
    return -((-v + half) >> bits);
}

// Integer division rounded to nearest, ties away from zero. den > 0.
constexpr int64_t div_round(int64_t num, int64_t den) {
    if (num >= 0) return (num + den / 2) / den;
    return -((-num + den / 2) / den);
}

// Q4.2 unsigned threshold multiplier (raw in [0, 63], value = raw / 4).
struct Q4p2 {
    uint8_t raw = 0;

    static constexpr Q4p2 from_raw(uint8_t r) { return Q4p2{r}; }
    static Q4p2 from_double(double v);  // rounds to the grid, clamps to [0, 15.75]
    double value() const { return raw / 4.0; }
};

inline Q4p2 Q4p2::from_double(double v) {
    if (v < 0.0) v = 0.0;
    int64_t r = static_cast<int64_t>(v * 4.0 + 0.5);
    if (r > 63) r = 63;
    return Q4p2{static_cast<uint8_t>(r)};
}

// Position on the quarter-micrometre grid (signed, 2 fraction bits).
struct PositionQ2 {
    int32_t x_raw = 0;
    int32_t z_raw = 0;

    double x_um() const { return x_raw / 4.0; }
    double z_um() const { return z_raw / 4.0; }

    friend bool operator==(const PositionQ2&, const PositionQ2&) = default;
};

}  // namespace lsort
