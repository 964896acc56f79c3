#pragma once

// Per-channel 300-6000 Hz band-pass: two first-order Direct Form II sections
// (high-pass then low-pass, both bilinear designs) in saturating 12-bit
// fixed-point with Q1.10 coefficients. One 12-bit delay word per section, so
// a channel's state is exactly 24 bits.

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "lsort/bits.hpp"
#include "lsort/fixed.hpp"
#include "lsort/types.hpp"

namespace lsort {

struct SectionCoeffsReal {
    double b0 = 0.0;
    double b1 = 0.0;
    double a1 = 0.0;  // y[n] = b0*w[n] + b1*w[n-1], w[n] = x[n] - a1*w[n-1]
};

struct BandpassDesignReal {
    SectionCoeffsReal hp;
    SectionCoeffsReal lp;
};

// Bilinear first-order sections with prewarped cutoffs, so each section's
// -3 dB point lands exactly on its design frequency.
inline BandpassDesignReal design_bandpass(double fs_hz, double f_lo_hz = 300.0,
                                          double f_hi_hz = 6000.0) {
    if (!(0.0 < f_lo_hz && f_lo_hz < f_hi_hz && f_hi_hz < fs_hz / 2.0))
        throw InvalidBand("need 0 < f_lo < f_hi < fs/2");
    BandpassDesignReal d;
    const double k_lo = std::tan(M_PI * f_lo_hz / fs_hz);
    d.hp.b0 = 1.0 / (1.0 + k_lo);
    d.hp.b1 = -d.hp.b0;
    d.hp.a1 = (k_lo - 1.0) / (1.0 + k_lo);
    const double k_hi = std::tan(M_PI * f_hi_hz / fs_hz);
    d.lp.b0 = k_hi / (1.0 + k_hi);
    d.lp.b1 = d.lp.b0;
    d.lp.a1 = (k_hi - 1.0) / (1.0 + k_hi);
    return d;
}

struct SectionCoeffs {
    int16_t b0 = 0;
    int16_t b1 = 0;
    int16_t a1 = 0;  // Q1.10 raw
};

struct FilterCoeffs {
    SectionCoeffs hp;
    SectionCoeffs lp;
};

// raw = round(c * 1024), ties away from zero, clamped to the 12-bit range.
inline int16_t quantize_q10(double c) {
    if (std::abs(c) >= 2.0)
        throw CoeffOverflow("coefficient outside Q1.10 range");
    long long raw = std::llround(c * 1024.0);
    if (raw > 2047) raw = 2047;
    if (raw < -2048) raw = -2048;
    return static_cast<int16_t>(raw);
}

inline FilterCoeffs quantize_coeffs(const BandpassDesignReal& d) {
    FilterCoeffs q;
    q.hp = {quantize_q10(d.hp.b0), quantize_q10(d.hp.b1), quantize_q10(d.hp.a1)};
    q.lp = {quantize_q10(d.lp.b0), quantize_q10(d.lp.b1), quantize_q10(d.lp.a1)};
    return q;
}

class FilterBank {
public:
    FilterBank(uint32_t num_channels, FilterCoeffs coeffs)
        : coeffs_(coeffs), state_(num_channels, {0, 0}) {}

    // Direct Form II update of both sections. Products accumulate at full
    // width and are shifted back by 10 with round-to-nearest (ties away from
    // zero); every state and output write saturates to 12 bits.
    int16_t step(uint32_t channel, int16_t x) {
        auto& w = state_[channel];
        int32_t v = x;
        v = section_step(coeffs_.hp, w[0], v);
        v = section_step(coeffs_.lp, w[1], v);
        return static_cast<int16_t>(v);
    }

    void reset() {
        for (auto& w : state_) w = {0, 0};
        saturations_ = 0;
    }

    uint64_t saturations() const { return saturations_; }
    uint32_t num_channels() const { return static_cast<uint32_t>(state_.size()); }
    const FilterCoeffs& coeffs() const { return coeffs_; }

    void serialize_channel(uint32_t channel, BitWriter& w) const {
        for (int16_t word : state_[channel])
            w.push_bits(static_cast<uint16_t>(word) & 0xFFFu, 12);
    }

private:
    int32_t section_step(const SectionCoeffs& c, int16_t& w_prev, int32_t x) {
        const int64_t acc_w = (int64_t{x} << 10) - int64_t{c.a1} * w_prev;
        const int32_t w_new = sat_count(rshift_round(acc_w, 10));
        const int64_t acc_y = int64_t{c.b0} * w_new + int64_t{c.b1} * w_prev;
        const int32_t y = sat_count(rshift_round(acc_y, 10));
        w_prev = static_cast<int16_t>(w_new);
        return y;
    }

    int32_t sat_count(int64_t v) {
        if (v < kSampleMin || v > kSampleMax) {
            ++saturations_;
            return v < kSampleMin ? kSampleMin : kSampleMax;
        }
        return static_cast<int32_t>(v);
    }

    FilterCoeffs coeffs_;
    std::vector<std::array<int16_t, 2>> state_;
    uint64_t saturations_ = 0;
};

}  // namespace lsort
