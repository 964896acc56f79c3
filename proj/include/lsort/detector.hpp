#pragma once

// Median thresholding per channel: TH = n_th * median(|y|) over the trailing
// window, detection on strictly supra-threshold magnitude. The first N pushes
// are blind while the window fills.

#include <cstdint>
#include <optional>

#include "lsort/fixed.hpp"
#include "lsort/median.hpp"
#include "lsort/types.hpp"

namespace lsort {

class ChannelDetector {
public:
    ChannelDetector(uint32_t channel, MedianMode mode, uint32_t window, Q4p2 n_th)
        : window_(MedianEstimator::make(mode, window)),
          warmup_left_(window - 1),  // the N-th push is the first that can detect
          channel_(channel),
          n_th_(n_th) {}

    // Pushes |y| into the window regardless of the outcome; emits a Peak when
    // warm and |y| > (n_th * median) with the Q4.2 product truncated.
    std::optional<Peak> detect(uint64_t timestep, int16_t y) {
        const uint16_t mag = static_cast<uint16_t>(y < 0 ? -int32_t{y} : int32_t{y});
        const uint16_t est = window_.push(mag);
        if (warmup_left_ > 0) {
            --warmup_left_;
            return std::nullopt;
        }
        const uint32_t threshold = (uint32_t{n_th_.raw} * est) >> 2;
        if (mag > threshold)
            return Peak{channel_, timestep, mag};
        return std::nullopt;
    }

    bool warm() const { return warmup_left_ == 0; }

private:
    MedianEstimator window_;
    uint32_t warmup_left_;
    uint32_t channel_;
    Q4p2 n_th_;
};

}  // namespace lsort
