#pragma once

// Sliding-window median estimators over per-channel magnitude streams.
//
// Four interchangeable architectures:
//   ExactMedianWindow       - ring of N samples, full selection per push
//   IncrementalMedianWindow - N-1 samples kept sorted, age counters track the
//                             oldest; one linear scan per push (O(n) not O(n^2))
//   DisjointMomWindow       - median of the 5 disjoint block medians of the
//                             trailing 25 samples
//   ApproxMomWindow         - two cascaded 4-entry incremental stages; stage 2
//                             consumes a stage-1 median every 5 pushes
//
// All estimators agree with push-time exact medians where exactness is
// claimed; the approximate MoM trades exactness for an 8-sample footprint.

#include <algorithm>
#include <array>
#include <cassert>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "lsort/bits.hpp"
#include "lsort/config.hpp"
#include "lsort/types.hpp"

namespace lsort {

// k-th smallest with k = ceil(n/2); the warm-up rule shared by all windows.
inline uint16_t median_truncated(std::span<const uint16_t> values) {
    if (values.empty())
        throw EmptyInput("median of empty sequence");
    std::vector<uint16_t> scratch(values.begin(), values.end());
    const size_t mid = (scratch.size() - 1) / 2;
    std::nth_element(scratch.begin(), scratch.begin() + static_cast<ptrdiff_t>(mid), scratch.end());
    return scratch[mid];
}

// Exact order statistic over an odd-length sequence.
inline uint16_t oracle_median(std::span<const uint16_t> values) {
    if (values.empty())
        throw EmptyInput("median of empty sequence");
    assert(values.size() % 2 == 1);
    return median_truncated(values);
}

namespace detail {
inline uint16_t median5(std::array<uint16_t, 5> block) {
    std::nth_element(block.begin(), block.begin() + 2, block.end());
    return block[2];
}
}  // namespace detail

// Median of the medians of 5 disjoint consecutive blocks of 5.
// `values` must be the trailing 25 samples in timestep order.
inline uint16_t oracle_mom25(std::span<const uint16_t> values) {
    if (values.size() != 25)
        throw WrongLength("median-of-median needs exactly 25 values");
    std::array<uint16_t, 5> block_medians{};
    for (size_t b = 0; b < 5; ++b) {
        std::array<uint16_t, 5> block{};
        std::copy_n(values.begin() + static_cast<ptrdiff_t>(5 * b), 5, block.begin());
        block_medians[b] = detail::median5(block);
    }
    return detail::median5(block_medians);
}

// ---------------------------------------------------------------------------
// ExactMedianWindow
// ---------------------------------------------------------------------------

class ExactMedianWindow {
public:
    explicit ExactMedianWindow(uint32_t window = 25) : window_(window) {
        ring_.resize(window_);
        scratch_.reserve(window_);
    }

    uint16_t push(uint16_t v) {
        ring_[head_] = v;
        head_ = (head_ + 1) % window_;
        if (fill_ < window_) ++fill_;
        scratch_.assign(ring_.begin(), ring_.begin() + fill_);
        const size_t mid = (fill_ - 1) / 2;
        std::nth_element(scratch_.begin(), scratch_.begin() + static_cast<ptrdiff_t>(mid),
                         scratch_.end());
        return scratch_[mid];
    }

    uint32_t fill() const { return fill_; }

private:
    uint32_t window_;
    uint32_t head_ = 0;
    uint32_t fill_ = 0;
    std::vector<uint16_t> ring_;
    std::vector<uint16_t> scratch_;
};

// ---------------------------------------------------------------------------
// IncrementalMedianWindow
// ---------------------------------------------------------------------------

// Stores the last N-1 samples sorted by magnitude. Each entry carries an age
// counter; age 0 marks the oldest entry, a fresh entry starts at N-2 and every
// survivor is decremented on eviction. The median of the N-sample window is
// read off from the sorted buffer plus the incoming sample's insertion rank,
// so a push costs one linear scan.
class IncrementalMedianWindow {
public:
    explicit IncrementalMedianWindow(uint32_t window = 25) : cap_(window - 1) {
        assert(window >= 3);
        values_.resize(cap_);
        ages_.resize(cap_);
    }

    uint16_t push(uint16_t v) {
        if (fill_ < cap_) return push_warmup(v);

        // One scan: oldest slot and the stable insertion rank (after equals).
        size_t idx_old = 0;
        size_t rank = 0;
        for (size_t i = 0; i < cap_; ++i) {
            if (ages_[i] == 0) idx_old = i;
            ++comparisons_;
            if (values_[i] <= v) ++rank;
        }

        // Median of {stored, v}: center index of the combined N values.
        const size_t c = cap_ / 2;
        uint16_t med;
        if (rank == c) med = v;
        else if (rank > c) med = values_[c];
        else med = values_[c - 1];

        // Evict the oldest, slide the gap to v's slot, refresh ages.
        size_t pos;
        if (idx_old < rank) {
            for (size_t i = idx_old; i + 1 < rank; ++i) {
                values_[i] = values_[i + 1];
                ages_[i] = ages_[i + 1];
            }
            pos = rank - 1;
        } else {
            for (size_t i = idx_old; i > rank; --i) {
                values_[i] = values_[i - 1];
                ages_[i] = ages_[i - 1];
            }
            pos = rank;
        }
        values_[pos] = v;
        for (size_t i = 0; i < cap_; ++i)
            ages_[i] = (i == pos) ? static_cast<uint16_t>(cap_ - 1)
                                  : static_cast<uint16_t>(ages_[i] - 1);
        return med;
    }

    uint32_t fill() const { return static_cast<uint32_t>(fill_); }
    uint64_t comparisons() const { return comparisons_; }

private:
    uint16_t push_warmup(uint16_t v) {
        size_t rank = 0;
        for (size_t i = 0; i < fill_; ++i) {
            ++comparisons_;
            if (values_[i] <= v) ++rank;
        }
        for (size_t i = fill_; i > rank; --i) {
            values_[i] = values_[i - 1];
            ages_[i] = ages_[i - 1];
        }
        values_[rank] = v;
        ages_[rank] = static_cast<uint16_t>(fill_);
        ++fill_;
        return values_[(fill_ - 1) / 2];
    }

    size_t cap_;
    size_t fill_ = 0;
    uint64_t comparisons_ = 0;
    std::vector<uint16_t> values_;  // nondecreasing
    std::vector<uint16_t> ages_;    // permutation of 0..fill-1, 0 = oldest
};

// ---------------------------------------------------------------------------
// DisjointMomWindow
// ---------------------------------------------------------------------------

// Conventional median-of-median over the trailing 25 samples: 5 disjoint
// consecutive blocks of 5, block medians reduced by a final median.
class DisjointMomWindow {
public:
    DisjointMomWindow() = default;

    uint16_t push(uint16_t v) {
        ring_[head_] = v;
        head_ = (head_ + 1) % 25;
        if (fill_ < 25) {
            ++fill_;
            if (fill_ < 25) {
                std::array<uint16_t, 25> scratch{};
                for (uint32_t i = 0; i < fill_; ++i) scratch[i] = ring_[i];
                return median_truncated({scratch.data(), fill_});
            }
        }
        std::array<uint16_t, 25> ordered{};
        for (uint32_t i = 0; i < 25; ++i) ordered[i] = ring_[(head_ + i) % 25];
        return oracle_mom25(ordered);
    }

    uint32_t fill() const { return fill_; }

private:
    std::array<uint16_t, 25> ring_{};
    uint32_t head_ = 0;
    uint32_t fill_ = 0;
};

// ---------------------------------------------------------------------------
// ApproxMomWindow
// ---------------------------------------------------------------------------

// Two-stage incremental approximation of the 25-sample median-of-median.
// Stage 1 keeps the 4 previous samples and yields the median of the 5 most
// recent on every push; stage 2 consumes that median once per 5 pushes, so at
// update instants its output is the median of 5 disjoint block medians. The
// output holds between updates.
class ApproxMomWindow {
public:
    // Per-channel sample storage: 2 stages x 4 entries x (11-bit magnitude +
    // 2-bit age). The phase counter is shared by all channels of a stream.
    static constexpr size_t kSerializedBits = 104;

    ApproxMomWindow() = default;

    uint16_t push(uint16_t v) {
        const uint16_t m1 = stage1_.push(v, comparisons_);
        if (++phase_ == 5) {
            phase_ = 0;
            latest_ = stage2_.push(m1, comparisons_);
        }
        return latest_;
    }

    uint64_t comparisons() const { return comparisons_; }
    uint32_t pushes_to_warm() const { return 25; }

    void serialize(BitWriter& w) const {
        stage1_.serialize(w);
        stage2_.serialize(w);
    }

private:
    struct Stage {
        std::array<uint16_t, 4> values{};
        std::array<uint8_t, 4> ages{};
        uint8_t fill = 0;

        uint16_t push(uint16_t v, uint64_t& comparisons) {
            if (fill < 4) {
                size_t rank = 0;
                for (size_t i = 0; i < fill; ++i) {
                    ++comparisons;
                    if (values[i] <= v) ++rank;
                }
                const size_t c = fill / 2;  // center of fill+1 values
                const uint16_t med = (rank == c) ? v : (rank > c ? values[c] : values[c - 1]);
                for (size_t i = fill; i > rank; --i) {
                    values[i] = values[i - 1];
                    ages[i] = ages[i - 1];
                }
                values[rank] = v;
                ages[rank] = fill;
                ++fill;
                return med;
            }
            size_t idx_old = 0;
            size_t rank = 0;
            for (size_t i = 0; i < 4; ++i) {
                if (ages[i] == 0) idx_old = i;
                ++comparisons;
                if (values[i] <= v) ++rank;
            }
            const uint16_t med = (rank == 2) ? v : (rank > 2 ? values[2] : values[1]);
            size_t pos;
            if (idx_old < rank) {
                for (size_t i = idx_old; i + 1 < rank; ++i) {
                    values[i] = values[i + 1];
                    ages[i] = ages[i + 1];
                }
                pos = rank - 1;
            } else {
                for (size_t i = idx_old; i > rank; --i) {
                    values[i] = values[i - 1];
                    ages[i] = ages[i - 1];
                }
                pos = rank;
            }
            values[pos] = v;
            for (size_t i = 0; i < 4; ++i)
                ages[i] = (i == pos) ? uint8_t{3} : static_cast<uint8_t>(ages[i] - 1);
            return med;
        }

        void serialize(BitWriter& w) const {
            for (size_t i = 0; i < 4; ++i) {
                w.push_bits(std::min<uint16_t>(values[i], 2047), 11);
                w.push_bits(ages[i], 2);
            }
        }
    };

    Stage stage1_{};
    Stage stage2_{};
    uint8_t phase_ = 0;       // wraps every 5 pushes; stage 2 mutates on wrap
    uint16_t latest_ = 0;
    uint64_t comparisons_ = 0;
};

// ---------------------------------------------------------------------------
// Mode-dispatched estimator
// ---------------------------------------------------------------------------

class MedianEstimator {
public:
    static MedianEstimator make(MedianMode mode, uint32_t window) {
        switch (mode) {
            case MedianMode::ExactSort: return MedianEstimator(ExactMedianWindow(window));
            case MedianMode::IncrementalExact:
                return MedianEstimator(IncrementalMedianWindow(window));
            case MedianMode::DisjointMoM: return MedianEstimator(DisjointMomWindow());
            case MedianMode::IncrementalApproxMoM: return MedianEstimator(ApproxMomWindow());
        }
        throw InvalidConfig("unknown median mode");
    }

    uint16_t push(uint16_t v) {
        return std::visit([v](auto& w) { return w.push(v); }, impl_);
    }

private:
    using Impl = std::variant<ExactMedianWindow, IncrementalMedianWindow, DisjointMomWindow,
                              ApproxMomWindow>;
    explicit MedianEstimator(Impl impl) : impl_(std::move(impl)) {}
    Impl impl_;
};

}  // namespace lsort
