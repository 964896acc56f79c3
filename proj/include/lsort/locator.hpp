#pragma once

// Spike bank: groups supra-threshold peaks into spikes by spatio-temporal
// proximity and retains the max-amplitude peak per ongoing spike. A FIFO of
// 16 entries; only the head is ever emitted by the gap check, and a 17th
// concurrent spike forces the head out early. Emitted spikes are localized
// either as the central channel's position or as the amplitude-weighted mean
// of all matched peaks.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "lsort/config.hpp"
#include "lsort/fixed.hpp"
#include "lsort/types.hpp"

namespace lsort {

inline PositionQ2 localize_central(uint32_t channel, const ProbeGeometry& geometry) {
    const ChannelPosition& p = geometry.at(channel);  // throws UnknownChannel
    return PositionQ2{static_cast<int32_t>(std::llround(p.x_um * 4.0)),
                      static_cast<int32_t>(std::llround(p.z_um * 4.0))};
}

// Center of mass from running sums in quarter-um amplitude-weighted units.
inline PositionQ2 localize_com(int64_t sum_amp_x_q2, int64_t sum_amp_z_q2, uint64_t sum_amp) {
    if (sum_amp == 0)
        throw ZeroMass("center of mass of zero total amplitude");
    return PositionQ2{static_cast<int32_t>(div_round(sum_amp_x_q2, static_cast<int64_t>(sum_amp))),
                      static_cast<int32_t>(div_round(sum_amp_z_q2, static_cast<int64_t>(sum_amp)))};
}

struct SpikeBankEntry {
    uint64_t timestep = 0;   // of the best peak so far
    uint32_t channel = 0;
    uint16_t amplitude = 0;
    int64_t sum_amp_x_q2 = 0;
    int64_t sum_amp_z_q2 = 0;
    uint64_t sum_amp = 0;
};

class SpikeLocator {
public:
    static constexpr size_t kBankCapacity = 16;

    SpikeLocator(const PipelineConfig& cfg, const ProbeGeometry& geometry)
        : match_window_(cfg.match_window),
          emit_gap_(cfg.emit_gap),
          radius2_(cfg.match_radius_um * cfg.match_radius_um),
          com_mode_(cfg.localization_mode == LocalizationMode::PeakCoM) {
        pos_.reserve(geometry.num_channels());
        pos_q2_.reserve(geometry.num_channels());
        for (uint32_t c = 0; c < geometry.num_channels(); ++c) {
            pos_.push_back(geometry.at(c));
            pos_q2_.push_back(localize_central(c, geometry));
        }
    }

    // Scan oldest-first; the first spatio-temporally proximate entry absorbs
    // the peak (overwrite only on strictly greater amplitude). No match
    // creates a tail entry, early-emitting the head if the bank is full.
    std::optional<SpikeEvent> feed_peak(const Peak& p) {
        for (size_t i = 0; i < count_; ++i) {
            SpikeBankEntry& e = bank_[i];
            if (p.timestep - e.timestep > match_window_) continue;
            const double dx = pos_[p.channel].x_um - pos_[e.channel].x_um;
            const double dz = pos_[p.channel].z_um - pos_[e.channel].z_um;
            if (dx * dx + dz * dz > radius2_) continue;
            if (p.amplitude > e.amplitude) {
                e.timestep = p.timestep;
                e.channel = p.channel;
                e.amplitude = p.amplitude;
            }
            e.sum_amp_x_q2 += int64_t{p.amplitude} * pos_q2_[p.channel].x_raw;
            e.sum_amp_z_q2 += int64_t{p.amplitude} * pos_q2_[p.channel].z_raw;
            e.sum_amp += p.amplitude;
            return std::nullopt;
        }
        std::optional<SpikeEvent> out;
        if (count_ == kBankCapacity) {
            out = emit_head();
            ++early_emits_;
        }
        SpikeBankEntry e;
        e.timestep = p.timestep;
        e.channel = p.channel;
        e.amplitude = p.amplitude;
        e.sum_amp_x_q2 = int64_t{p.amplitude} * pos_q2_[p.channel].x_raw;
        e.sum_amp_z_q2 = int64_t{p.amplitude} * pos_q2_[p.channel].z_raw;
        e.sum_amp = p.amplitude;
        bank_[count_++] = e;
        return out;
    }

    // Gap check on peak-less cycles: the head leaves once it has aged past
    // the emit gap. At most one emission per call.
    std::optional<SpikeEvent> tick(uint64_t now) {
        if (count_ > 0 && now - bank_[0].timestep >= emit_gap_)
            return emit_head();
        return std::nullopt;
    }

    // Drains the oldest entry unconditionally (end-of-stream flush).
    std::optional<SpikeEvent> pop_oldest() {
        if (count_ == 0) return std::nullopt;
        return emit_head();
    }

    size_t occupancy() const { return count_; }
    uint64_t early_emits() const { return early_emits_; }
    const SpikeBankEntry& entry(size_t i) const { return bank_[i]; }

private:
    SpikeEvent emit_head() {
        const SpikeBankEntry& e = bank_[0];
        SpikeEvent ev;
        ev.timestep = e.timestep;
        ev.central_channel = e.channel;
        ev.amplitude = e.amplitude;
        ev.position = com_mode_ ? localize_com(e.sum_amp_x_q2, e.sum_amp_z_q2, e.sum_amp)
                                : pos_q2_[e.channel];
        for (size_t i = 1; i < count_; ++i) bank_[i - 1] = bank_[i];
        --count_;
        return ev;
    }

    uint64_t match_window_;
    uint64_t emit_gap_;
    double radius2_;
    bool com_mode_;
    std::vector<ChannelPosition> pos_;
    std::vector<PositionQ2> pos_q2_;
    std::array<SpikeBankEntry, kBankCapacity> bank_{};
    size_t count_ = 0;
    uint64_t early_emits_ = 0;
};

}  // namespace lsort
