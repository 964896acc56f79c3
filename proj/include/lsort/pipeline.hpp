#pragma once

// The full sorting chain under the channel-interleaved streaming contract:
// filter -> detector -> spike bank -> clusterer. One sample in, zero or more
// sort events out, in causal order (a spike's merge events follow its
// SortedSpike). Deterministic for a given (config, geometry, stream).

#include <cstdint>
#include <vector>

#include "lsort/clusterer.hpp"
#include "lsort/config.hpp"
#include "lsort/detector.hpp"
#include "lsort/filter.hpp"
#include "lsort/locator.hpp"
#include "lsort/types.hpp"

namespace lsort {

struct PipelineStats {
    uint64_t samples = 0;
    uint64_t peaks = 0;
    uint64_t spikes = 0;         // locator emissions (incl. flush)
    uint64_t sorted_spikes = 0;
    uint64_t merges = 0;
    uint64_t early_emits = 0;    // bank-full emissions
    uint64_t filter_saturations = 0;
    bool cluster_capacity_hit = false;
};

class Pipeline {
public:
    Pipeline(const PipelineConfig& cfg, ProbeGeometry geometry)
        : cfg_(validated(cfg, geometry)),
          geometry_(std::move(geometry)),
          filters_(cfg_.num_channels,
                   quantize_coeffs(design_bandpass(cfg_.sampling_rate_hz))),
          locator_(cfg_, geometry_),
          clusterer_(cfg_.cluster_threshold_um, cfg_.max_clusters, cfg_.hw_single_merge) {
        const Q4p2 n_th = Q4p2::from_double(cfg_.n_th);
        detectors_.reserve(cfg_.num_channels);
        for (uint32_t c = 0; c < cfg_.num_channels; ++c)
            detectors_.emplace_back(c, cfg_.median_mode, cfg_.median_window, n_th);
    }

    // Samples must arrive channels 0..C-1 in order within a timestep, frames
    // in strictly increasing timestep order.
    void process_sample(const Sample& s, std::vector<SortEvent>& out) {
        check_order(s);
        ++stats_.samples;
        const int16_t y = filters_.step(s.channel, s.value);
        if (auto peak = detectors_[s.channel].detect(s.timestep, y)) {
            ++stats_.peaks;
            if (auto early = locator_.feed_peak(*peak))
                dispatch(*early, out);
        } else if (auto spike = locator_.tick(s.timestep)) {
            dispatch(*spike, out);
        }
    }

    std::vector<SortEvent> process_sample(const Sample& s) {
        std::vector<SortEvent> out;
        process_sample(s, out);
        return out;
    }

    // Drains the spike bank oldest-first; the bank is empty afterwards.
    void flush(std::vector<SortEvent>& out) {
        while (auto spike = locator_.pop_oldest())
            dispatch(*spike, out);
    }

    std::vector<SortEvent> flush() {
        std::vector<SortEvent> out;
        flush(out);
        return out;
    }

    PipelineStats stats() const {
        PipelineStats s = stats_;
        s.filter_saturations = filters_.saturations();
        s.early_emits = locator_.early_emits();
        s.cluster_capacity_hit = clusterer_.capacity_exhausted();
        return s;
    }

    const PipelineConfig& config() const { return cfg_; }
    const ProbeGeometry& geometry() const { return geometry_; }
    const OSortClusterer& clusterer() const { return clusterer_; }
    const FilterBank& filters() const { return filters_; }

private:
    static const PipelineConfig& validated(const PipelineConfig& cfg,
                                           const ProbeGeometry& geometry) {
        cfg.validate();
        if (geometry.num_channels() != cfg.num_channels)
            throw ConfigMismatch("geometry has " + std::to_string(geometry.num_channels()) +
                                 " channels, config expects " +
                                 std::to_string(cfg.num_channels));
        return cfg;
    }

    void check_order(const Sample& s) {
        if (s.channel != expect_channel_)
            throw OutOfOrderInput("expected channel " + std::to_string(expect_channel_) +
                                  ", got " + std::to_string(s.channel));
        if (expect_channel_ == 0) {
            if (have_frame_ && s.timestep <= current_ts_)
                throw OutOfOrderInput("timestep must increase between frames");
            current_ts_ = s.timestep;
            have_frame_ = true;
        } else if (s.timestep != current_ts_) {
            throw OutOfOrderInput("timestep changed mid-frame");
        }
        expect_channel_ = (expect_channel_ + 1 == cfg_.num_channels) ? 0 : expect_channel_ + 1;
    }

    void dispatch(const SpikeEvent& spike, std::vector<SortEvent>& out) {
        ++stats_.spikes;
        AssignOutcome res = clusterer_.assign(spike.position);
        out.push_back(SortedSpike{spike.timestep, res.cluster});
        ++stats_.sorted_spikes;
        for (const ClusterMerge& m : res.merges) {
            out.push_back(m);
            ++stats_.merges;
        }
    }

    PipelineConfig cfg_;
    ProbeGeometry geometry_;
    FilterBank filters_;
    std::vector<ChannelDetector> detectors_;
    SpikeLocator locator_;
    OSortClusterer clusterer_;
    uint32_t expect_channel_ = 0;
    uint64_t current_ts_ = 0;
    bool have_frame_ = false;
    PipelineStats stats_;
};

}  // namespace lsort
