#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "lsort/fixed.hpp"

namespace lsort {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidConfig : Error { using Error::Error; };
struct ConfigMismatch : Error { using Error::Error; };
struct OutOfOrderInput : Error { using Error::Error; };
struct InvalidBand : Error { using Error::Error; };
struct CoeffOverflow : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };
struct WrongLength : Error { using Error::Error; };
struct UnknownChannel : Error { using Error::Error; };
struct ZeroMass : Error { using Error::Error; };
struct NoClusters : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct DuplicateChannel : Error { using Error::Error; };
struct MissingChannel : Error { using Error::Error; };
struct FieldOverflow : Error { using Error::Error; };
struct TruncatedFrame : Error { using Error::Error; };

// ---------------------------------------------------------------------------
// Stream domain types
// ---------------------------------------------------------------------------

// One quantized voltage reading. Channels arrive 0..C-1 within each timestep.
struct Sample {
    uint32_t channel = 0;
    uint64_t timestep = 0;
    int16_t value = 0;  // [-2048, 2047]
};

// A supra-threshold detection: |filtered| strictly above the channel threshold.
struct Peak {
    uint32_t channel = 0;
    uint64_t timestep = 0;
    uint16_t amplitude = 0;  // |filtered sample|

    friend bool operator==(const Peak&, const Peak&) = default;
};

// A grouped spike as emitted by the locator: the retained max-amplitude peak
// plus the spike's position estimate.
struct SpikeEvent {
    uint64_t timestep = 0;
    uint32_t central_channel = 0;
    uint16_t amplitude = 0;
    PositionQ2 position{};

    friend bool operator==(const SpikeEvent&, const SpikeEvent&) = default;
};

struct SortedSpike {
    uint64_t timestep = 0;
    uint32_t cluster = 0;

    friend bool operator==(const SortedSpike&, const SortedSpike&) = default;
};

struct ClusterMerge {
    uint32_t kept = 0;
    uint32_t removed = 0;  // invariant: kept < removed

    friend bool operator==(const ClusterMerge&, const ClusterMerge&) = default;
};

using SortEvent = std::variant<SortedSpike, ClusterMerge>;

// ---------------------------------------------------------------------------
// Probe geometry
// ---------------------------------------------------------------------------

struct ChannelPosition {
    double x_um = 0.0;
    double z_um = 0.0;
};

class ProbeGeometry {
public:
    ProbeGeometry() = default;
    explicit ProbeGeometry(std::vector<ChannelPosition> positions)
        : positions_(std::move(positions)) {}

    uint32_t num_channels() const { return static_cast<uint32_t>(positions_.size()); }

    const ChannelPosition& at(uint32_t channel) const {
        if (channel >= positions_.size())
            throw UnknownChannel("channel " + std::to_string(channel) + " outside geometry");
        return positions_[channel];
    }

    const std::vector<ChannelPosition>& positions() const { return positions_; }

private:
    std::vector<ChannelPosition> positions_;
};

}  // namespace lsort
