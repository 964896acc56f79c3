#pragma once

// External data surfaces: int16 little-endian channel-interleaved recordings,
// the probe geometry text format, the single-line sortingOut frame codec, and
// the events CSV.
//
// sortingOut frames: idle level '1'; a '0' start bit, then a type bit ('1'
// sorted spike, '0' cluster merge), then the payload MSB-first --
// timestep(ts_bits) + cluster(cluster_bits) for spikes, kept + removed
// (cluster_bits each) for merges. Frames are separated by at least one idle
// bit; the packed byte form pads the tail with idle bits.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "lsort/bits.hpp"
#include "lsort/config.hpp"
#include "lsort/fixed.hpp"
#include "lsort/types.hpp"

namespace lsort {

// ---------------------------------------------------------------------------
// Raw recording reader
// ---------------------------------------------------------------------------

// Streams Samples out of an int16 LE interleaved byte source. Values outside
// the 12-bit range saturate and are counted; a trailing partial frame is
// dropped with the `truncated` flag raised.
class RecordingReader {
public:
    RecordingReader(std::istream& in, uint32_t num_channels)
        : in_(in), num_channels_(num_channels) {
        if (num_channels == 0)
            throw InvalidConfig("recording reader needs num_channels >= 1");
    }

    bool next(Sample& out) {
        if (buf_pos_ == buf_.size() && !refill())
            return false;
        const int16_t raw = buf_[buf_pos_++];
        int32_t v = raw;
        if (v < kSampleMin || v > kSampleMax) {
            ++saturated_;
            v = sat12(v);
        }
        out.channel = next_channel_;
        out.timestep = next_timestep_;
        out.value = static_cast<int16_t>(v);
        if (++next_channel_ == num_channels_) {
            next_channel_ = 0;
            ++next_timestep_;
        }
        return true;
    }

    uint64_t saturated() const { return saturated_; }
    bool truncated() const { return truncated_; }

private:
    bool refill() {
        // Read whole frames only; hold back a ragged tail until EOF decides
        // whether it completes.
        const size_t frame_bytes = size_t{num_channels_} * 2;
        std::vector<char> bytes(std::max<size_t>(frame_bytes, 1u << 16), 0);
        size_t have = carry_.size();
        std::copy(carry_.begin(), carry_.end(), bytes.begin());
        carry_.clear();
        in_.read(bytes.data() + have, static_cast<std::streamsize>(bytes.size() - have));
        have += static_cast<size_t>(in_.gcount());
        const size_t whole = (have / frame_bytes) * frame_bytes;
        if (whole == 0) {
            if (have > 0) truncated_ = true;
            return false;
        }
        carry_.assign(bytes.begin() + static_cast<ptrdiff_t>(whole),
                      bytes.begin() + static_cast<ptrdiff_t>(have));
        buf_.resize(whole / 2);
        for (size_t i = 0; i < buf_.size(); ++i) {
            const auto lo = static_cast<uint8_t>(bytes[2 * i]);
            const auto hi = static_cast<uint8_t>(bytes[2 * i + 1]);
            buf_[i] = static_cast<int16_t>(static_cast<uint16_t>(lo) |
                                           (static_cast<uint16_t>(hi) << 8));
        }
        buf_pos_ = 0;
        return true;
    }

    std::istream& in_;
    uint32_t num_channels_;
    uint32_t next_channel_ = 0;
    uint64_t next_timestep_ = 0;
    std::vector<int16_t> buf_;
    size_t buf_pos_ = 0;
    std::vector<char> carry_;
    uint64_t saturated_ = 0;
    bool truncated_ = false;
};

inline void write_recording(std::ostream& out, const std::vector<int16_t>& frames) {
    for (int16_t v : frames) {
        const auto u = static_cast<uint16_t>(v);
        const char bytes[2] = {static_cast<char>(u & 0xFF), static_cast<char>(u >> 8)};
        out.write(bytes, 2);
    }
}

// ---------------------------------------------------------------------------
// Geometry text format: "channel x_um z_um" per line, '#' comments
// ---------------------------------------------------------------------------

inline ProbeGeometry read_geometry(std::istream& in) {
    std::vector<ChannelPosition> positions;
    std::vector<bool> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        long channel;
        double x, z;
        if (!(ls >> channel)) continue;  // blank line
        if (!(ls >> x >> z) || channel < 0)
            throw ParseError("geometry line " + std::to_string(lineno) +
                             ": expected 'channel x_um z_um'");
        std::string rest;
        if (ls >> rest)
            throw ParseError("geometry line " + std::to_string(lineno) + ": trailing tokens");
        const auto c = static_cast<size_t>(channel);
        if (c >= seen.size()) {
            seen.resize(c + 1, false);
            positions.resize(c + 1);
        }
        if (seen[c])
            throw DuplicateChannel("channel " + std::to_string(channel) + " defined twice");
        seen[c] = true;
        positions[c] = ChannelPosition{x, z};
    }
    if (positions.empty())
        throw ParseError("geometry file has no channels");
    for (size_t c = 0; c < seen.size(); ++c)
        if (!seen[c])
            throw MissingChannel("channel " + std::to_string(c) + " missing");
    return ProbeGeometry(std::move(positions));
}

inline ProbeGeometry read_geometry_text(const std::string& text) {
    std::istringstream in(text);
    return read_geometry(in);
}

// ---------------------------------------------------------------------------
// sortingOut codec
// ---------------------------------------------------------------------------

inline void encode_events(const std::vector<SortEvent>& events, uint32_t ts_bits,
                          uint32_t cluster_bits, BitWriter& w) {
    const uint64_t ts_cap = (ts_bits >= 64) ? UINT64_MAX : (uint64_t{1} << ts_bits) - 1;
    const uint64_t id_cap = (cluster_bits >= 64) ? UINT64_MAX : (uint64_t{1} << cluster_bits) - 1;
    bool any = false;
    for (const SortEvent& ev : events) {
        w.push_bit(false);  // start
        if (const auto* s = std::get_if<SortedSpike>(&ev)) {
            if (s->timestep > ts_cap)
                throw FieldOverflow("timestep exceeds ts_bits");
            if (s->cluster > id_cap)
                throw FieldOverflow("cluster id exceeds cluster_bits");
            w.push_bit(true);
            w.push_bits(s->timestep, ts_bits);
            w.push_bits(s->cluster, cluster_bits);
        } else {
            const auto& m = std::get<ClusterMerge>(ev);
            if (m.kept > id_cap || m.removed > id_cap)
                throw FieldOverflow("cluster id exceeds cluster_bits");
            w.push_bit(false);
            w.push_bits(m.kept, cluster_bits);
            w.push_bits(m.removed, cluster_bits);
        }
        w.push_bit(true);  // idle separator
        any = true;
    }
    if (!any) w.push_bit(true);  // line idles high with no result
}

inline std::vector<SortEvent> decode_events(BitReader& r, uint32_t ts_bits,
                                            uint32_t cluster_bits) {
    std::vector<SortEvent> events;
    while (!r.done()) {
        if (r.read_bit()) continue;  // idle
        if (r.read_bit()) {
            SortedSpike s;
            s.timestep = r.read_bits(ts_bits);
            s.cluster = static_cast<uint32_t>(r.read_bits(cluster_bits));
            events.emplace_back(s);
        } else {
            ClusterMerge m;
            m.kept = static_cast<uint32_t>(r.read_bits(cluster_bits));
            m.removed = static_cast<uint32_t>(r.read_bits(cluster_bits));
            events.emplace_back(m);
        }
    }
    return events;
}

inline std::vector<uint8_t> encode_events_bytes(const std::vector<SortEvent>& events,
                                                uint32_t ts_bits, uint32_t cluster_bits) {
    BitWriter w;
    encode_events(events, ts_bits, cluster_bits, w);
    return w.take_bytes_idle_padded();
}

inline std::vector<SortEvent> decode_events_bytes(const std::vector<uint8_t>& bytes,
                                                  uint32_t ts_bits, uint32_t cluster_bits) {
    BitReader r(bytes, bytes.size() * 8);
    return decode_events(r, ts_bits, cluster_bits);
}

// ---------------------------------------------------------------------------
// Events CSV
// ---------------------------------------------------------------------------

// Sorted spikes carry their locator payload so results can be scored without
// rerunning the pipeline; merge rows carry the two ids.
//   spike,<ts>,<cluster>,<channel>,<amplitude>,<x_um>,<z_um>
//   merge,<kept>,<removed>
struct EventRecord {
    bool is_spike = true;
    SortedSpike spike;
    SpikeEvent detail;   // spike rows only
    ClusterMerge merge;  // merge rows only
};

inline std::string format_q2(int32_t raw) {
    char buf[32];
    const int32_t whole = raw / 4;
    const int32_t frac = std::abs(raw % 4) * 25;
    if (raw < 0 && whole == 0)
        std::snprintf(buf, sizeof buf, "-0.%02d", frac);
    else
        std::snprintf(buf, sizeof buf, "%d.%02d", whole, frac);
    return buf;
}

inline void write_events_csv(std::ostream& out, const std::vector<EventRecord>& records) {
    for (const EventRecord& r : records) {
        if (r.is_spike) {
            out << "spike," << r.spike.timestep << ',' << r.spike.cluster << ','
                << r.detail.central_channel << ',' << r.detail.amplitude << ','
                << format_q2(r.detail.position.x_raw) << ','
                << format_q2(r.detail.position.z_raw) << '\n';
        } else {
            out << "merge," << r.merge.kept << ',' << r.merge.removed << '\n';
        }
    }
}

inline std::vector<EventRecord> read_events_csv(std::istream& in) {
    std::vector<EventRecord> records;
    std::string line;
    int lineno = 0;
    auto parse_q2 = [](const std::string& s) {
        return static_cast<int32_t>(std::llround(std::stod(s) * 4.0));
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> f;
        std::istringstream ls(line);
        std::string tok;
        while (std::getline(ls, tok, ',')) f.push_back(tok);
        try {
            if (f.size() == 7 && f[0] == "spike") {
                EventRecord r;
                r.is_spike = true;
                r.spike.timestep = std::stoull(f[1]);
                r.spike.cluster = static_cast<uint32_t>(std::stoul(f[2]));
                r.detail.timestep = r.spike.timestep;
                r.detail.central_channel = static_cast<uint32_t>(std::stoul(f[3]));
                r.detail.amplitude = static_cast<uint16_t>(std::stoul(f[4]));
                r.detail.position = PositionQ2{parse_q2(f[5]), parse_q2(f[6])};
                records.push_back(r);
            } else if (f.size() == 3 && f[0] == "merge") {
                EventRecord r;
                r.is_spike = false;
                r.merge.kept = static_cast<uint32_t>(std::stoul(f[1]));
                r.merge.removed = static_cast<uint32_t>(std::stoul(f[2]));
                records.push_back(r);
            } else {
                throw ParseError("");
            }
        } catch (const std::exception&) {
            throw ParseError("events csv line " + std::to_string(lineno) + ": bad row");
        }
    }
    return records;
}

}  // namespace lsort
