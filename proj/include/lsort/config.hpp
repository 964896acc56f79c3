#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "lsort/types.hpp"

namespace lsort {

enum class MedianMode {
    ExactSort,            // full-sort reference over the whole window
    IncrementalExact,     // age-counter incremental sort, exact result
    DisjointMoM,          // median of 5 disjoint block medians over the window
    IncrementalApproxMoM  // two-stage incremental approximation, 8 stored samples
};

enum class LocalizationMode {
    CentralChannel,  // position of the max-amplitude channel
    PeakCoM          // amplitude-weighted mean of contributing peak positions
};

struct PipelineConfig {
    uint32_t num_channels = 384;
    uint32_t sampling_rate_hz = 30000;
    uint32_t median_window = 25;          // N of the detection threshold median
    double n_th = 6.0;                    // threshold multiplier, quantized to Q4.2
    MedianMode median_mode = MedianMode::IncrementalApproxMoM;
    uint32_t match_window = 16;           // peak joins a spike if ts gap <= this
    double match_radius_um = 100.0;       // ... and channel distance <= this
    uint32_t emit_gap = 20;               // head spike emitted once gap >= this
    uint32_t bank_capacity = 16;          // fixed by the spike-bank structure
    LocalizationMode localization_mode = LocalizationMode::CentralChannel;
    double cluster_threshold_um = 25.0;
    uint32_t max_clusters = 384;
    uint32_t ts_bits = 32;
    uint32_t cluster_bits = 9;
    bool hw_single_merge = false;         // at most one cluster merge per spike

    void validate() const;
};

inline void PipelineConfig::validate() const {
    if (num_channels == 0)
        throw InvalidConfig("num_channels must be >= 1");
    if (sampling_rate_hz == 0)
        throw InvalidConfig("sampling_rate_hz must be > 0");
    if (median_window < 3)
        throw InvalidConfig("median_window must be >= 3");
    if ((median_mode == MedianMode::DisjointMoM ||
         median_mode == MedianMode::IncrementalApproxMoM) &&
        median_window != 25)
        throw InvalidConfig("median-of-median modes require median_window == 25");
    if (bank_capacity != 16)
        throw InvalidConfig("bank_capacity is fixed at 16");
    if (n_th < 0.0 || n_th > 15.75)
        throw InvalidConfig("n_th must fit Q4.2 (0 .. 15.75)");
    if (ts_bits == 0 || ts_bits > 64)
        throw InvalidConfig("ts_bits must be in 1..64");
    if (cluster_bits == 0 || cluster_bits > 32)
        throw InvalidConfig("cluster_bits must be in 1..32");
    if (max_clusters == 0)
        throw InvalidConfig("max_clusters must be >= 1");
    if (cluster_bits < 64 && (uint64_t{1} << cluster_bits) < max_clusters)
        throw InvalidConfig("2^cluster_bits must cover max_clusters");
    if (match_radius_um < 0.0 || cluster_threshold_um < 0.0)
        throw InvalidConfig("distances must be non-negative");
}

// --- key=value config file -------------------------------------------------

inline const char* to_string(MedianMode m) {
    switch (m) {
        case MedianMode::ExactSort: return "ExactSort";
        case MedianMode::IncrementalExact: return "IncrementalExact";
        case MedianMode::DisjointMoM: return "DisjointMoM";
        case MedianMode::IncrementalApproxMoM: return "IncrementalApproxMoM";
    }
    return "?";
}

inline const char* to_string(LocalizationMode m) {
    switch (m) {
        case LocalizationMode::CentralChannel: return "CentralChannel";
        case LocalizationMode::PeakCoM: return "PeakCoM";
    }
    return "?";
}

inline MedianMode median_mode_from_string(const std::string& s) {
    if (s == "ExactSort") return MedianMode::ExactSort;
    if (s == "IncrementalExact") return MedianMode::IncrementalExact;
    if (s == "DisjointMoM") return MedianMode::DisjointMoM;
    if (s == "IncrementalApproxMoM") return MedianMode::IncrementalApproxMoM;
    throw ParseError("unknown median_mode: " + s);
}

inline LocalizationMode localization_mode_from_string(const std::string& s) {
    if (s == "CentralChannel") return LocalizationMode::CentralChannel;
    if (s == "PeakCoM") return LocalizationMode::PeakCoM;
    throw ParseError("unknown localization_mode: " + s);
}

inline PipelineConfig parse_pipeline_config(std::istream& in) {
    PipelineConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("config line " + std::to_string(lineno) + ": expected key=value");
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        auto trim = [](std::string& s) {
            auto b = s.find_first_not_of(" \t");
            auto e = s.find_last_not_of(" \t");
            s = (b == std::string::npos) ? std::string{} : s.substr(b, e - b + 1);
        };
        trim(key);
        trim(val);
        try {
            if (key == "num_channels") cfg.num_channels = static_cast<uint32_t>(std::stoul(val));
            else if (key == "sampling_rate_hz") cfg.sampling_rate_hz = static_cast<uint32_t>(std::stoul(val));
            else if (key == "median_window") cfg.median_window = static_cast<uint32_t>(std::stoul(val));
            else if (key == "n_th") cfg.n_th = std::stod(val);
            else if (key == "median_mode") cfg.median_mode = median_mode_from_string(val);
            else if (key == "match_window") cfg.match_window = static_cast<uint32_t>(std::stoul(val));
            else if (key == "match_radius_um") cfg.match_radius_um = std::stod(val);
            else if (key == "emit_gap") cfg.emit_gap = static_cast<uint32_t>(std::stoul(val));
            else if (key == "bank_capacity") cfg.bank_capacity = static_cast<uint32_t>(std::stoul(val));
            else if (key == "localization_mode") cfg.localization_mode = localization_mode_from_string(val);
            else if (key == "cluster_threshold_um") cfg.cluster_threshold_um = std::stod(val);
            else if (key == "max_clusters") cfg.max_clusters = static_cast<uint32_t>(std::stoul(val));
            else if (key == "ts_bits") cfg.ts_bits = static_cast<uint32_t>(std::stoul(val));
            else if (key == "cluster_bits") cfg.cluster_bits = static_cast<uint32_t>(std::stoul(val));
            else if (key == "hw_single_merge") cfg.hw_single_merge = (val == "1" || val == "true");
            else throw ParseError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception&) {
            throw ParseError("config line " + std::to_string(lineno) + ": bad value for '" + key + "'");
        }
    }
    return cfg;
}

inline void write_pipeline_config(std::ostream& out, const PipelineConfig& cfg) {
    out << "num_channels=" << cfg.num_channels << '\n'
        << "sampling_rate_hz=" << cfg.sampling_rate_hz << '\n'
        << "median_window=" << cfg.median_window << '\n'
        << "n_th=" << cfg.n_th << '\n'
        << "median_mode=" << to_string(cfg.median_mode) << '\n'
        << "match_window=" << cfg.match_window << '\n'
        << "match_radius_um=" << cfg.match_radius_um << '\n'
        << "emit_gap=" << cfg.emit_gap << '\n'
        << "bank_capacity=" << cfg.bank_capacity << '\n'
        << "localization_mode=" << to_string(cfg.localization_mode) << '\n'
        << "cluster_threshold_um=" << cfg.cluster_threshold_um << '\n'
        << "max_clusters=" << cfg.max_clusters << '\n'
        << "ts_bits=" << cfg.ts_bits << '\n'
        << "cluster_bits=" << cfg.cluster_bits << '\n'
        << "hw_single_merge=" << (cfg.hw_single_merge ? 1 : 0) << '\n';
}

}  // namespace lsort
