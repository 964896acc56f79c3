#pragma once

// Synthetic multi-channel recordings with ground truth. Each unit fires a
// Poisson-like train (per-timestep Bernoulli with a template-length dead
// time); every firing adds a biphasic template to all channels, scaled by
// A * exp(-d / lambda) with d the channel-to-unit distance. Gaussian noise
// everywhere, quantized to 12 bits with saturation. Byte-identical output
// for a given (config, geometry, seed).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lsort/fixed.hpp"
#include "lsort/types.hpp"

namespace lsort {

struct SynthUnit {
    double x_um = 0.0;
    double z_um = 0.0;
    double amplitude = 500.0;  // peak deflection at distance 0, LSB
    double rate_hz = 10.0;
};

struct SynthConfig {
    std::vector<SynthUnit> units;
    uint32_t sampling_rate_hz = 30000;
    double duration_s = 1.0;
    double decay_lambda_um = 25.0;
    double noise_sigma = 30.0;  // LSB
    uint64_t seed = 1;

    static constexpr uint32_t kTemplateLen = 30;
};

struct GroundTruth {
    struct Firing {
        uint32_t unit = 0;
        uint64_t timestep = 0;  // time of the template's peak deflection
    };
    std::vector<SynthUnit> units;
    std::vector<Firing> firings;  // sorted by (timestep, unit)
};

namespace detail {

// One-period biphasic deflection, negative lobe first, normalized so the
// extreme samples are exactly -1/+1.
inline std::vector<double> biphasic_template() {
    std::vector<double> t(SynthConfig::kTemplateLen);
    double peak = 0.0;
    for (uint32_t i = 0; i < SynthConfig::kTemplateLen; ++i) {
        t[i] = -std::sin(2.0 * M_PI * i / SynthConfig::kTemplateLen);
        peak = std::max(peak, std::abs(t[i]));
    }
    for (double& v : t) v /= peak;
    return t;
}

inline uint32_t template_peak_offset() {
    const auto t = biphasic_template();
    uint32_t best = 0;
    for (uint32_t i = 1; i < t.size(); ++i)
        if (std::abs(t[i]) > std::abs(t[best])) best = i;
    return best;
}

// Deterministic standard normal: Box-Muller over mt19937 draws.
class Gaussian {
public:
    explicit Gaussian(uint64_t seed) : rng_(static_cast<uint32_t>(seed)) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    double uniform01() { return (rng_() + 0.5) * (1.0 / 4294967296.0); }

    std::mt19937 rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace detail

// Chunked generator so multi-gigabyte recordings never need to exist whole.
// Frames come out in stream order (timestep-major, channel-minor).
class SynthStream {
public:
    SynthStream(const SynthConfig& cfg, const ProbeGeometry& geometry)
        : cfg_(cfg),
          num_channels_(geometry.num_channels()),
          total_timesteps_(static_cast<uint64_t>(cfg.duration_s * cfg.sampling_rate_hz)),
          tmpl_(detail::biphasic_template()),
          noise_(cfg.seed + 0x9E3779B9u) {
        // Per unit x channel attenuation table.
        weights_.resize(cfg_.units.size());
        for (size_t u = 0; u < cfg_.units.size(); ++u) {
            weights_[u].resize(num_channels_);
            for (uint32_t c = 0; c < num_channels_; ++c) {
                const auto& p = geometry.at(c);
                const double dx = p.x_um - cfg_.units[u].x_um;
                const double dz = p.z_um - cfg_.units[u].z_um;
                const double d = std::sqrt(dx * dx + dz * dz);
                weights_[u][c] = cfg_.units[u].amplitude * std::exp(-d / cfg_.decay_lambda_um);
            }
        }
        draw_firings();
    }

    uint64_t total_timesteps() const { return total_timesteps_; }
    uint32_t num_channels() const { return num_channels_; }
    const GroundTruth& ground_truth() const { return truth_; }

    // Appends up to max_timesteps frames; returns the number generated.
    uint64_t fill(std::vector<int16_t>& out, uint64_t max_timesteps) {
        uint64_t made = 0;
        const double sigma = cfg_.noise_sigma;
        for (; made < max_timesteps && next_ts_ < total_timesteps_; ++made, ++next_ts_) {
            while (active_lo_ < onsets_.size() &&
                   onsets_[active_lo_].timestep + SynthConfig::kTemplateLen <= next_ts_)
                ++active_lo_;
            while (active_hi_ < onsets_.size() && onsets_[active_hi_].timestep <= next_ts_)
                ++active_hi_;
            for (uint32_t c = 0; c < num_channels_; ++c) {
                double v = sigma > 0.0 ? sigma * noise_.next() : 0.0;
                for (size_t i = active_lo_; i < active_hi_; ++i) {
                    const auto& f = onsets_[i];
                    v += tmpl_[next_ts_ - f.timestep] * weights_[f.unit][c];
                }
                out.push_back(static_cast<int16_t>(sat12(std::llround(v))));
            }
        }
        return made;
    }

private:
    void draw_firings() {
        // Bernoulli per timestep at rate/fs with a template-length dead time.
        std::mt19937 rng(static_cast<uint32_t>(cfg_.seed));
        const double scale = 1.0 / 4294967296.0;
        std::vector<GroundTruth::Firing> onsets;
        for (uint32_t u = 0; u < cfg_.units.size(); ++u) {
            const double p = cfg_.units[u].rate_hz / cfg_.sampling_rate_hz;
            uint64_t dead_until = 0;
            for (uint64_t t = 0; t + SynthConfig::kTemplateLen <= total_timesteps_; ++t) {
                const double draw = (rng() + 0.5) * scale;
                if (t < dead_until || draw >= p) continue;
                onsets.push_back({u, t});
                dead_until = t + SynthConfig::kTemplateLen;
            }
        }
        std::sort(onsets.begin(), onsets.end(), [](const auto& a, const auto& b) {
            return a.timestep != b.timestep ? a.timestep < b.timestep : a.unit < b.unit;
        });
        onsets_ = onsets;
        truth_.units = cfg_.units;
        const uint32_t peak_off = detail::template_peak_offset();
        truth_.firings.reserve(onsets.size());
        for (const auto& f : onsets)
            truth_.firings.push_back({f.unit, f.timestep + peak_off});
    }

    SynthConfig cfg_;
    uint32_t num_channels_;
    uint64_t total_timesteps_;
    std::vector<double> tmpl_;
    detail::Gaussian noise_;
    std::vector<std::vector<double>> weights_;
    std::vector<GroundTruth::Firing> onsets_;
    GroundTruth truth_;
    uint64_t next_ts_ = 0;
    size_t active_lo_ = 0;
    size_t active_hi_ = 0;
};

// Whole-recording convenience for fixtures that fit in memory.
inline std::pair<std::vector<int16_t>, GroundTruth> synthesize(const SynthConfig& cfg,
                                                               const ProbeGeometry& geometry) {
    SynthStream stream(cfg, geometry);
    std::vector<int16_t> frames;
    frames.reserve(stream.total_timesteps() * geometry.num_channels());
    stream.fill(frames, stream.total_timesteps());
    return {std::move(frames), stream.ground_truth()};
}

// --- ground truth CSV -------------------------------------------------------
//   unit,<id>,<x_um>,<z_um>
//   fire,<unit>,<timestep>

inline void write_ground_truth_csv(std::ostream& out, const GroundTruth& gt) {
    char buf[64];
    for (size_t u = 0; u < gt.units.size(); ++u) {
        std::snprintf(buf, sizeof buf, "unit,%zu,%.3f,%.3f", u, gt.units[u].x_um,
                      gt.units[u].z_um);
        out << buf << '\n';
    }
    for (const auto& f : gt.firings)
        out << "fire," << f.unit << ',' << f.timestep << '\n';
}

inline GroundTruth read_ground_truth_csv(std::istream& in) {
    GroundTruth gt;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string kind;
        std::getline(ls, kind, ',');
        try {
            if (kind == "unit") {
                std::string id, x, z;
                std::getline(ls, id, ',');
                std::getline(ls, x, ',');
                std::getline(ls, z, ',');
                const size_t u = std::stoul(id);
                if (gt.units.size() <= u) gt.units.resize(u + 1);
                gt.units[u].x_um = std::stod(x);
                gt.units[u].z_um = std::stod(z);
            } else if (kind == "fire") {
                std::string u, t;
                std::getline(ls, u, ',');
                std::getline(ls, t, ',');
                gt.firings.push_back(
                    {static_cast<uint32_t>(std::stoul(u)), std::stoull(t)});
            } else {
                throw ParseError("");
            }
        } catch (const std::exception&) {
            throw ParseError("ground truth line " + std::to_string(lineno) + ": bad row");
        }
    }
    return gt;
}

}  // namespace lsort
