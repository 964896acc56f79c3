#pragma once

// O-Sort over spike positions with a programmable fixed distance threshold.
// Each spike either joins the nearest cluster within the threshold (running-
// mean centroid update) or founds a new one; after an update the moved
// cluster is merged with any neighbour that came within the threshold, lower
// id surviving. Ids are never reused.

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "lsort/fixed.hpp"
#include "lsort/types.hpp"

namespace lsort {

struct Cluster {
    uint32_t id = 0;
    int32_t cx_q8 = 0;  // centroid, um with 8 fraction bits
    int32_t cz_q8 = 0;
    uint16_t count = 0;  // saturating
    bool alive = false;
};

struct AssignOutcome {
    uint32_t cluster = 0;
    std::vector<ClusterMerge> merges;
};

class OSortClusterer {
public:
    OSortClusterer(double threshold_um, uint32_t max_clusters, bool single_merge = false)
        : max_clusters_(max_clusters), single_merge_(single_merge) {
        const int64_t t_q8 = std::llround(threshold_um * 256.0);
        threshold2_q16_ = t_q8 * t_q8;
    }

    // Argmin by squared Euclidean distance over alive clusters, lowest id on
    // ties. Distance reported in um^2 with 16 fraction bits.
    std::pair<uint32_t, int64_t> nearest(PositionQ2 p) const {
        const auto [id, d2] = nearest_impl(to_q8_x(p), to_q8_z(p), kNoExclude);
        if (id == kNoExclude)
            throw NoClusters("nearest() with no alive clusters");
        return {id, d2};
    }

    AssignOutcome assign(PositionQ2 p) {
        AssignOutcome out;
        const int32_t px = to_q8_x(p);
        const int32_t pz = to_q8_z(p);

        auto [near_id, near_d2] = nearest_impl(px, pz, kNoExclude);
        if (near_id == kNoExclude || near_d2 > threshold2_q16_) {
            if (clusters_.size() < max_clusters_) {
                out.cluster = create(px, pz);
                return out;
            }
            capacity_exhausted_ = true;  // fall back to the nearest cluster
        }
        out.cluster = near_id;

        Cluster* cur = &clusters_[near_id];
        const uint32_t n = cur->count;
        cur->cx_q8 = static_cast<int32_t>(div_round(int64_t{cur->cx_q8} * n + px, n + 1));
        cur->cz_q8 = static_cast<int32_t>(div_round(int64_t{cur->cz_q8} * n + pz, n + 1));
        cur->count = sat_count(uint32_t{cur->count} + 1);

        // The updated centroid may have drifted into another cluster's
        // threshold; merge to a fixpoint (or once, under hw_single_merge).
        while (true) {
            const auto [other_id, d2] = nearest_impl(cur->cx_q8, cur->cz_q8, cur->id);
            if (other_id == kNoExclude || d2 > threshold2_q16_) break;
            Cluster& other = clusters_[other_id];
            const uint32_t kept = std::min(cur->id, other.id);
            const uint32_t removed = std::max(cur->id, other.id);
            Cluster& k = clusters_[kept];
            Cluster& r = clusters_[removed];
            const int64_t total = int64_t{k.count} + r.count;
            k.cx_q8 = static_cast<int32_t>(
                div_round(int64_t{k.cx_q8} * k.count + int64_t{r.cx_q8} * r.count, total));
            k.cz_q8 = static_cast<int32_t>(
                div_round(int64_t{k.cz_q8} * k.count + int64_t{r.cz_q8} * r.count, total));
            k.count = sat_count(uint32_t{k.count} + r.count);
            r.alive = false;
            --alive_;
            out.merges.push_back(ClusterMerge{kept, removed});
            cur = &k;
            if (single_merge_) break;
        }
        return out;
    }

    const std::vector<Cluster>& clusters() const { return clusters_; }
    size_t alive_count() const { return alive_; }
    bool capacity_exhausted() const { return capacity_exhausted_; }

private:
    static constexpr uint32_t kNoExclude = UINT32_MAX;

    static int32_t to_q8_x(PositionQ2 p) { return p.x_raw << 6; }
    static int32_t to_q8_z(PositionQ2 p) { return p.z_raw << 6; }

    static uint16_t sat_count(uint32_t n) { return n > 0xFFFFu ? 0xFFFFu : static_cast<uint16_t>(n); }

    std::pair<uint32_t, int64_t> nearest_impl(int32_t px, int32_t pz, uint32_t exclude) const {
        uint32_t best = kNoExclude;
        int64_t best_d2 = 0;
        for (const Cluster& c : clusters_) {
            if (!c.alive || c.id == exclude) continue;
            const int64_t dx = int64_t{c.cx_q8} - px;
            const int64_t dz = int64_t{c.cz_q8} - pz;
            const int64_t d2 = dx * dx + dz * dz;
            if (best == kNoExclude || d2 < best_d2) {
                best = c.id;
                best_d2 = d2;
            }
        }
        return {best, best_d2};
    }

    uint32_t create(int32_t px, int32_t pz) {
        Cluster c;
        c.id = static_cast<uint32_t>(clusters_.size());
        c.cx_q8 = px;
        c.cz_q8 = pz;
        c.count = 1;
        c.alive = true;
        clusters_.push_back(c);
        ++alive_;
        return c.id;
    }

    int64_t threshold2_q16_ = 0;
    uint32_t max_clusters_;
    bool single_merge_;
    bool capacity_exhausted_ = false;
    size_t alive_ = 0;
    std::vector<Cluster> clusters_;
};

}  // namespace lsort
