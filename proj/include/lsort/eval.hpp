#pragma once

// Detection and classification scoring against synthetic ground truth.
// Matching is greedy in time order and one-to-one; definitions are fixed
// here so reported numbers are reproducible.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "lsort/synth.hpp"
#include "lsort/types.hpp"
#include "lsort/wire.hpp"

namespace lsort {

struct DetectionMetrics {
    uint64_t tp = 0;
    uint64_t fp = 0;
    uint64_t fn = 0;
    double accuracy = 0.0;   // TP / (TP + FN)
    double precision = 0.0;  // TP / (TP + FP)
    // matched (detection index, ground-truth firing index) pairs
    std::vector<std::pair<size_t, size_t>> matches;
};

// Greedy one-to-one matching in time order: a detection claims the earliest
// unmatched firing within tol_samples whose unit lies within tol_um of the
// detection's position.
inline DetectionMetrics eval_detection(std::vector<SpikeEvent> detections,
                                       const GroundTruth& gt, uint64_t tol_samples,
                                       double tol_um) {
    std::vector<size_t> order(detections.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return detections[a].timestep < detections[b].timestep;
    });

    DetectionMetrics m;
    std::vector<bool> taken(gt.firings.size(), false);
    size_t window_lo = 0;
    for (size_t oi : order) {
        const SpikeEvent& d = detections[oi];
        while (window_lo < gt.firings.size() &&
               gt.firings[window_lo].timestep + tol_samples < d.timestep)
            ++window_lo;
        for (size_t gi = window_lo; gi < gt.firings.size(); ++gi) {
            const auto& f = gt.firings[gi];
            if (f.timestep > d.timestep + tol_samples) break;
            if (taken[gi]) continue;
            const auto& u = gt.units[f.unit];
            const double dx = d.position.x_um() - u.x_um;
            const double dz = d.position.z_um() - u.z_um;
            if (dx * dx + dz * dz > tol_um * tol_um) continue;
            taken[gi] = true;
            m.matches.emplace_back(oi, gi);
            ++m.tp;
            break;
        }
    }
    m.fn = gt.firings.size() - m.tp;
    m.fp = detections.size() - m.tp;
    m.accuracy = (m.tp + m.fn) ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn) : 0.0;
    m.precision =
        (m.tp + m.fp) ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp) : 0.0;
    return m;
}

struct ClassificationResult {
    double accuracy = 0.0;
    bool empty_tp = false;  // no true positives to score
};

// Contingency table cluster x unit over the matched detections; clusters and
// units are paired greedily by descending cell count, and the matched mass
// over the TP count is the classification accuracy.
inline ClassificationResult eval_classification(const std::vector<uint32_t>& det_clusters,
                                                const std::vector<uint32_t>& gt_units) {
    ClassificationResult res;
    if (det_clusters.empty()) {
        res.empty_tp = true;
        return res;
    }
    std::map<std::pair<uint32_t, uint32_t>, uint64_t> cells;
    for (size_t i = 0; i < det_clusters.size(); ++i)
        ++cells[{det_clusters[i], gt_units[i]}];

    struct Cell {
        uint32_t cluster, unit;
        uint64_t count;
    };
    std::vector<Cell> flat;
    flat.reserve(cells.size());
    for (const auto& [key, count] : cells) flat.push_back({key.first, key.second, count});
    std::sort(flat.begin(), flat.end(), [](const Cell& a, const Cell& b) {
        if (a.count != b.count) return a.count > b.count;
        if (a.cluster != b.cluster) return a.cluster < b.cluster;
        return a.unit < b.unit;
    });

    std::vector<uint32_t> used_clusters, used_units;
    uint64_t matched = 0;
    for (const Cell& c : flat) {
        if (std::find(used_clusters.begin(), used_clusters.end(), c.cluster) !=
            used_clusters.end())
            continue;
        if (std::find(used_units.begin(), used_units.end(), c.unit) != used_units.end()) continue;
        used_clusters.push_back(c.cluster);
        used_units.push_back(c.unit);
        matched += c.count;
    }
    res.accuracy = static_cast<double>(matched) / static_cast<double>(det_clusters.size());
    return res;
}

// Folds cluster-merge events into final identities: every spike's cluster id
// is followed through the merges it survived. Returns one final id per spike
// row, aligned with `detections_out` when given.
inline std::vector<uint32_t> resolve_merges(const std::vector<EventRecord>& records,
                                            std::vector<SpikeEvent>* detections_out = nullptr) {
    uint32_t max_id = 0;
    for (const auto& r : records)
        max_id = std::max(max_id, r.is_spike ? r.spike.cluster : r.merge.removed);
    std::vector<uint32_t> root(size_t{max_id} + 1);
    for (uint32_t i = 0; i <= max_id; ++i) root[i] = i;
    auto find = [&](uint32_t id) {
        while (root[id] != id) {
            root[id] = root[root[id]];
            id = root[id];
        }
        return id;
    };
    for (const auto& r : records)
        if (!r.is_spike) root[find(r.merge.removed)] = find(r.merge.kept);

    std::vector<uint32_t> finals;
    for (const auto& r : records) {
        if (!r.is_spike) continue;
        finals.push_back(find(r.spike.cluster));
        if (detections_out) detections_out->push_back(r.detail);
    }
    return finals;
}

}  // namespace lsort
