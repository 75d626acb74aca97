#pragma once

#include <cstdint>
#include <vector>

#include "odct/geometry.hpp"

namespace odct {

struct TrackerConfig {
    double iou_threshold = 0.35;      // minimum IoU to extend a track
    int ttl = 3;                      // max consecutive unmatched frames
    double min_box_area = 10000.0;    // square pixels
    int min_len = 40;                 // length filter, inclusive
    int max_len = 100;
    int top_k_tracks = 15;            // per snippet, after score ranking
    int samples_per_track = 10;       // equally spaced subsampling
    int max_proposals_per_frame = 300;
    double nms_overlap = 0.5;
};

/// Ordered sequence of boxes sharing one object identity. Frame indices
/// are strictly increasing with gaps of at most ttl + 1; score is the mean
/// objectness of the boxes.
struct Track {
    std::int64_t id = 0;
    std::vector<BoundingBox> boxes;
    double score = 0.0;

    int length() const { return static_cast<int>(boxes.size()); }
};

/// Per-frame proposal preparation: keeps the max_proposals_per_frame
/// highest-objectness boxes, drops boxes under the area floor, then runs
/// NMS. Produces the form associate() expects.
std::vector<std::vector<BoundingBox>> prepare_frames(
    std::vector<std::vector<BoundingBox>> frames, const TrackerConfig& cfg);

/// Greedy IoU association across one snippet.
///
/// frames[i] holds the proposals of the i-th frame of the snippet (dense:
/// empty vectors stand for frames without proposals). Active tracks are
/// matched in descending score order (ties: lower track id); each track
/// takes the unmatched proposal with the highest IoU to its flow-shifted
/// reference box when that IoU exceeds cfg.iou_threshold. A proposal joins
/// at most one track; leftovers open new tracks. A track whose miss
/// counter exceeds cfg.ttl is closed; during a gap the reference box keeps
/// accumulating per-frame flow. Returned tracks are ordered by id
/// (creation order) with score set to the mean objectness.
std::vector<Track> associate(const std::vector<std::vector<BoundingBox>>& frames,
                             const std::vector<FlowOffset>& flows,
                             const TrackerConfig& cfg);

/// Keeps tracks with min_len <= length <= max_len, sorts survivors by
/// descending score (ties: lower id) and returns at most top_k_tracks.
std::vector<Track> filter_tracks(std::vector<Track> tracks, const TrackerConfig& cfg);

/// Picks min(n, length) boxes equally spaced in time: indices
/// round(i * (length - 1) / (n - 1)), deduplicated, order preserved.
std::vector<BoundingBox> subsample_track(const Track& t, int n);

}  // namespace odct
