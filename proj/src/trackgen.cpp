#include "odct/trackgen.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <map>

namespace odct {

std::vector<std::vector<BoundingBox>> prepare_frames(
    std::vector<std::vector<BoundingBox>> frames, const TrackerConfig& cfg) {
    for (auto& frame : frames) {
        std::stable_sort(frame.begin(), frame.end(),
                         [](const BoundingBox& a, const BoundingBox& b) {
                             return a.objectness > b.objectness;
                         });
        if (static_cast<int>(frame.size()) > cfg.max_proposals_per_frame) {
            frame.resize(cfg.max_proposals_per_frame);
        }
        std::erase_if(frame, [&](const BoundingBox& b) { return b.area() < cfg.min_box_area; });
        frame = nms(std::move(frame), cfg.nms_overlap);
    }
    return frames;
}

namespace {

struct ActiveTrack {
    Track track;
    BoundingBox ref;       // last matched box, flow-shifted during gaps
    double objectness_sum = 0.0;
    int misses = 0;

    double score() const { return objectness_sum / track.boxes.size(); }
};

void open_track(std::vector<ActiveTrack>& active, const BoundingBox& box,
                std::int64_t& next_id) {
    ActiveTrack t;
    t.track.id = next_id++;
    t.track.boxes.push_back(box);
    t.ref = box;
    t.objectness_sum = box.objectness;
    active.push_back(std::move(t));
}

}  // namespace

std::vector<Track> associate(const std::vector<std::vector<BoundingBox>>& frames,
                             const std::vector<FlowOffset>& flows,
                             const TrackerConfig& cfg) {
    // Positions map to frame indices via the first box seen; empty frames
    // stand for proposal-less timeline slots.
    int frame_base = 0;
    bool base_known = false;
    for (std::size_t p = 0; p < frames.size() && !base_known; ++p) {
        if (!frames[p].empty()) {
            frame_base = frames[p][0].frame_index - static_cast<int>(p);
            base_known = true;
        }
    }
    if (!base_known) return {};

    std::map<int, FlowOffset> flow_of;
    for (const FlowOffset& f : flows) flow_of[f.frame_index] = f;

    std::vector<ActiveTrack> active;
    std::vector<Track> closed;
    std::int64_t next_id = 0;

    for (const BoundingBox& box : frames[0]) open_track(active, box, next_id);

    for (std::size_t p = 1; p < frames.size(); ++p) {
        // Register the previous frame onto this one; missing flow is (0,0).
        const int prev_frame = frame_base + static_cast<int>(p) - 1;
        if (auto it = flow_of.find(prev_frame); it != flow_of.end()) {
            for (ActiveTrack& t : active) {
                t.ref.x += it->second.dx;
                t.ref.y += it->second.dy;
            }
        }

        const std::vector<BoundingBox>& proposals = frames[p];
        std::vector<bool> taken(proposals.size(), false);

        std::vector<std::size_t> order(active.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double sa = active[a].score();
            const double sb = active[b].score();
            if (sa != sb) return sa > sb;
            return active[a].track.id < active[b].track.id;
        });

        for (std::size_t idx : order) {
            ActiveTrack& t = active[idx];
            double best_iou = cfg.iou_threshold;  // strict > required to match
            std::ptrdiff_t best = -1;
            for (std::size_t j = 0; j < proposals.size(); ++j) {
                if (taken[j]) continue;
                const double v = iou(t.ref, proposals[j]);
                if (v > best_iou) {
                    best_iou = v;
                    best = static_cast<std::ptrdiff_t>(j);
                }
            }
            if (best >= 0) {
                taken[best] = true;
                t.track.boxes.push_back(proposals[best]);
                t.ref = proposals[best];
                t.objectness_sum += proposals[best].objectness;
                t.misses = 0;
            } else {
                ++t.misses;
            }
        }

        for (auto it = active.begin(); it != active.end();) {
            if (it->misses > cfg.ttl) {
                closed.push_back(std::move(it->track));
                it = active.erase(it);
            } else {
                ++it;
            }
        }

        for (std::size_t j = 0; j < proposals.size(); ++j) {
            if (!taken[j]) open_track(active, proposals[j], next_id);
        }
    }

    for (ActiveTrack& t : active) closed.push_back(std::move(t.track));

    std::sort(closed.begin(), closed.end(),
              [](const Track& a, const Track& b) { return a.id < b.id; });
    for (Track& t : closed) {
        double sum = 0.0;
        for (const BoundingBox& b : t.boxes) sum += b.objectness;
        t.score = sum / t.boxes.size();
    }
    return closed;
}

std::vector<Track> filter_tracks(std::vector<Track> tracks, const TrackerConfig& cfg) {
    std::erase_if(tracks, [&](const Track& t) {
        return t.length() < cfg.min_len || t.length() > cfg.max_len;
    });
    std::sort(tracks.begin(), tracks.end(), [](const Track& a, const Track& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
    if (static_cast<int>(tracks.size()) > cfg.top_k_tracks) {
        tracks.resize(cfg.top_k_tracks);
    }
    return tracks;
}

std::vector<BoundingBox> subsample_track(const Track& t, int n) {
    assert(!t.boxes.empty() && n >= 1);
    const int len = t.length();
    if (n == 1 || len == 1) return {t.boxes.front()};
    std::vector<BoundingBox> out;
    out.reserve(std::min(n, len));
    long prev = -1;
    for (int i = 0; i < n; ++i) {
        const long idx =
            std::lround(static_cast<double>(i) * (len - 1) / (n - 1));
        if (idx != prev) {
            out.push_back(t.boxes[static_cast<std::size_t>(idx)]);
            prev = idx;
        }
    }
    return out;
}

}  // namespace odct
