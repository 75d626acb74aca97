#pragma once

#include <cstdint>
#include <vector>

#include "odct/dataset.hpp"
#include "odct/geometry.hpp"

namespace odct {

/// Generator spec for track-structured feature datasets. Class means sit
/// on a sphere of radius class_separation; each track is a random walk of
/// step magnitude intra_track_drift around its class mean (the stand-in
/// for viewpoint change), with additive per-sample noise.
struct SynthSpec {
    int n_classes = 10;
    int tracks_per_class = 5;
    int samples_per_track = 10;
    int d_in = 32;
    double intra_track_drift = 0.15;
    double class_separation = 3.0;
    double noise_sigma = 0.3;
    std::uint64_t seed = 0;
};

TrackedDataset gen_tracked_features(const SynthSpec& spec);

/// One scripted object in a planted scene: a box moving at constant
/// velocity, emitting a high-objectness proposal except on dropout frames.
struct PlantedObject {
    double x = 0.0, y = 0.0, w = 0.0, h = 0.0;  // box at frame 0
    double vx = 0.0, vy = 0.0;                  // per-frame displacement
    double objectness = 0.9;
    std::vector<int> dropout_frames;            // frames with no proposal
};

struct PlantedScene {
    int n_frames = 0;
    std::vector<PlantedObject> objects;
    int distractors_per_frame = 0;
    double objectness_noise = 0.0;  // uniform jitter on planted objectness
    double frame_w = 1920.0;
    double frame_h = 1080.0;
    std::uint64_t seed = 0;
};

/// Per-frame proposals with parallel ground-truth track ids (-1 for
/// distractors). frames[i] holds frame i; planted proposals come first in
/// object order, then distractors.
struct ProposalStream {
    std::vector<std::vector<BoundingBox>> frames;
    std::vector<std::vector<std::int64_t>> gt_track_ids;
    std::vector<FlowOffset> flows;  // empty: scenes are camera-static
};

ProposalStream gen_proposal_stream(const PlantedScene& scene);

}  // namespace odct
