#pragma once

#include <cstdint>
#include <vector>

namespace odct {

/// One crop-level training example. The input vector is the desk-scale
/// stand-in for an image crop; features come out of the embedder.
struct TrainSample {
    std::int64_t id = 0;
    std::int64_t track_id = 0;
    std::vector<double> input;
};

/// Samples plus, when available, hidden per-sample class labels used only
/// for evaluation. Sample ids form the contiguous range [0, N).
struct TrackedDataset {
    std::vector<TrainSample> samples;
    std::vector<int> class_labels;  // empty or parallel to samples
    int d_in = 0;

    std::size_t size() const { return samples.size(); }
    bool has_class_labels() const { return class_labels.size() == samples.size(); }
};

}  // namespace odct
