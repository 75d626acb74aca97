#include "odct/synth.hpp"

#include <algorithm>
#include <cmath>

#include "odct/error.hpp"
#include "odct/matrix.hpp"
#include "odct/rng.hpp"

namespace odct {

TrackedDataset gen_tracked_features(const SynthSpec& spec) {
    if (spec.n_classes < 1 || spec.tracks_per_class < 1 || spec.samples_per_track < 1 ||
        spec.d_in < 1) {
        throw InputError("gen_tracked_features: all counts must be >= 1");
    }
    if (spec.class_separation <= 0.0) {
        throw InputError("gen_tracked_features: class_separation must be > 0");
    }

    Rng rng(Rng::mix(spec.seed));
    TrackedDataset data;
    data.d_in = spec.d_in;

    std::vector<double> direction(spec.d_in);
    std::vector<double> step(spec.d_in);
    std::int64_t sample_id = 0;
    std::int64_t track_id = 0;

    for (int c = 0; c < spec.n_classes; ++c) {
        std::vector<double> mean(spec.d_in);
        rng.fill_normal(direction);
        while (!normalize(direction)) rng.fill_normal(direction);
        for (int d = 0; d < spec.d_in; ++d) mean[d] = direction[d] * spec.class_separation;

        for (int t = 0; t < spec.tracks_per_class; ++t) {
            std::vector<double> pos = mean;
            for (int s = 0; s < spec.samples_per_track; ++s) {
                if (s > 0) {
                    rng.fill_normal(step, spec.intra_track_drift);
                    for (int d = 0; d < spec.d_in; ++d) pos[d] += step[d];
                }
                TrainSample sample;
                sample.id = sample_id++;
                sample.track_id = track_id;
                sample.input.resize(spec.d_in);
                rng.fill_normal(step, spec.noise_sigma);
                for (int d = 0; d < spec.d_in; ++d) sample.input[d] = pos[d] + step[d];
                data.samples.push_back(std::move(sample));
                data.class_labels.push_back(c);
            }
            ++track_id;
        }
    }
    return data;
}

ProposalStream gen_proposal_stream(const PlantedScene& scene) {
    if (scene.n_frames < 1) throw InputError("gen_proposal_stream: n_frames must be >= 1");
    for (const PlantedObject& obj : scene.objects) {
        if (obj.w <= 0.0 || obj.h <= 0.0) {
            throw InputError("gen_proposal_stream: planted boxes need positive extent");
        }
        if (obj.objectness < 0.0 || obj.objectness > 1.0) {
            throw InputError("gen_proposal_stream: planted objectness outside [0, 1]");
        }
    }

    Rng rng(Rng::mix(scene.seed));
    ProposalStream out;
    out.frames.resize(scene.n_frames);
    out.gt_track_ids.resize(scene.n_frames);

    for (int f = 0; f < scene.n_frames; ++f) {
        for (std::size_t k = 0; k < scene.objects.size(); ++k) {
            const PlantedObject& obj = scene.objects[k];
            const auto& drop = obj.dropout_frames;
            if (std::find(drop.begin(), drop.end(), f) != drop.end()) continue;

            BoundingBox box;
            box.frame_index = f;
            box.x = obj.x + f * obj.vx;
            box.y = obj.y + f * obj.vy;
            box.w = obj.w;
            box.h = obj.h;
            const double jitter = (2.0 * rng.uniform() - 1.0) * scene.objectness_noise;
            box.objectness = std::clamp(obj.objectness + jitter, 0.0, 1.0);
            out.frames[f].push_back(box);
            out.gt_track_ids[f].push_back(static_cast<std::int64_t>(k));
        }
        for (int d = 0; d < scene.distractors_per_frame; ++d) {
            BoundingBox box;
            box.frame_index = f;
            box.w = 20.0 + rng.uniform() * 80.0;
            box.h = 20.0 + rng.uniform() * 80.0;
            box.x = rng.uniform() * std::max(1.0, scene.frame_w - box.w);
            box.y = rng.uniform() * std::max(1.0, scene.frame_h - box.h);
            box.objectness = 0.05 + rng.uniform() * 0.4;  // below planted scores
            out.frames[f].push_back(box);
            out.gt_track_ids[f].push_back(-1);
        }
    }
    return out;
}

}  // namespace odct
