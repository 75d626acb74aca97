#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "odct/clustering.hpp"
#include "odct/dataset.hpp"
#include "odct/embedder.hpp"
#include "odct/memory.hpp"

namespace odct {

/// Which pieces of track structure the run uses.
///   odc            plain k-means init, per-sample memory updates
///   odc_track_init track-constrained init, per-sample memory updates
///   odct           track-constrained init, track-weighted memory updates
enum class Variant { odc, odc_track_init, odct };

std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view name);  // throws InputError, lists choices

struct TrainConfig {
    Variant variant = Variant::odct;
    int n_clusters = 30;
    int batch_size = 8;
    int epochs = 30;
    double memory_momentum = 0.5;
    int centroid_update_interval = 10;  // in iterations (batches)
    int small_cluster_threshold = 14;
    std::uint64_t seed = 0;
    EmbedderConfig embedder;
};

struct EpochTrace {
    int epoch = 0;
    double loss = 0.0;          // mean over samples
    double change_ratio = 0.0;  // labels vs epoch start
    double mean_track_entropy = 0.0;
    int min_cluster_size = 0;
    int max_cluster_size = 0;
};

struct IterTrace {
    int iteration = 0;  // global, across epochs
    int epoch = 0;
    double loss = 0.0;
    int labels_changed = 0;
    bool centroids_updated = false;
};

/// Online deep clustering over a tracked dataset. Owns the embedder, the
/// samples/centroids memories and the cluster partition. The update loop
/// per batch: backward step against current pseudo-labels, re-extract
/// features, momentum-update the samples memory (track-weighted for odct),
/// reassign each touched sample to its nearest centroid. Every
/// centroid_update_interval batches the centroids are recomputed and
/// small clusters rebalanced.
///
/// Determinism: every random stream (embedder init, dropout, clustering
/// init, epoch shuffles, rebalance splits) derives from cfg.seed with a
/// distinct salt, so no consumer can perturb another. With all-singleton
/// tracks odct degenerates to odc exactly, trace for trace.
class Trainer {
public:
    /// Validates the config, extracts initial features and clusters them.
    /// Throws InputError on dimension mismatch, fewer samples than
    /// clusters, or (for the track-init variants) fewer tracks than
    /// clusters.
    Trainer(const TrackedDataset& dataset, const TrainConfig& cfg);

    /// Runs one full pass over the dataset and returns its trace. Appends
    /// per-batch rows to iter_traces().
    EpochTrace train_epoch();

    const TrainConfig& config() const { return cfg_; }
    const Embedder& embedder() const { return embedder_; }
    const SamplesMemory& samples() const { return samples_; }
    const CentroidsMemory& centroids() const { return centroids_; }
    const TrackMemory& tracks() const { return tracks_; }
    const ClusterPartition& partition() const { return partition_; }
    const std::vector<IterTrace>& iter_traces() const { return iter_traces_; }
    int epochs_run() const { return epoch_; }

    MemorySnapshot snapshot() const;

private:
    const TrackedDataset& dataset_;
    TrainConfig cfg_;
    Embedder embedder_;
    SamplesMemory samples_;
    CentroidsMemory centroids_;
    TrackMemory tracks_;
    ClusterPartition partition_;
    std::vector<IterTrace> iter_traces_;
    int epoch_ = 0;
    int global_iter_ = 0;
};

struct TrainResult {
    std::vector<EpochTrace> epochs;
    std::vector<IterTrace> iters;
};

/// Full training run: cfg.epochs passes, then memory.bin and embedder.bin
/// plus trace.csv and iters.csv under out_dir (created if needed). With
/// epochs = 0 the initial state is persisted and the traces are empty.
TrainResult run_training(const TrackedDataset& dataset, const TrainConfig& cfg,
                         const std::filesystem::path& out_dir);

void write_epoch_csv(const std::vector<EpochTrace>& rows, const std::filesystem::path& path);
void write_iter_csv(const std::vector<IterTrace>& rows, const std::filesystem::path& path);

}  // namespace odct
