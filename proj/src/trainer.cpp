#include "odct/trainer.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <string>

#include "odct/error.hpp"
#include "odct/metrics.hpp"
#include "odct/rng.hpp"

namespace odct {

namespace {

// Stream salts: each consumer of randomness mixes its own salt into the
// run seed, so adding or removing draws in one place never shifts another.
constexpr std::uint64_t kEmbedderSalt = 0xA24BAED4963EE407ull;
constexpr std::uint64_t kInitSalt = 0x9FB21C651E98DF25ull;
constexpr std::uint64_t kShuffleSalt = 0x3C79AC492BA7B653ull;
constexpr std::uint64_t kRebalanceSalt = 0x1C69B3F74AC4AE35ull;

void validate(const TrackedDataset& dataset, const TrainConfig& cfg) {
    if (cfg.n_clusters < 1) throw InputError("n_clusters must be positive");
    if (cfg.batch_size < 1) throw InputError("batch_size must be positive");
    if (cfg.epochs < 0) throw InputError("epochs must be non-negative");
    if (!(cfg.memory_momentum > 0.0) || cfg.memory_momentum > 1.0) {
        throw InputError("memory_momentum must lie in (0, 1]");
    }
    if (cfg.centroid_update_interval < 1) {
        throw InputError("centroid_update_interval must be positive");
    }
    if (cfg.small_cluster_threshold < 0) {
        throw InputError("small_cluster_threshold must be non-negative");
    }
    if (cfg.embedder.n_classes != cfg.n_clusters) {
        throw InputError("embedder head size (" + std::to_string(cfg.embedder.n_classes) +
                         ") must equal n_clusters (" + std::to_string(cfg.n_clusters) + ")");
    }
    if (dataset.samples.empty()) throw InputError("dataset is empty");
    if (dataset.d_in != cfg.embedder.d_in) {
        throw InputError("dataset dimension " + std::to_string(dataset.d_in) +
                         " does not match embedder d_in " + std::to_string(cfg.embedder.d_in));
    }
    if (static_cast<int>(dataset.size()) < cfg.n_clusters) {
        throw InputError("need at least n_clusters samples, got " +
                         std::to_string(dataset.size()));
    }
    for (const TrainSample& s : dataset.samples) {
        if (static_cast<int>(s.input.size()) != dataset.d_in) {
            throw InputError("sample " + std::to_string(s.id) + " has dimension " +
                             std::to_string(s.input.size()) + ", expected " +
                             std::to_string(dataset.d_in));
        }
    }
}

std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Runs validation before any member construction can observe the config.
const TrainConfig& checked(const TrackedDataset& dataset, const TrainConfig& cfg) {
    validate(dataset, cfg);
    return cfg;
}

}  // namespace

std::string_view variant_name(Variant v) {
    switch (v) {
        case Variant::odc: return "odc";
        case Variant::odc_track_init: return "odc_track_init";
        case Variant::odct: return "odct";
    }
    return "odct";
}

Variant parse_variant(std::string_view name) {
    if (name == "odc") return Variant::odc;
    if (name == "odc_track_init") return Variant::odc_track_init;
    if (name == "odct") return Variant::odct;
    throw InputError("unknown variant \"" + std::string(name) +
                     "\" (choices: odc, odc_track_init, odct)");
}

Trainer::Trainer(const TrackedDataset& dataset, const TrainConfig& cfg)
    : dataset_(dataset),
      cfg_(checked(dataset, cfg)),
      embedder_(cfg.embedder, Rng::mix(cfg.seed ^ kEmbedderSalt)) {
    const int n = static_cast<int>(dataset.size());

    std::vector<std::int64_t> track_of(dataset.size());
    for (int i = 0; i < n; ++i) track_of[static_cast<std::size_t>(i)] = dataset.samples[i].track_id;
    tracks_ = TrackMemory(std::move(track_of));

    samples_.features = Matrix(dataset.size(), static_cast<std::size_t>(cfg.embedder.d_feat));
    for (int i = 0; i < n; ++i) {
        ForwardResult fr = embedder_.forward(dataset.samples[static_cast<std::size_t>(i)].input);
        if (!normalize(fr.feature)) {
            throw InputError("sample " + std::to_string(dataset.samples[i].id) +
                             " yields a zero feature vector");
        }
        samples_.features.set_row(static_cast<std::size_t>(i), fr.feature);
    }

    const std::uint64_t init_seed = Rng::mix(cfg.seed ^ kInitSalt);
    std::vector<int> assignment;
    Matrix init_centroids;
    if (cfg.variant == Variant::odc) {
        KMeansConfig kc;
        kc.k = cfg.n_clusters;
        kc.seed = init_seed;
        KMeansResult r = kmeans(samples_.features, kc);
        assignment = std::move(r.assignment);
        init_centroids = std::move(r.centroids);
    } else {
        ConstrainedInitResult r =
            constrained_init(samples_.features, tracks_, cfg.n_clusters, init_seed);
        assignment = std::move(r.assignment);
        init_centroids = std::move(r.centroids);
    }
    partition_ = ClusterPartition::from_assignment(assignment, cfg.n_clusters);
    samples_.pseudo_labels = std::move(assignment);
    centroids_.centroids = recompute_centroids(samples_.features, partition_, init_centroids);
}

EpochTrace Trainer::train_epoch() {
    const int n = static_cast<int>(dataset_.size());
    const std::vector<int> labels_start = samples_.pseudo_labels;

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(Rng::mix(cfg_.seed ^ kShuffleSalt ^ static_cast<std::uint64_t>(epoch_)));
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    std::vector<LabeledInput> batch;
    for (int start = 0; start < n; start += cfg_.batch_size) {
        const int end = std::min(n, start + cfg_.batch_size);
        batch.clear();
        for (int b = start; b < end; ++b) {
            const std::size_t idx = static_cast<std::size_t>(order[b]);
            batch.push_back({dataset_.samples[idx].input, samples_.pseudo_labels[idx]});
        }
        const double loss = embedder_.backward_step(batch);
        loss_sum += loss * static_cast<double>(end - start);

        // Member rows in the weighted update read the pre-batch state.
        const Matrix snapshot = samples_.features;
        int changed = 0;
        for (int b = start; b < end; ++b) {
            const int idx = order[b];
            ForwardResult fr = embedder_.forward(dataset_.samples[idx].input);
            if (cfg_.variant == Variant::odct) {
                update_sample(samples_, idx, fr.feature, snapshot,
                              tracks_.members(tracks_.track_of(idx)), cfg_.memory_momentum);
            } else {
                vanilla_update_sample(samples_, idx, fr.feature, cfg_.memory_momentum);
            }
            const int label = assign_label(samples_.features.row(idx), centroids_);
            if (label != samples_.pseudo_labels[idx]) {
                partition_.move(idx, label);
                samples_.pseudo_labels[idx] = label;
                ++changed;
            }
        }

        ++global_iter_;
        bool updated = false;
        if (global_iter_ % cfg_.centroid_update_interval == 0) {
            centroids_.centroids =
                recompute_centroids(samples_.features, partition_, centroids_.centroids);
            rebalance_small_clusters(
                samples_.features, centroids_.centroids, partition_,
                cfg_.small_cluster_threshold,
                Rng::mix(cfg_.seed ^ kRebalanceSalt ^ static_cast<std::uint64_t>(global_iter_)));
            // Rebalance edits the partition only; mirror it into the labels.
            samples_.pseudo_labels = partition_.assignment;
            updated = true;
        }
        iter_traces_.push_back({global_iter_, epoch_, loss, changed, updated});
    }

    EpochTrace t;
    t.epoch = epoch_;
    t.loss = loss_sum / static_cast<double>(n);
    t.change_ratio = change_ratio(labels_start, samples_.pseudo_labels);
    t.mean_track_entropy =
        mean_track_entropy(samples_.pseudo_labels, tracks_.track_of(), cfg_.n_clusters);
    const auto [lo, hi] = std::minmax_element(partition_.sizes.begin(), partition_.sizes.end());
    t.min_cluster_size = *lo;
    t.max_cluster_size = *hi;
    ++epoch_;
    return t;
}

MemorySnapshot Trainer::snapshot() const {
    MemorySnapshot snap;
    snap.samples = samples_;
    snap.centroids = centroids_;
    snap.track_of.assign(tracks_.track_of().begin(), tracks_.track_of().end());
    return snap;
}

TrainResult run_training(const TrackedDataset& dataset, const TrainConfig& cfg,
                         const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    Trainer trainer(dataset, cfg);
    TrainResult result;
    result.epochs.reserve(static_cast<std::size_t>(cfg.epochs));
    for (int e = 0; e < cfg.epochs; ++e) result.epochs.push_back(trainer.train_epoch());
    result.iters = trainer.iter_traces();

    write_epoch_csv(result.epochs, out_dir / "trace.csv");
    write_iter_csv(result.iters, out_dir / "iters.csv");
    save_memory_snapshot(trainer.snapshot(), out_dir / "memory.bin");
    trainer.embedder().save(out_dir / "embedder.bin");
    return result;
}

void write_epoch_csv(const std::vector<EpochTrace>& rows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InputError("cannot open for writing: " + path.string());
    out << "epoch,loss,change_ratio,mean_track_entropy,min_cluster_size,max_cluster_size\n";
    for (const EpochTrace& r : rows) {
        out << r.epoch << ',' << fmt_g17(r.loss) << ',' << fmt_g17(r.change_ratio) << ','
            << fmt_g17(r.mean_track_entropy) << ',' << r.min_cluster_size << ','
            << r.max_cluster_size << '\n';
    }
    if (!out.flush()) throw InputError("write failed: " + path.string());
}

void write_iter_csv(const std::vector<IterTrace>& rows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InputError("cannot open for writing: " + path.string());
    out << "iteration,epoch,loss,labels_changed,centroids_updated\n";
    for (const IterTrace& r : rows) {
        out << r.iteration << ',' << r.epoch << ',' << fmt_g17(r.loss) << ','
            << r.labels_changed << ',' << (r.centroids_updated ? 1 : 0) << '\n';
    }
    if (!out.flush()) throw InputError("write failed: " + path.string());
}

}  // namespace odct
