#include "odct/metrics.hpp"

#include <cassert>
#include <cmath>
#include <map>
#include <string>

#include "odct/error.hpp"

namespace odct {

double change_ratio(std::span<const int> before, std::span<const int> after) {
    if (before.size() != after.size()) {
        throw InputError("change_ratio: snapshot sizes differ (" +
                         std::to_string(before.size()) + " vs " +
                         std::to_string(after.size()) + ")");
    }
    if (before.empty()) throw InputError("change_ratio: empty snapshots");
    std::size_t changed = 0;
    for (std::size_t i = 0; i < before.size(); ++i) {
        if (before[i] != after[i]) ++changed;
    }
    return static_cast<double>(changed) / static_cast<double>(before.size());
}

double count_entropy(std::span<const std::int64_t> counts) {
    std::int64_t total = 0;
    for (std::int64_t c : counts) {
        assert(c >= 0);
        total += c;
    }
    if (total == 0) return 0.0;
    double h = 0.0;
    for (std::int64_t c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log(p);
    }
    return std::max(0.0, h);  // -0.0 from a point mass
}

double track_entropy(std::span<const int> labels,
                     std::span<const std::int64_t> track_of,
                     std::int64_t track_id, int n_clusters) {
    assert(labels.size() == track_of.size());
    std::vector<std::int64_t> counts(n_clusters, 0);
    bool found = false;
    for (std::size_t i = 0; i < track_of.size(); ++i) {
        if (track_of[i] != track_id) continue;
        found = true;
        assert(labels[i] >= 0 && labels[i] < n_clusters);
        ++counts[labels[i]];
    }
    if (!found) {
        throw InputError("track_entropy: unknown track id " + std::to_string(track_id));
    }
    return count_entropy(counts);
}

double mean_track_entropy(std::span<const int> labels,
                          std::span<const std::int64_t> track_of, int n_clusters) {
    assert(labels.size() == track_of.size());
    std::map<std::int64_t, std::vector<std::int64_t>> counts_by_track;
    for (std::size_t i = 0; i < track_of.size(); ++i) {
        auto& counts = counts_by_track[track_of[i]];
        if (counts.empty()) counts.resize(n_clusters, 0);
        ++counts[labels[i]];
    }
    if (counts_by_track.empty()) throw InputError("mean_track_entropy: no tracks");
    double sum = 0.0;
    for (const auto& [id, counts] : counts_by_track) sum += count_entropy(counts);
    return sum / static_cast<double>(counts_by_track.size());
}

double intra_class_entropy(std::span<const int> labels,
                           std::span<const int> class_labels, int n_clusters) {
    assert(labels.size() == class_labels.size());
    std::map<int, std::vector<std::int64_t>> counts_by_class;
    for (std::size_t i = 0; i < class_labels.size(); ++i) {
        auto& counts = counts_by_class[class_labels[i]];
        if (counts.empty()) counts.resize(n_clusters, 0);
        ++counts[labels[i]];
    }
    if (counts_by_class.empty()) throw InputError("intra_class_entropy: no classes");
    double sum = 0.0;
    for (const auto& [cls, counts] : counts_by_class) sum += count_entropy(counts);
    return sum / static_cast<double>(counts_by_class.size());
}

}  // namespace odct
