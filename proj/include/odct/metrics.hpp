#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace odct {

/// Fraction of positions where the two label snapshots differ.
/// Throws InputError on length mismatch or empty input.
double change_ratio(std::span<const int> before, std::span<const int> after);

/// Shannon entropy (natural log) of the normalized count vector;
/// 0 * ln 0 is taken as 0. Result lies in [0, ln(#bins with counts)].
double count_entropy(std::span<const std::int64_t> counts);

/// Entropy of one track's sample distribution over n_clusters clusters.
/// Throws InputError when no sample carries the given track id.
double track_entropy(std::span<const int> labels,
                     std::span<const std::int64_t> track_of,
                     std::int64_t track_id, int n_clusters);

/// Arithmetic mean of track_entropy over all distinct tracks.
double mean_track_entropy(std::span<const int> labels,
                          std::span<const std::int64_t> track_of, int n_clusters);

/// Per ground-truth class, entropy of that class's distribution over
/// clusters; returns the mean over classes. Evaluation only.
double intra_class_entropy(std::span<const int> labels,
                           std::span<const int> class_labels, int n_clusters);

}  // namespace odct
