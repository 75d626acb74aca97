#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "odct/matrix.hpp"

namespace odct {

/// Per-sample feature rows (unit L2 norm) and pseudo-labels.
struct SamplesMemory {
    Matrix features;                  // N x D
    std::vector<int> pseudo_labels;   // values in [0, C)

    std::size_t size() const { return features.rows(); }
    std::size_t dim() const { return features.cols(); }
};

/// The C cluster centroids defining pseudo-labels.
struct CentroidsMemory {
    Matrix centroids;  // C x D

    int count() const { return static_cast<int>(centroids.rows()); }
    std::size_t dim() const { return centroids.cols(); }
};

/// Total map sample index -> track id, with a per-track member index.
class TrackMemory {
public:
    TrackMemory() = default;
    explicit TrackMemory(std::vector<std::int64_t> track_of);

    std::span<const std::int64_t> track_of() const { return track_of_; }
    std::int64_t track_of(std::size_t sample) const { return track_of_[sample]; }

    /// Sample indices sharing the given track, ascending.
    std::span<const int> members(std::int64_t track_id) const;

    /// Distinct track ids, ascending.
    const std::vector<std::int64_t>& ids() const { return ids_; }

    std::size_t size() const { return track_of_.size(); }

private:
    std::vector<std::int64_t> track_of_;
    std::map<std::int64_t, std::vector<int>> members_;
    std::vector<std::int64_t> ids_;
};

/// Weight coefficients d_j for the samples-memory update: with d the
/// Euclidean distance from f to each member's memory row and x' the
/// closest member, d_j = d(f, x') / d(f, x_j). Every d_j is in (0, 1] and
/// the nearest member gets exactly 1. Distances below 1e-12 are clamped,
/// so members coincident with f get 1 as well. f must be unit norm.
std::vector<double> weight_coeffs(std::span<const double> f, const Matrix& features,
                                  std::span<const int> member_indices);

/// Weighted momentum update of row i:
///   row <- m * f/||f|| + (1 - m) * sum_j d_j F(x_j) / sum_j d_j
/// re-normalized to unit length before storage. Member rows are read from
/// `snapshot` (the pre-batch state), the result is written to memory row i.
/// m = 1 short-circuits to the normalized input exactly. Throws InputError
/// on a zero-norm input feature.
void update_sample(SamplesMemory& memory, int i, std::span<const double> f,
                   const Matrix& snapshot, std::span<const int> member_indices,
                   double m);

/// Track-free momentum update: row <- normalize(m * f/||f|| + (1-m) * row).
/// Equals update_sample when the track contains only sample i.
void vanilla_update_sample(SamplesMemory& memory, int i, std::span<const double> f,
                           double m);

/// Nearest centroid by squared L2 distance; ties go to the lowest index.
int assign_label(std::span<const double> row, const CentroidsMemory& centroids);

/// The full memory bundle one training run maintains.
struct MemorySnapshot {
    SamplesMemory samples;
    CentroidsMemory centroids;
    std::vector<std::int64_t> track_of;
};

/// Versioned binary dump, byte-stable: save -> load -> save reproduces the
/// file exactly.
void save_memory_snapshot(const MemorySnapshot& snap, const std::filesystem::path& path);
MemorySnapshot load_memory_snapshot(const std::filesystem::path& path);

}  // namespace odct
