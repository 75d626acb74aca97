#pragma once

#include <cstdint>
#include <vector>

#include "odct/matrix.hpp"
#include "odct/memory.hpp"

namespace odct {

/// Cluster assignment plus maintained per-cluster sizes
/// (sizes[c] == count of samples assigned to c, totalling N).
struct ClusterPartition {
    std::vector<int> assignment;
    std::vector<int> sizes;

    static ClusterPartition from_assignment(std::vector<int> assignment, int n_clusters);

    int n_clusters() const { return static_cast<int>(sizes.size()); }

    void move(int sample, int to) {
        --sizes[assignment[sample]];
        ++sizes[to];
        assignment[sample] = to;
    }
};

struct KMeansConfig {
    int k = 1;
    int max_iters = 100;
    double tol = 1e-4;  // relative inertia change
    std::uint64_t seed = 0;
};

struct KMeansResult {
    Matrix centroids;
    std::vector<int> assignment;
    double inertia = 0.0;
    std::vector<double> inertia_history;  // one entry per Lloyd iteration
    int iterations = 0;
};

/// Lloyd's iterations from k-means++ seeding, deterministic given the
/// seed. Inertia is non-increasing across iterations; clusters emptied by
/// an assignment step are re-seeded from the point farthest from its
/// centroid. Stops at max_iters or when the relative inertia change drops
/// below tol. Throws InputError when there are fewer points than k.
KMeansResult kmeans(const Matrix& points, const KMeansConfig& cfg);

struct ConstrainedInitResult {
    Matrix centroids;
    std::vector<int> assignment;
};

/// Track-constrained initialization: draws one representative per track
/// uniformly at random (tracks visited in ascending id order with a
/// dedicated stream, so the k-means stream matches a plain kmeans() call
/// on the same points), clusters the representatives, then propagates each
/// representative's cluster to its whole track. Intra-track label entropy
/// of the result is exactly zero. Throws InputError when there are fewer
/// tracks than k.
ConstrainedInitResult constrained_init(const Matrix& features, const TrackMemory& tracks,
                                       int k, std::uint64_t seed);

/// Mean of each cluster's member rows; clusters with no members keep their
/// previous centroid.
Matrix recompute_centroids(const Matrix& features, const ClusterPartition& partition,
                           const Matrix& previous);

struct RebalanceReport {
    int iterations = 0;
    bool capped = false;             // loop cap fired with small clusters left
    std::vector<int> remaining_small;

    bool clean() const { return !capped; }
};

/// Small-cluster elimination: while any cluster is smaller than threshold
/// (iteration cap: one pass per cluster), its samples are reassigned to
/// the nearest centroid among the non-small clusters, and the largest
/// non-small cluster is split in two with k-means to refill the lowest
/// emptied index. The larger half keeps the split cluster's index (tie:
/// the half with the lower mean sample index). Sample count is conserved;
/// leftover small clusters after the cap are reported, not fixed.
RebalanceReport rebalance_small_clusters(const Matrix& features, Matrix& centroids,
                                         ClusterPartition& partition, int threshold,
                                         std::uint64_t seed);

}  // namespace odct
