#include "odct/clustering.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "odct/error.hpp"
#include "odct/rng.hpp"

namespace odct {

ClusterPartition ClusterPartition::from_assignment(std::vector<int> assignment,
                                                   int n_clusters) {
    ClusterPartition p;
    p.sizes.assign(n_clusters, 0);
    for (int c : assignment) {
        assert(c >= 0 && c < n_clusters);
        ++p.sizes[c];
    }
    p.assignment = std::move(assignment);
    return p;
}

namespace {

/// k-means++ seeding: first centroid uniform, then proportional to the
/// squared distance to the nearest chosen centroid. Once every remaining
/// point coincides with a chosen centroid, the lowest-index unchosen point
/// is taken.
Matrix seed_centroids(const Matrix& points, int k, Rng& rng) {
    const std::size_t m = points.rows();
    Matrix centroids(k, points.cols());
    std::vector<bool> chosen(m, false);

    std::size_t first = rng.uniform_int(m);
    centroids.set_row(0, points.row(first));
    chosen[first] = true;

    std::vector<double> d2(m);
    for (std::size_t i = 0; i < m; ++i) {
        d2[i] = squared_distance(points.row(i), points.row(first));
    }

    for (int c = 1; c < k; ++c) {
        const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
        std::size_t pick;
        if (total > 0.0) {
            pick = rng.weighted_index(d2);
        } else {
            pick = 0;
            while (pick < m && chosen[pick]) ++pick;
            assert(pick < m);
        }
        centroids.set_row(c, points.row(pick));
        chosen[pick] = true;
        for (std::size_t i = 0; i < m; ++i) {
            d2[i] = std::min(d2[i], squared_distance(points.row(i), points.row(pick)));
        }
    }
    return centroids;
}

int nearest_centroid(std::span<const double> point, const Matrix& centroids) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.rows(); ++c) {
        const double d = squared_distance(point, centroids.row(c));
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, const KMeansConfig& cfg) {
    const std::size_t m = points.rows();
    if (static_cast<int>(m) < cfg.k) {
        throw InputError("kmeans: " + std::to_string(m) + " points for k=" +
                         std::to_string(cfg.k));
    }
    assert(cfg.k >= 1);

    Rng rng(Rng::mix(cfg.seed));
    KMeansResult res;
    res.centroids = seed_centroids(points, cfg.k, rng);
    res.assignment.assign(m, 0);
    std::vector<int> sizes(cfg.k, 0);

    double prev_inertia = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        std::fill(sizes.begin(), sizes.end(), 0);
        for (std::size_t i = 0; i < m; ++i) {
            res.assignment[i] = nearest_centroid(points.row(i), res.centroids);
            ++sizes[res.assignment[i]];
        }

        // Re-seed empty clusters from the farthest point whose cluster can
        // spare it. Moving a point onto its own centroid cannot raise
        // inertia.
        std::vector<bool> reseeded(m, false);
        for (int c = 0; c < cfg.k; ++c) {
            if (sizes[c] > 0) continue;
            std::ptrdiff_t far = -1;
            double far_d = -1.0;
            for (std::size_t i = 0; i < m; ++i) {
                if (reseeded[i] || sizes[res.assignment[i]] <= 1) continue;
                const double d =
                    squared_distance(points.row(i), res.centroids.row(res.assignment[i]));
                if (d > far_d) {
                    far_d = d;
                    far = static_cast<std::ptrdiff_t>(i);
                }
            }
            if (far < 0) break;  // all clusters are singletons already
            reseeded[far] = true;
            res.centroids.set_row(c, points.row(far));
            --sizes[res.assignment[far]];
            res.assignment[far] = c;
            ++sizes[c];
        }

        double inertia = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            inertia += squared_distance(points.row(i), res.centroids.row(res.assignment[i]));
        }
        res.inertia_history.push_back(inertia);
        res.inertia = inertia;

        const bool converged =
            std::isfinite(prev_inertia) &&
            std::abs(prev_inertia - inertia) < cfg.tol * std::max(prev_inertia, 1e-300);
        if (converged || inertia == 0.0) break;
        prev_inertia = inertia;

        for (int c = 0; c < cfg.k; ++c) {
            if (sizes[c] == 0) continue;
            auto row = res.centroids.row(c);
            std::fill(row.begin(), row.end(), 0.0);
        }
        for (std::size_t i = 0; i < m; ++i) {
            const auto point = points.row(i);
            auto row = res.centroids.row(res.assignment[i]);
            for (std::size_t d = 0; d < row.size(); ++d) row[d] += point[d];
        }
        for (int c = 0; c < cfg.k; ++c) {
            if (sizes[c] == 0) continue;
            auto row = res.centroids.row(c);
            for (double& v : row) v /= sizes[c];
        }
    }
    res.iterations = static_cast<int>(res.inertia_history.size());
    return res;
}

ConstrainedInitResult constrained_init(const Matrix& features, const TrackMemory& tracks,
                                       int k, std::uint64_t seed) {
    const std::vector<std::int64_t>& ids = tracks.ids();
    if (static_cast<int>(ids.size()) < k) {
        throw InputError("constrained_init: " + std::to_string(ids.size()) +
                         " tracks for k=" + std::to_string(k));
    }

    // Separate stream for the representative draws; kmeans sees `seed`
    // itself so singleton-track datasets reduce to plain kmeans exactly.
    Rng rep_rng(Rng::mix(seed ^ 0x9E3779B97F4A7C15ull));
    Matrix representatives(ids.size(), features.cols());
    std::vector<int> rep_index(ids.size());
    for (std::size_t t = 0; t < ids.size(); ++t) {
        const auto members = tracks.members(ids[t]);
        rep_index[t] = members[rep_rng.uniform_int(members.size())];
        representatives.set_row(t, features.row(rep_index[t]));
    }

    KMeansConfig cfg;
    cfg.k = k;
    cfg.seed = seed;
    const KMeansResult km = kmeans(representatives, cfg);

    ConstrainedInitResult out;
    out.centroids = km.centroids;
    out.assignment.assign(features.rows(), 0);
    for (std::size_t t = 0; t < ids.size(); ++t) {
        for (int sample : tracks.members(ids[t])) {
            out.assignment[sample] = km.assignment[t];
        }
    }
    return out;
}

Matrix recompute_centroids(const Matrix& features, const ClusterPartition& partition,
                           const Matrix& previous) {
    assert(partition.assignment.size() == features.rows());
    assert(previous.rows() == partition.sizes.size());
    Matrix centroids(previous.rows(), previous.cols());
    for (std::size_t i = 0; i < features.rows(); ++i) {
        const auto point = features.row(i);
        auto row = centroids.row(partition.assignment[i]);
        for (std::size_t d = 0; d < row.size(); ++d) row[d] += point[d];
    }
    for (int c = 0; c < partition.n_clusters(); ++c) {
        auto row = centroids.row(c);
        if (partition.sizes[c] == 0) {
            centroids.set_row(c, previous.row(c));
        } else {
            for (double& v : row) v /= partition.sizes[c];
        }
    }
    return centroids;
}

namespace {

std::vector<int> cluster_members(const ClusterPartition& partition, int cluster) {
    std::vector<int> members;
    for (std::size_t i = 0; i < partition.assignment.size(); ++i) {
        if (partition.assignment[i] == cluster) members.push_back(static_cast<int>(i));
    }
    return members;
}

void set_centroid_to_mean(const Matrix& features, const std::vector<int>& members,
                          Matrix& centroids, int cluster) {
    auto row = centroids.row(cluster);
    std::fill(row.begin(), row.end(), 0.0);
    for (int i : members) {
        const auto point = features.row(i);
        for (std::size_t d = 0; d < row.size(); ++d) row[d] += point[d];
    }
    for (double& v : row) v /= static_cast<double>(members.size());
}

}  // namespace

RebalanceReport rebalance_small_clusters(const Matrix& features, Matrix& centroids,
                                         ClusterPartition& partition, int threshold,
                                         std::uint64_t seed) {
    assert(threshold >= 1);
    const int n_clusters = partition.n_clusters();
    RebalanceReport report;

    for (int round = 0; round < n_clusters; ++round) {
        std::vector<int> small;
        std::vector<int> normal;
        for (int c = 0; c < n_clusters; ++c) {
            (partition.sizes[c] < threshold ? small : normal).push_back(c);
        }
        if (small.empty()) return report;
        report.iterations = round + 1;
        if (normal.empty()) break;  // nowhere to send samples

        // (a) Drain every small cluster into its members' nearest normal
        // centroid.
        for (int c : small) {
            for (int i : cluster_members(partition, c)) {
                int best = normal.front();
                double best_d = std::numeric_limits<double>::infinity();
                for (int cand : normal) {
                    const double d = squared_distance(features.row(i), centroids.row(cand));
                    if (d < best_d) {
                        best_d = d;
                        best = cand;
                    }
                }
                partition.move(i, best);
            }
        }

        // (b) Split the largest normal cluster to refill the lowest
        // emptied index.
        int c_max = normal.front();
        for (int cand : normal) {
            if (partition.sizes[cand] > partition.sizes[c_max]) c_max = cand;
        }
        if (partition.sizes[c_max] < 2) break;  // nothing left to split

        const std::vector<int> members = cluster_members(partition, c_max);
        Matrix sub(members.size(), features.cols());
        for (std::size_t j = 0; j < members.size(); ++j) {
            sub.set_row(j, features.row(members[j]));
        }
        KMeansConfig split_cfg;
        split_cfg.k = 2;
        split_cfg.seed = Rng::mix(seed + static_cast<std::uint64_t>(round));
        const KMeansResult split = kmeans(sub, split_cfg);

        std::vector<int> side[2];
        double index_sum[2] = {0.0, 0.0};
        for (std::size_t j = 0; j < members.size(); ++j) {
            side[split.assignment[j]].push_back(members[j]);
            index_sum[split.assignment[j]] += members[j];
        }
        int keep = 0;  // side that stays on c_max's index
        if (side[1].size() > side[0].size()) {
            keep = 1;
        } else if (side[1].size() == side[0].size() &&
                   index_sum[1] / side[1].size() < index_sum[0] / side[0].size()) {
            keep = 1;
        }

        const int target = small.front();
        for (int i : side[1 - keep]) partition.move(i, target);

        // (c) Refresh the two affected centroids.
        set_centroid_to_mean(features, side[keep], centroids, c_max);
        set_centroid_to_mean(features, side[1 - keep], centroids, target);
    }

    for (int c = 0; c < n_clusters; ++c) {
        if (partition.sizes[c] < threshold) report.remaining_small.push_back(c);
    }
    report.capped = !report.remaining_small.empty();
    return report;
}

}  // namespace odct
