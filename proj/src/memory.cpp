#include "odct/memory.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <string>

#include "odct/binary.hpp"
#include "odct/error.hpp"

namespace odct {

namespace {
constexpr double kDistanceFloor = 1e-12;
constexpr std::string_view kMemoryMagic = "ODCMEM01";
}  // namespace

TrackMemory::TrackMemory(std::vector<std::int64_t> track_of)
    : track_of_(std::move(track_of)) {
    for (std::size_t i = 0; i < track_of_.size(); ++i) {
        members_[track_of_[i]].push_back(static_cast<int>(i));
    }
    ids_.reserve(members_.size());
    for (const auto& [id, members] : members_) ids_.push_back(id);
}

std::span<const int> TrackMemory::members(std::int64_t track_id) const {
    auto it = members_.find(track_id);
    if (it == members_.end()) {
        throw InputError("TrackMemory: unknown track id " + std::to_string(track_id));
    }
    return it->second;
}

std::vector<double> weight_coeffs(std::span<const double> f, const Matrix& features,
                                  std::span<const int> member_indices) {
    assert(!member_indices.empty());
    std::vector<double> dist(member_indices.size());
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < member_indices.size(); ++j) {
        const double d = euclidean_distance(f, features.row(member_indices[j]));
        dist[j] = std::max(d, kDistanceFloor);
        nearest = std::min(nearest, dist[j]);
    }
    std::vector<double> coeffs(member_indices.size());
    for (std::size_t j = 0; j < coeffs.size(); ++j) coeffs[j] = nearest / dist[j];
    return coeffs;
}

namespace {

/// row <- renormalize(m * fresh + (1 - m) * history). Shared between the
/// track-weighted and the vanilla update so the singleton-track case is
/// bit-identical between the two.
void blend_row(std::span<double> row, std::span<const double> fresh,
               std::span<const double> history, double m) {
    for (std::size_t d = 0; d < row.size(); ++d) {
        row[d] = m * fresh[d] + (1.0 - m) * history[d];
    }
    if (!normalize(row)) {
        // Degenerate cancellation; fall back to the fresh feature.
        for (std::size_t d = 0; d < row.size(); ++d) row[d] = fresh[d];
    }
}

std::vector<double> normalized_or_throw(std::span<const double> f, const char* who) {
    std::vector<double> fhat(f.begin(), f.end());
    if (!normalize(fhat)) {
        throw InputError(std::string(who) + ": zero-norm input feature");
    }
    return fhat;
}

}  // namespace

void update_sample(SamplesMemory& memory, int i, std::span<const double> f,
                   const Matrix& snapshot, std::span<const int> member_indices,
                   double m) {
    assert(m > 0.0 && m <= 1.0);
    const std::vector<double> fhat = normalized_or_throw(f, "update_sample");
    auto row = memory.features.row(i);
    if (m == 1.0) {
        for (std::size_t d = 0; d < row.size(); ++d) row[d] = fhat[d];
        return;
    }
    const std::vector<double> coeffs = weight_coeffs(fhat, snapshot, member_indices);
    std::vector<double> weighted(memory.dim(), 0.0);
    double coeff_sum = 0.0;
    for (std::size_t j = 0; j < member_indices.size(); ++j) {
        const auto member = snapshot.row(member_indices[j]);
        for (std::size_t d = 0; d < weighted.size(); ++d) {
            weighted[d] += coeffs[j] * member[d];
        }
        coeff_sum += coeffs[j];
    }
    for (double& v : weighted) v /= coeff_sum;
    blend_row(row, fhat, weighted, m);
}

void vanilla_update_sample(SamplesMemory& memory, int i, std::span<const double> f,
                           double m) {
    assert(m > 0.0 && m <= 1.0);
    const std::vector<double> fhat = normalized_or_throw(f, "vanilla_update_sample");
    auto row = memory.features.row(i);
    if (m == 1.0) {
        for (std::size_t d = 0; d < row.size(); ++d) row[d] = fhat[d];
        return;
    }
    const std::vector<double> history(row.begin(), row.end());
    blend_row(row, fhat, history, m);
}

int assign_label(std::span<const double> row, const CentroidsMemory& centroids) {
    assert(centroids.count() > 0);
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int c = 0; c < centroids.count(); ++c) {
        const double d = squared_distance(row, centroids.centroids.row(c));
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

void save_memory_snapshot(const MemorySnapshot& snap, const std::filesystem::path& path) {
    const std::uint64_t n = snap.samples.size();
    const std::uint64_t d = snap.samples.dim();
    const std::uint64_t c = snap.centroids.centroids.rows();
    assert(snap.samples.pseudo_labels.size() == n);
    assert(snap.track_of.size() == n);

    BinWriter w(path);
    w.magic(kMemoryMagic);
    w.u64(n);
    w.u64(d);
    w.u64(c);
    w.f64_span(snap.samples.features.data());
    w.i32_span(snap.samples.pseudo_labels);
    w.i64_span(snap.track_of);
    w.f64_span(snap.centroids.centroids.data());
    w.finish();
}

MemorySnapshot load_memory_snapshot(const std::filesystem::path& path) {
    BinReader r(path);
    r.expect_magic(kMemoryMagic);
    const std::uint64_t n = r.u64();
    const std::uint64_t d = r.u64();
    const std::uint64_t c = r.u64();

    MemorySnapshot snap;
    snap.samples.features = Matrix(n, d);
    r.f64_span(snap.samples.features.data());
    snap.samples.pseudo_labels.resize(n);
    r.i32_span(snap.samples.pseudo_labels);
    snap.track_of.resize(n);
    r.i64_span(snap.track_of);
    snap.centroids.centroids = Matrix(c, d);
    r.f64_span(snap.centroids.centroids.data());
    return snap;
}

}  // namespace odct
