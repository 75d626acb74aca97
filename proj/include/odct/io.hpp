#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "odct/dataset.hpp"
#include "odct/geometry.hpp"
#include "odct/synth.hpp"
#include "odct/trackgen.hpp"

namespace odct {

/// One snippet's dense proposal timeline: frames[i] holds the boxes of
/// frame lowest_index + i (possibly none), plus the snippet's flow field.
struct Snippet {
    std::int64_t snippet_id = 0;
    std::vector<std::vector<BoundingBox>> frames;
    std::vector<FlowOffset> flows;
};

/// A generated track tagged with the snippet it came from.
struct SnippetTrack {
    std::int64_t snippet_id = 0;
    Track track;
};

// JSON Lines readers. One object per line; errors carry file and line
// number. Unknown keys are rejected so typos fail loudly.

/// {snippet_id, frame_index, x, y, w, h, objectness} grouped into dense
/// per-snippet timelines, snippets ordered by id. Boxes must satisfy
/// valid_box. A "gt_track_id" key is tolerated and ignored.
std::vector<Snippet> load_proposals(const std::filesystem::path& path);

/// {snippet_id, frame_index, dx, dy} grouped by snippet. Frames without a
/// line get zero flow downstream.
std::map<std::int64_t, std::vector<FlowOffset>> load_flows(const std::filesystem::path& path);

/// {track_id, snippet_id, score, boxes: [{frame_index, x, y, w, h,
/// objectness}, ...]}
std::vector<SnippetTrack> load_tracks(const std::filesystem::path& path);

/// {id, track_id, input: [...]} with ids exactly covering [0, N), all
/// inputs the same dimension, track ids non-negative. Lines may appear in
/// any order; samples come back sorted by id.
TrackedDataset load_dataset(const std::filesystem::path& path);

/// {id, class_label} sidecar; ids must exactly cover [0, n_samples).
/// Returns labels indexed by sample id.
std::vector<int> load_class_labels(const std::filesystem::path& path,
                                   std::size_t n_samples);

// Writers, symmetric with the readers.

void save_proposals(const std::vector<Snippet>& snippets, const std::filesystem::path& path);

/// Proposal writer for a generated scene; planted boxes carry their
/// ground-truth track id as "gt_track_id", distractors omit it.
void save_proposal_stream(std::int64_t snippet_id, const ProposalStream& stream,
                          const std::filesystem::path& path);

void save_flows(std::int64_t snippet_id, std::span<const FlowOffset> flows,
                const std::filesystem::path& path);

void save_tracks(std::span<const SnippetTrack> tracks, const std::filesystem::path& path);

void save_dataset(const TrackedDataset& dataset, const std::filesystem::path& path);

void save_class_labels(std::span<const int> class_labels, const std::filesystem::path& path);

}  // namespace odct
